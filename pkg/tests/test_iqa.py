import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from thermofield import ParameterError
from thermofield.imgio import save_image8, save_raw
from thermofield.iqa import BatchReport, IqaReport, assess, entropy, iqa_batch, mean_gradient

images = arrays(np.uint8, st.tuples(st.integers(3, 12), st.integers(3, 12)))


class TestGradient:
    def test_constant(self):
        assert mean_gradient(np.full((10, 10), 77, np.uint8)) == 0

    @pytest.mark.parametrize("s", [1, 3, 10])
    def test_horizontal_ramp(self, s):
        img = (np.arange(20) * s).astype(np.uint8)[None, :].repeat(6, axis=0)
        assert mean_gradient(img) == pytest.approx(s / 255)

    def test_checkerboard_cancels(self):
        img = ((np.indices((9, 9)).sum(axis=0) % 2) * 255).astype(np.uint8)
        assert mean_gradient(img) == 0

    def test_step_edge(self):
        img = np.zeros((5, 6), np.uint8)
        img[:, 3:] = 255
        # interior columns 1..4: columns 2 and 3 see a half-step of 127.5
        assert mean_gradient(img) == pytest.approx(0.5 * 2 / 4)

    def test_tiny(self):
        assert mean_gradient(np.zeros((2, 5), np.uint8)) == 0
        with pytest.raises(ParameterError):
            mean_gradient(np.zeros((1, 5), np.uint8))

    @settings(max_examples=100, deadline=None)
    @given(images)
    def test_flip_and_transpose_invariant(self, img):
        g = mean_gradient(img)
        assert mean_gradient(img[::-1]) == pytest.approx(g)
        assert mean_gradient(img[:, ::-1]) == pytest.approx(g)
        assert mean_gradient(img.T) == pytest.approx(g)


class TestEntropy:
    def test_constant(self):
        assert entropy(np.full((8, 8), 9, np.uint8)) == 0

    def test_two_levels(self):
        img = np.zeros((4, 4), np.uint8)
        img[:, :2] = 255
        assert entropy(img) == 0.125

    def test_uniform_histogram_is_one(self):
        assert entropy(np.arange(256, dtype=np.uint8).reshape(16, 16)) == 1.0
        assert entropy(np.tile(np.arange(256, dtype=np.uint8), 3).reshape(24, 32)) == 1.0

    @settings(max_examples=100, deadline=None)
    @given(images, st.randoms(use_true_random=False))
    def test_permutation_invariant_and_matches_oracle(self, img, rnd):
        flat = img.ravel().tolist()
        rnd.shuffle(flat)
        shuffled = np.array(flat, np.uint8).reshape(img.shape)
        assert entropy(shuffled) == pytest.approx(entropy(img))
        assert entropy(img) == pytest.approx(oracles.entropy_bits(img) / 8, abs=1e-12)
        assert 0 <= entropy(img) <= 1


class TestBatch:
    def test_report_and_csv(self, tmp_path):
        ramp = (np.arange(16) * 3).astype(np.uint8)[None, :].repeat(5, axis=0)
        flat = np.full((5, 16), 40, np.uint8)
        save_image8(ramp, tmp_path / "a.png")
        save_image8(flat, tmp_path / "b.png")
        report = iqa_batch([tmp_path / "a.png", tmp_path / "b.png"])
        assert [r.image_id for r in report.rows] == ["a.png", "b.png"]
        assert report.rows[0].gradient == pytest.approx(3 / 255)
        assert report.mean[0] == pytest.approx(1.5 / 255)
        assert report.std[0] == pytest.approx(1.5 / 255)  # population std
        lines = report.to_csv().splitlines()
        assert lines[0] == "image_id,gradient,entropy"
        assert lines[1].startswith("a.png,") and lines[3].startswith("mean,")
        assert lines[4].startswith("std,")
        assert not report.to_csv(header=False).startswith("image_id")

    def test_errors_are_recorded(self, tmp_path):
        save_image8(np.zeros((4, 4), np.uint8), tmp_path / "ok.png")
        save_raw(np.zeros((4, 4), np.uint16), tmp_path / "deep.png")
        report = iqa_batch([tmp_path / "ok.png", tmp_path / "missing.png", tmp_path / "deep.png"])
        assert len(report.rows) == 1
        assert [e[0] for e in report.errors] == ["missing.png", "deep.png"]
        assert "# error,missing.png," in report.to_csv()

    def test_empty(self):
        with pytest.raises(ParameterError):
            iqa_batch([])

    def test_single_row_std_zero(self):
        r = BatchReport([IqaReport("x", 0.25, 0.5)])
        assert r.std == (0.0, 0.0)


def test_assess():
    rep = assess(np.arange(256, dtype=np.uint8).reshape(16, 16), "u")
    assert rep.image_id == "u" and rep.entropy == 1.0
    assert math.isfinite(rep.gradient)
