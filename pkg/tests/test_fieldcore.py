import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from thermofield import (FieldscaleParams, ParameterError, Role, build_fields, les, mp, mp_step,
                         neighborhood_average, pool_minmax, upsample_bilinear)
from thermofield.fieldcore import build_grids, cell_index, enforce_separation

pytestmark = pytest.mark.usefixtures("backend")

grids = arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)),
               elements=st.floats(0, 16383, allow_nan=False))


def spot_grid(center):
    g = np.full((3, 3), 100.0)
    g[1, 1] = center
    return g


class TestPool:
    def test_4x4_example(self):
        frame = np.arange(1, 17, dtype=np.uint16).reshape(4, 4)
        mn, mx = pool_minmax(frame, 2, 2)
        np.testing.assert_array_equal(mn, [[1, 3], [9, 11]])
        np.testing.assert_array_equal(mx, [[6, 8], [14, 16]])

    @pytest.mark.parametrize("grid", [(1, 1), (2, 3), (5, 5)])
    def test_constant(self, grid):
        mn, mx = pool_minmax(np.full((10, 12), 500, np.uint16), *grid)
        assert mn.shape == grid
        assert (mn == 500).all() and (mx == 500).all()

    def test_single_cell_is_global(self, rng):
        f = rng.integers(0, 16384, (17, 23)).astype(np.uint16)
        mn, mx = pool_minmax(f, 1, 1)
        assert mn[0, 0] == f.min() and mx[0, 0] == f.max()
        assert mn.dtype == np.float64

    def test_grid_larger_than_frame(self):
        with pytest.raises(ParameterError):
            pool_minmax(np.zeros((4, 4), np.uint16), 5, 2)

    def test_matches_oracle_nondivisible(self, rng):
        for _ in range(30):
            h, w = rng.integers(1, 17, 2)
            R, C = rng.integers(1, h + 1), rng.integers(1, w + 1)
            f = rng.integers(0, 65536, (h, w)).astype(np.uint16)
            mn, mx = pool_minmax(f, R, C)
            omn, omx = oracles.pool(f, R, C)
            np.testing.assert_array_equal(mn, omn)
            np.testing.assert_array_equal(mx, omx)

    def test_bounds_attained(self, rng):
        f = rng.integers(0, 16384, (13, 11)).astype(np.uint16)
        mn, mx = pool_minmax(f, 4, 3)
        ci, cj = cell_index(13, 4), cell_index(11, 3)
        for r in range(4):
            for c in range(3):
                patch = f[np.ix_(ci == r, cj == c)]
                assert patch.size > 0
                assert patch.min() == mn[r, c] and patch.max() == mx[r, c]


class TestNeighborhoodAverage:
    def test_constant(self):
        assert neighborhood_average(np.full((3, 3), 100.0), (1, 1), 1) == 100

    def test_corner_sees_hot_center(self):
        assert neighborhood_average(spot_grid(500), (0, 0), 1) == pytest.approx(700 / 3)

    def test_center_excluded(self):
        assert neighborhood_average(spot_grid(500), (1, 1), 1) == 100

    def test_out_of_grid(self):
        with pytest.raises(ParameterError):
            neighborhood_average(spot_grid(1), (3, 0), 1)


class TestLes:
    def test_constant_unchanged(self):
        g = np.full((4, 4), 100.0)
        np.testing.assert_array_equal(les(g, 100, 2), g)

    def test_hot_center_suppressed(self):
        out = les(spot_grid(500), 100, 1)
        # edges: A = 900/5 = 180, 100 within [80, 280] -> kept
        # corners: A = 700/3, 100 < A - 100 -> raised to 400/3
        expected = spot_grid(200)
        expected[::2, ::2] = 400 / 3
        np.testing.assert_allclose(out, expected, rtol=1e-12)

    def test_mild_center_kept(self):
        np.testing.assert_array_equal(les(spot_grid(150), 100, 1), spot_grid(150))

    def test_input_not_mutated(self):
        g = spot_grid(500)
        les(g, 100, 1)
        assert g[1, 1] == 500

    @settings(max_examples=200, deadline=None)
    @given(grids, st.floats(0, 5000), st.integers(1, 3))
    def test_band_property(self, g, T, d):
        out = les(g, T, d)
        ref = oracles.les(g, T, d)
        np.testing.assert_allclose(out, ref, rtol=1e-9, atol=1e-9)
        for r, c in np.ndindex(g.shape):
            nb = oracles.neighbours(g, r, c, d)
            if not nb:
                assert out[r, c] == g[r, c]
                continue
            A = sum(nb) / len(nb)
            if A - T <= g[r, c] <= A + T:
                assert out[r, c] == g[r, c]
            else:
                assert A - T - 1e-6 <= out[r, c] <= A + T + 1e-6

    @settings(max_examples=50, deadline=None)
    @given(grids)
    def test_infinite_threshold_is_identity(self, g):
        np.testing.assert_array_equal(les(g, 1e300, 2), g)


class TestMp:
    def test_max_example(self):
        out = mp_step(np.array([[0.0, 0.0], [0.0, 9.0]]), Role.MAX)
        np.testing.assert_array_equal(out, [[3, 3], [3, 9]])

    def test_min_example(self):
        out = mp_step(np.array([[9.0, 9.0], [9.0, 0.0]]), Role.MIN)
        np.testing.assert_array_equal(out, [[6, 6], [6, 0]])

    def test_zero_iterations(self, rng):
        g = rng.uniform(0, 1000, (5, 4))
        np.testing.assert_array_equal(mp(g, 0, Role.MAX), g)

    def test_one_iteration_is_step(self, rng):
        g = rng.uniform(0, 1000, (5, 4))
        np.testing.assert_array_equal(mp(g, 1, Role.MIN), mp_step(g, Role.MIN))

    def test_seven_iterations_hot_cell(self):
        g = np.zeros((8, 8))
        g[2, 5] = 1000.0
        ref = g.copy()
        for _ in range(7):
            ref = oracles.mp_step(ref, True)
        np.testing.assert_allclose(mp(g, 7, Role.MAX), ref, rtol=1e-12)

    @pytest.mark.parametrize("role", list(Role))
    def test_constant_fixed_point(self, role):
        g = np.full((6, 6), 42.5)
        np.testing.assert_array_equal(mp(g, 5, role), g)

    @settings(max_examples=200, deadline=None)
    @given(grids)
    def test_monotone_and_bounded(self, g):
        up, down = mp_step(g, Role.MAX), mp_step(g, Role.MIN)
        assert (up >= g).all() and (down <= g).all()
        assert up.max() <= g.max() and down.min() >= g.min()
        np.testing.assert_allclose(up, oracles.mp_step(g, True), rtol=1e-9)
        np.testing.assert_allclose(down, oracles.mp_step(g, False), rtol=1e-9)


class TestUpsample:
    def test_single_cell(self):
        out = upsample_bilinear(np.array([[7.25]]), 9, 5)
        assert out.shape == (5, 9)
        assert (out == 7.25).all()

    def test_constant(self):
        assert (upsample_bilinear(np.full((3, 4), 1234.5), 37, 29) == 1234.5).all()

    def test_2x2_to_4x4(self):
        # samples sit at pixel positions 0.5 and 2.5 on each axis
        out = upsample_bilinear(np.array([[0.0, 100.0], [100.0, 200.0]]), 4, 4)
        np.testing.assert_allclose(out[1:3, 1:3], [[50, 100], [100, 150]])
        # the continuous point midway between all four samples
        assert out[1:3, 1:3].mean() == pytest.approx(100.0)
        # edge replication outside the outer samples
        assert out[0, 0] == 0 and out[3, 3] == 200

    def test_matches_oracle(self, rng):
        for _ in range(40):
            R, C = rng.integers(1, 6, 2)
            H, W = rng.integers(R, 17), rng.integers(C, 17)
            g = rng.uniform(0, 16383, (R, C))
            np.testing.assert_allclose(upsample_bilinear(g, W, H), oracles.bilinear(g, W, H),
                                       rtol=1e-9, atol=1e-9)

    def test_too_small(self):
        with pytest.raises(ParameterError):
            upsample_bilinear(np.zeros((4, 4)), 3, 8)


class TestBuildFields:
    def test_constant_frame(self):
        phi_min, phi_max = build_fields(np.full((64, 80), 777, np.uint16))
        assert (phi_min == 777).all() and (phi_max == 778).all()

    def test_global_reduction(self, rng):
        f = rng.integers(100, 9000, (40, 50)).astype(np.uint16)
        p = FieldscaleParams(grid_rows=1, grid_cols=1, mp_iterations=0, les_target="none")
        phi_min, phi_max = build_fields(f, p)
        assert (phi_min == f.min()).all() and (phi_max == f.max()).all()

    def test_separation_always_holds(self, rng):
        for _ in range(20):
            f = rng.integers(0, 16384, (32, 32)).astype(np.uint16)
            f[rng.integers(0, 32), rng.integers(0, 32)] = 16383
            phi_min, phi_max = build_fields(f, FieldscaleParams(les_threshold=0))
            assert (phi_max >= phi_min + 1).all()

    def test_hot_object_leaves_min_field(self, rng):
        f = (3000 + rng.integers(-100, 100, (256, 256))).astype(np.uint16)
        f[::32, ::32] = 2000  # each patch minimum sits at its corner, outside the block
        hot = f.copy()
        hot[100:130, 100:130] = 12000
        base_min, base_max = build_fields(f)
        hot_min, hot_max = build_fields(hot)
        np.testing.assert_array_equal(hot_min, base_min)
        assert hot_max[115, 115] > base_max[115, 115]
        assert (hot_max >= base_max).all()

    def test_default_les_distance(self):
        assert FieldscaleParams().effective_les_distance == 2
        assert FieldscaleParams(grid_rows=4, grid_cols=4).effective_les_distance == 1
        assert FieldscaleParams(grid_rows=10, grid_cols=10).effective_les_distance == 3
        assert FieldscaleParams(grid_rows=16, grid_cols=16).effective_les_distance == 4
        assert FieldscaleParams(les_distance=3).effective_les_distance == 3

    def test_les_target_selection(self, rng):
        f = rng.integers(0, 16384, (64, 64)).astype(np.uint16)
        base = dict(mp_iterations=0, les_threshold=10)
        none_min, none_max = build_grids(f, FieldscaleParams(les_target="none", **base))
        max_min, max_max = build_grids(f, FieldscaleParams(les_target="max", **base))
        both_min, both_max = build_grids(f, FieldscaleParams(les_target="both", **base))
        np.testing.assert_array_equal(none_min, max_min)
        assert not np.array_equal(none_max, max_max)
        np.testing.assert_array_equal(max_max, both_max)
        assert not np.array_equal(max_min, both_min)

    @pytest.mark.parametrize("kw", [dict(grid_rows=0), dict(les_threshold=-1), dict(les_distance=0),
                                    dict(mp_iterations=-1), dict(gamma=0), dict(clahe_clip_limit=0.5)])
    def test_invalid_params(self, kw):
        with pytest.raises(ParameterError):
            FieldscaleParams(**kw)

    def test_fused_fields_match_separate_steps(self, rng):
        for _ in range(10):
            h, w = (int(v) for v in rng.integers(8, 80, 2))
            f = rng.integers(0, 16384, (h, w)).astype(np.uint16)
            p = FieldscaleParams(grid_rows=4, grid_cols=5, les_threshold=float(rng.uniform(0, 500)))
            gmin, gmax = build_grids(f, p)
            lo = upsample_bilinear(gmin, w, h)
            hi = enforce_separation(lo, upsample_bilinear(gmax, w, h))
            phi_min, phi_max = build_fields(f, p)
            np.testing.assert_array_equal(phi_min, lo)
            np.testing.assert_array_equal(phi_max, hi)

    def test_grid_exceeds_frame(self):
        with pytest.raises(ParameterError):
            build_fields(np.zeros((4, 4), np.uint16), FieldscaleParams())

    def test_fast_preset(self):
        p = FieldscaleParams.fast()
        assert p.mp_iterations == 1 and p.les_threshold == 800

    def test_deterministic(self, rng):
        f = rng.integers(0, 16384, (120, 160)).astype(np.uint16)
        a, b = build_fields(f), build_fields(f)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_accepts_wider_int_dtypes(self):
        f = np.arange(64, dtype=np.int64).reshape(8, 8)
        build_fields(f)
        with pytest.raises(ParameterError):
            build_fields(f.astype(float))
