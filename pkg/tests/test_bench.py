import csv
import io

import numpy as np
import pytest

from thermofield import FieldscaleParams, ParameterError, _backend
from thermofield import bench
from thermofield.synthetic import thermal_scene


@pytest.fixture(scope="module")
def frames():
    rng = np.random.default_rng(7)
    return [thermal_scene(rng, 128, 160) for _ in range(3)]


def test_single_repeat_single_frame_has_zero_std(frames):
    rec = bench.bench_pipeline(frames[:1], repeats=1, warmup=0)
    assert rec.samples == 1
    assert rec.total.std_ms == 0 and rec.field_construction.std_ms == 0
    assert rec.total.mean_ms == pytest.approx(rec.field_construction.mean_ms + rec.rescaling.mean_ms)


def test_record_shape(frames):
    rec = bench.bench_pipeline(frames, FieldscaleParams.fast(), repeats=2, warmup=1)
    assert rec.setting is bench.Setting.FAST
    assert rec.samples == 6 and (rec.width, rec.height) == (160, 128)
    assert rec.backend == _backend.NAME


def test_classify():
    assert bench.classify(FieldscaleParams()) is bench.Setting.DEFAULT
    assert bench.classify(FieldscaleParams.fast()) is bench.Setting.FAST
    assert bench.classify(FieldscaleParams(mp_iterations=3)) is bench.Setting.CUSTOM


def test_more_iterations_cost_more(frames):
    # N=7 vs N=1 on an 8x8 grid is a tiny gap; a sweep over much larger
    # iteration counts keeps this check robust at test scale
    few, many = bench.bench_sweep(frames, bench.Axis.ITERS, [1, 200], repeats=5, warmup=2)
    assert few.field_construction.mean_ms < many.field_construction.mean_ms


def test_settings_are_interleaved(frames, monkeypatch):
    seen = []
    monkeypatch.setattr(bench, "_run_once", lambda f, p: (seen.append(p.mp_iterations), (0.0, 0.0))[1])
    bench.bench_settings(frames[:2], [FieldscaleParams(), FieldscaleParams.fast()], repeats=2, warmup=1)
    assert seen == [7, 1] * 5


def test_sweep_and_csv(frames):
    recs = bench.bench_sweep(frames[:1], bench.Axis.ITERS, [0, 3], repeats=1, warmup=0)
    assert [r.value for r in recs] == ["0", "3"]
    assert recs[1].setting is bench.Setting.CUSTOM
    rows = list(csv.DictReader(io.StringIO(bench.to_csv(recs))))
    assert list(rows[0]) == bench.CSV_FIELDS
    assert len(rows) == 6
    assert {r["phase"] for r in rows} == set(bench.PHASES)
    assert all(r["axis"] == "iters" for r in rows)
    assert all(float(r["mean_ms"]) >= 0 for r in rows)


@pytest.mark.parametrize("axis,value,attr,expected", [
    ("grid", "4", "grid_rows", 4), ("iters", "2", "mp_iterations", 2),
    ("les_distance", "1", "les_distance", 1), ("les_threshold", "50", "les_threshold", 50.0),
])
def test_params_for(axis, value, attr, expected):
    assert getattr(bench.params_for(axis, value), attr) == expected


def test_compare_backends(frames):
    recs = bench.compare_backends(frames[:1], repeats=1, warmup=0)
    assert set(recs) == set(_backend.available())
    assert all(r.backend == name for name, r in recs.items())


def test_invalid():
    with pytest.raises(ParameterError):
        bench.bench_pipeline([])
    with pytest.raises(ParameterError):
        bench.bench_pipeline([np.zeros((64, 64), np.uint16)], repeats=0)


def test_raw_samples_and_paired_gap(frames):
    a, b = bench.bench_settings(frames[:1], [FieldscaleParams(), FieldscaleParams.fast()], repeats=3, warmup=0)
    assert len(a.raw["total"]) == 3
    np.testing.assert_allclose(a.raw["total"], a.raw["field_construction"] + a.raw["rescaling"])
    assert a.total.mean_ms == pytest.approx(a.raw["total"].mean() * 1e3)
    gap = bench.paired_gap_ms(a, b)
    assert gap == pytest.approx(np.median(a.raw["field_construction"] - b.raw["field_construction"]) * 1e3)
    c = bench.bench_pipeline(frames[:1], repeats=1, warmup=0)
    with pytest.raises(ParameterError):
        bench.paired_gap_ms(a, c)
