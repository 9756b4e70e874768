"""Per-phase wall-clock timing of the fieldscale pipeline.

Field construction (pool, LES, MP, upsample) and field-based rescaling
(rescale plus enhancement) are timed separately around adjacent calls of
the same run; decode/encode is never inside a timing bracket.
"""
from __future__ import annotations

import csv
import enum
import io
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _backend
from .errors import ParameterError
from .fieldcore import FieldscaleParams, as_frame, build_fields
from .rescaler import apply_fields

PHASES = ("field_construction", "rescaling", "total")
CSV_FIELDS = ["setting", "axis", "value", "phase", "mean_ms", "std_ms", "samples", "width", "height"]


class Setting(str, enum.Enum):
    DEFAULT = "default"
    FAST = "fast"
    CUSTOM = "custom"


class Axis(str, enum.Enum):
    GRID = "grid"
    ITERS = "iters"
    LES_DISTANCE = "les_distance"
    LES_THRESHOLD = "les_threshold"


@dataclass
class Stat:
    mean_ms: float
    std_ms: float

    @classmethod
    def of(cls, seconds: Sequence[float]) -> "Stat":
        ms = np.asarray(seconds, dtype=np.float64) * 1e3
        return cls(float(ms.mean()), float(ms.std()))


@dataclass
class TimingRecord:
    setting: Setting
    field_construction: Stat
    rescaling: Stat
    total: Stat
    samples: int
    width: int
    height: int
    axis: str = ""
    value: str = ""
    backend: str = ""
    # per-run seconds for each phase, in run order (runs line up across
    # records produced by one bench_settings call)
    raw: dict = field(default_factory=dict, repr=False)

    def rows(self) -> list[dict]:
        return [{
            "setting": self.setting.value, "axis": self.axis, "value": self.value, "phase": phase,
            "mean_ms": f"{getattr(self, phase).mean_ms:.4f}", "std_ms": f"{getattr(self, phase).std_ms:.4f}",
            "samples": self.samples, "width": self.width, "height": self.height,
        } for phase in PHASES]


def classify(params: FieldscaleParams) -> Setting:
    if params == FieldscaleParams():
        return Setting.DEFAULT
    if params == FieldscaleParams.fast():
        return Setting.FAST
    return Setting.CUSTOM


def _run_once(frame: np.ndarray, params: FieldscaleParams) -> tuple[float, float]:
    t0 = time.perf_counter()
    phi_min, phi_max = build_fields(frame, params)
    t1 = time.perf_counter()
    apply_fields(frame, phi_min, phi_max, params)
    t2 = time.perf_counter()
    return t1 - t0, t2 - t1


def bench_settings(frames: Sequence[np.ndarray], settings: Sequence[FieldscaleParams],
                   repeats: int = 1, warmup: int = 3, backend: str | None = None) -> list[TimingRecord]:
    """Time every frame ``repeats`` times under each of ``settings``.

    Settings are interleaved per run (frame 0 under A, then B, ...) so slow
    drift in machine speed lands on all of them alike; comparisons between
    the returned records are then meaningful even when the gap is small.
    """
    settings = list(settings)
    if len(frames) == 0:
        raise ParameterError("benchmark needs at least one frame")
    if not settings:
        raise ParameterError("benchmark needs at least one parameter set")
    if repeats < 1 or warmup < 0:
        raise ParameterError(f"need repeats >= 1 and warmup >= 0, got {repeats}, {warmup}")
    frames = [as_frame(f) for f in frames]
    name = backend or _backend.NAME
    fc = [[] for _ in settings]
    rs = [[] for _ in settings]
    with _backend.use(name):
        for i in range(warmup):
            for p in settings:
                _run_once(frames[i % len(frames)], p)
        for frame in frames:
            for _ in range(repeats):
                for k, p in enumerate(settings):
                    a, b = _run_once(frame, p)
                    fc[k].append(a)
                    rs[k].append(b)
    h, w = frames[0].shape
    out = []
    for k, p in enumerate(settings):
        raw = {"field_construction": np.asarray(fc[k]), "rescaling": np.asarray(rs[k])}
        raw["total"] = raw["field_construction"] + raw["rescaling"]
        out.append(TimingRecord(classify(p), *(Stat.of(raw[ph]) for ph in PHASES),
                                len(fc[k]), w, h, backend=name, raw=raw))
    return out


def paired_gap_ms(slow: TimingRecord, fast: TimingRecord, phase: str = "field_construction") -> float:
    """Median over runs of ``slow - fast`` for records from one interleaved
    ``bench_settings`` call; robust to the jitter that swamps small gaps in the mean."""
    a, b = slow.raw[phase], fast.raw[phase]
    if len(a) != len(b):
        raise ParameterError("records do not come from the same interleaved run")
    return float(np.median(a - b) * 1e3)


def bench_pipeline(frames: Sequence[np.ndarray], params: FieldscaleParams | None = None,
                   repeats: int = 1, warmup: int = 3, backend: str | None = None) -> TimingRecord:
    """Time every frame ``repeats`` times after ``warmup`` discarded runs."""
    return bench_settings(frames, [params or FieldscaleParams()], repeats, warmup, backend)[0]


def params_for(axis: Axis, value) -> FieldscaleParams:
    axis = Axis(axis)
    if axis is Axis.GRID:
        n = int(value)
        return FieldscaleParams(grid_rows=n, grid_cols=n)
    if axis is Axis.ITERS:
        return FieldscaleParams(mp_iterations=int(value))
    if axis is Axis.LES_DISTANCE:
        return FieldscaleParams(les_distance=int(value))
    return FieldscaleParams(les_threshold=float(value))


def bench_sweep(frames: Sequence[np.ndarray], axis: Axis, values: Iterable,
                repeats: int = 1, warmup: int = 3, backend: str | None = None) -> list[TimingRecord]:
    """One record per value of ``axis``, every other parameter at its default."""
    values = list(values)
    if not values:
        raise ParameterError("bench_sweep needs at least one value")
    out = bench_settings(frames, [params_for(axis, v) for v in values], repeats, warmup, backend)
    for rec, v in zip(out, values):
        rec.axis, rec.value = Axis(axis).value, str(v)
    return out


def compare_backends(frames: Sequence[np.ndarray], params: FieldscaleParams | None = None,
                     repeats: int = 1, warmup: int = 3) -> dict[str, TimingRecord]:
    return {name: bench_pipeline(frames, params, repeats, warmup, backend=name)
            for name in _backend.available()}


def to_csv(records: Iterable[TimingRecord]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for rec in records:
        w.writerows(rec.rows())
    return buf.getvalue()
