"""No-reference image quality metrics: mean gradient and normalized entropy."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ParameterError

log = logging.getLogger(__name__)


def mean_gradient(img: np.ndarray) -> float:
    """Mean central-difference gradient magnitude over interior pixels, scaled by 1/255."""
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 2 or a.shape[1] < 2:
        raise ParameterError(f"mean_gradient needs a 2D image of at least 2x2, got {a.shape}")
    if a.shape[0] < 3 or a.shape[1] < 3:
        return 0.0  # no interior pixels
    gx = (a[1:-1, 2:] - a[1:-1, :-2]) / 2.0
    gy = (a[2:, 1:-1] - a[:-2, 1:-1]) / 2.0
    return float(np.mean(np.sqrt(gx * gx + gy * gy)) / 255.0)


def entropy(img: np.ndarray) -> float:
    """Shannon entropy of the 256-bin histogram in bits, divided by 8."""
    hist = np.bincount(np.asarray(img, dtype=np.uint8).ravel(), minlength=256)
    p = hist[hist > 0] / hist.sum()
    h = float(-np.sum(p * np.log2(p))) / 8.0
    return min(max(h, 0.0), 1.0)


@dataclass
class IqaReport:
    image_id: str
    gradient: float
    entropy: float


def assess(img: np.ndarray, image_id: str = "") -> IqaReport:
    return IqaReport(image_id, mean_gradient(img), entropy(img))


@dataclass
class BatchReport:
    rows: list[IqaReport]
    errors: list[tuple[str, str]] = field(default_factory=list)

    @property
    def mean(self) -> tuple[float, float]:
        return (float(np.mean([r.gradient for r in self.rows])),
                float(np.mean([r.entropy for r in self.rows])))

    @property
    def std(self) -> tuple[float, float]:
        return (float(np.std([r.gradient for r in self.rows])),
                float(np.std([r.entropy for r in self.rows])))

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(["image_id", "gradient", "entropy"])
        for r in self.rows:
            w.writerow([r.image_id, repr(r.gradient), repr(r.entropy)])
        if self.rows:
            w.writerow(["mean", *map(repr, self.mean)])
            w.writerow(["std", *map(repr, self.std)])
        for image_id, msg in self.errors:
            buf.write(f"# error,{image_id},{msg}\n")
        return buf.getvalue()


def iqa_batch(paths: Iterable[str | Path]) -> BatchReport:
    """Score every 8-bit image in ``paths``; unreadable files are recorded, not fatal."""
    from .imgio import load_image8

    paths = list(paths)
    if not paths:
        raise ParameterError("iqa_batch needs at least one image")
    rows, errors = [], []
    for p in paths:
        p = Path(p)
        try:
            rows.append(assess(load_image8(p), p.name))
        except (OSError, ValueError) as exc:
            log.warning("skipping %s: %s", p, exc)
            errors.append((p.name, str(exc)))
    return BatchReport(rows, errors)
