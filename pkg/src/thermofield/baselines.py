"""Global (1D lookup table) rescaling baselines.

All functions take a 2D RAW frame and return a uint8 image of the same
shape. ``cgf_rescale`` is a simplified conditional-Gaussian variant: plain
Gaussian kernels replace the conditional ones.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import ParameterError
from .fieldcore import as_frame
from .rescaler import clahe

MSR_SIGMAS = (15.0, 80.0, 250.0)


@dataclass(frozen=True)
class ClipBounds:
    lo: float
    hi: float

    def resolved(self) -> "ClipBounds":
        """Degenerate bounds (``hi <= lo``) become ``(lo, lo + 1)``."""
        return self if self.hi > self.lo else ClipBounds(self.lo, self.lo + 1.0)


def linear_rescale(values: np.ndarray, bounds: ClipBounds) -> np.ndarray:
    lo, hi = bounds.resolved().lo, bounds.resolved().hi
    t = 255.0 * (np.asarray(values, dtype=np.float64) - lo) / (hi - lo)
    return np.clip(np.floor(t + 0.5), 0, 255).astype(np.uint8)


def minmax_rescale(frame) -> np.ndarray:
    frame = as_frame(frame)
    return linear_rescale(frame, ClipBounds(float(frame.min()), float(frame.max())))


def percentile_nearest_rank(values: np.ndarray, pct: float) -> float:
    """Nearest-rank percentile: the ``ceil(pct/100 * n)``-th smallest value."""
    flat = np.sort(np.asarray(values).ravel())
    n = flat.size
    rank = int(np.ceil(pct / 100.0 * n))
    return float(flat[min(max(rank, 1), n) - 1])


def _check_pcts(lo_pct: float, hi_pct: float) -> None:
    if not 0 <= lo_pct < hi_pct <= 100:
        raise ParameterError(f"need 0 <= lo_pct < hi_pct <= 100, got {lo_pct}, {hi_pct}")


def percentile_bounds(frame, lo_pct: float = 1.0, hi_pct: float = 99.0) -> ClipBounds:
    _check_pcts(lo_pct, hi_pct)
    frame = as_frame(frame)
    return ClipBounds(percentile_nearest_rank(frame, lo_pct), percentile_nearest_rank(frame, hi_pct))


def clip_percentile_rescale(frame, lo_pct: float = 1.0, hi_pct: float = 99.0) -> np.ndarray:
    return linear_rescale(as_frame(frame), percentile_bounds(frame, lo_pct, hi_pct))


def video_bounds(frames: Sequence, lo_pct: float = 1.0, hi_pct: float = 99.0) -> ClipBounds:
    """Per-frame percentile bounds averaged over the whole sequence."""
    if len(frames) == 0:
        raise ParameterError("clip_video_rescale needs at least one frame")
    bounds = [percentile_bounds(f, lo_pct, hi_pct) for f in frames]
    return ClipBounds(float(np.mean([b.lo for b in bounds])), float(np.mean([b.hi for b in bounds])))


def clip_video_rescale(frames: Sequence, lo_pct: float = 1.0, hi_pct: float = 99.0) -> list[np.ndarray]:
    shared = video_bounds(frames, lo_pct, hi_pct)
    return [linear_rescale(as_frame(f), shared) for f in frames]


def he30(frame, bins: int = 30) -> np.ndarray:
    """Histogram equalization over ``bins`` uniform bins spanning ``[min, max]``."""
    frame = as_frame(frame)
    lo, hi = float(frame.min()), float(frame.max())
    if hi > lo:
        idx = np.floor((frame - lo) / (hi - lo) * bins).astype(np.int64)
        idx = np.minimum(idx, bins - 1)
    else:
        idx = np.zeros(frame.shape, dtype=np.int64)
    cdf = np.cumsum(np.bincount(idx.ravel(), minlength=bins)) / idx.size
    return np.clip(np.floor(255.0 * cdf[idx] + 0.5), 0, 255).astype(np.uint8)


def he30_clahe(frame, clip_limit: float = 2.0, tiles: tuple[int, int] = (8, 8)) -> np.ndarray:
    out = he30(frame)
    tiles = (min(tiles[0], out.shape[0]), min(tiles[1], out.shape[1]))
    return clahe(out, clip_limit, tiles)


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian blur truncated at radius ``3 * sigma`` with edge replication."""
    return ndimage.gaussian_filter(np.asarray(img, dtype=np.float64), sigma, mode="nearest", truncate=3.0)


def _check_sigmas(sigmas: Sequence[float]) -> list[float]:
    sigmas = [float(s) for s in sigmas]
    if not sigmas or min(sigmas) <= 0:
        raise ParameterError(f"sigmas must be a non-empty list of positive values, got {sigmas}")
    return sigmas


def _stretch(values: np.ndarray) -> np.ndarray:
    return linear_rescale(values, ClipBounds(float(values.min()), float(values.max())))


def msr_response(frame, sigmas: Sequence[float] = MSR_SIGMAS) -> np.ndarray:
    sigmas = _check_sigmas(sigmas)
    raw = as_frame(frame).astype(np.float64)
    log_i = np.log(raw + 1.0)
    r = np.zeros_like(raw)
    for s in sigmas:
        r += log_i - np.log(gaussian_blur(raw, s) + 1.0)
    r /= len(sigmas)
    # exact zero on flat input; blur round-off would otherwise be stretched
    r[np.abs(r) < 1e-12] = 0.0
    return r


def msr_rescale(frame, sigmas: Sequence[float] = MSR_SIGMAS) -> np.ndarray:
    """Multi-scale Retinex, stretched to [0, 255] over its own range."""
    return _stretch(msr_response(frame, sigmas))


def cgf_response(frame, sigmas: Sequence[float] = MSR_SIGMAS) -> np.ndarray:
    """Log image minus the mean of its multi-scale blurs, clipped at mean +/- 3 std."""
    sigmas = _check_sigmas(sigmas)
    log_i = np.log(as_frame(frame).astype(np.float64) + 1.0)
    base = np.mean([gaussian_blur(log_i, s) for s in sigmas], axis=0)
    detail = log_i - base
    detail[np.abs(detail) < 1e-12] = 0.0
    mu, sd = detail.mean(), detail.std()
    return np.clip(detail, mu - 3.0 * sd, mu + 3.0 * sd)


def cgf_rescale(frame, sigmas: Sequence[float] = MSR_SIGMAS) -> np.ndarray:
    return _stretch(cgf_response(frame, sigmas))
