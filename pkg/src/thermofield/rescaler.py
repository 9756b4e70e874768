"""Field-based rescaling to 8 bits, enhancement and temporal smoothing."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _backend
from .errors import ParameterError
from .fieldcore import FieldscaleParams, as_frame, build_fields, enforce_separation

PreTransform = Callable[[np.ndarray], np.ndarray]


def _check_same_shape(*arrays: np.ndarray) -> None:
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise ParameterError(f"dimension mismatch: {sorted(shapes)}")


def rescale_with_fields(frame, phi_min: np.ndarray, phi_max: np.ndarray) -> np.ndarray:
    """Clamp-and-convert ``255 * (I - phi_min) / (phi_max - phi_min)`` to uint8.

    Rounds half away from zero. A non-positive denominator means the fields
    were not separated and raises ``RuntimeError``.
    """
    frame = as_frame(frame)
    phi_min = np.ascontiguousarray(phi_min, dtype=np.float64)
    phi_max = np.ascontiguousarray(phi_max, dtype=np.float64)
    _check_same_shape(frame, phi_min, phi_max)
    return _backend.kernels.rescale(frame, phi_min, phi_max)


def gamma_table(gamma: float, brighten: bool = True) -> np.ndarray:
    """256-entry lookup table for ``255 * (v/255) ** (1/gamma)``.

    ``brighten=False`` uses the exponent ``gamma`` instead of ``1/gamma``.
    """
    if not gamma > 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    exponent = 1.0 / gamma if brighten else gamma
    v = np.arange(256, dtype=np.float64) / 255.0
    return np.clip(np.floor(255.0 * v ** exponent + 0.5), 0, 255).astype(np.uint8)


def gamma_correct(img: np.ndarray, gamma: float, brighten: bool = True) -> np.ndarray:
    return gamma_table(gamma, brighten)[np.asarray(img, dtype=np.uint8)]


def clahe(img: np.ndarray, clip_limit: float = 2.0, tiles: tuple[int, int] = (8, 8)) -> np.ndarray:
    """Contrast-limited adaptive histogram equalization on an 8-bit image.

    Tiles follow the same floor partition as the field grid. Each tile's
    256-bin histogram is clipped at ``clip_limit * tile_pixels / 256``, the
    excess spread evenly over all bins, and pixels blend the mappings of the
    four nearest tile centres bilinearly (edge tiles replicate).
    """
    img = np.ascontiguousarray(img, dtype=np.uint8)
    if img.ndim != 2:
        raise ParameterError(f"expected a 2D 8-bit image, got shape {img.shape}")
    tr, tc = tiles
    if tr < 1 or tc < 1 or clip_limit < 1:
        raise ParameterError(f"need tiles >= 1 and clip_limit >= 1, got {tiles}, {clip_limit}")
    if tr > img.shape[0] or tc > img.shape[1]:
        raise ParameterError(f"{tr}x{tc} tiles do not fit a {img.shape[0]}x{img.shape[1]} image")
    return _backend.kernels.clahe(img, float(clip_limit), int(tr), int(tc))


def enhance(img: np.ndarray, params: FieldscaleParams) -> np.ndarray:
    """Gamma correction followed by CLAHE (the enabled post-rescale stage)."""
    out = gamma_correct(img, params.gamma, params.gamma_brighten)
    h, w = out.shape
    tiles = (min(params.clahe_tiles[0], h), min(params.clahe_tiles[1], w))
    return clahe(out, params.clahe_clip_limit, tiles)


@dataclass
class TemporalState:
    """Fields carried from the previous frame of one stream.

    ``alpha`` is the weight on history: 0 disables smoothing, 1 freezes the
    fields at the first frame.
    """

    alpha: float = 0.0
    prev_min: Optional[np.ndarray] = None
    prev_max: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ParameterError(f"alpha must lie in [0, 1], got {self.alpha}")
        if (self.prev_min is None) != (self.prev_max is None):
            raise ParameterError("prev_min and prev_max must be given together")


def smooth_fields(current: tuple[np.ndarray, np.ndarray],
                  state: TemporalState | None) -> tuple[np.ndarray, np.ndarray]:
    cur_min, cur_max = current
    if state is None or state.prev_min is None:
        return cur_min, cur_max
    _check_same_shape(cur_min, cur_max, state.prev_min, state.prev_max)
    a = state.alpha
    out_min = a * state.prev_min + (1.0 - a) * cur_min
    out_max = a * state.prev_max + (1.0 - a) * cur_max
    return out_min, enforce_separation(out_min, out_max)


def apply_fields(frame, phi_min, phi_max, params: FieldscaleParams) -> np.ndarray:
    """Rescale with the given fields and run enhancement if enabled."""
    out = rescale_with_fields(frame, phi_min, phi_max)
    return enhance(out, params) if params.enhance else out


def fieldscale(frame, params: FieldscaleParams | None = None,
               state: TemporalState | None = None,
               pre_transform: PreTransform | None = None) -> tuple[np.ndarray, TemporalState]:
    """Rescale one RAW frame to 8 bits with locality-aware fields.

    ``pre_transform`` is an optional enhancement applied to the RAW frame
    while the fields are built from the untouched frame; its result is what
    gets rescaled. The returned state holds the fields actually used, so
    passing it back in for the next frame enables temporal smoothing.
    """
    params = params or FieldscaleParams()
    frame = as_frame(frame)
    if pre_transform is None:
        fields = build_fields(frame, params)
        target = frame
    else:
        with ThreadPoolExecutor(max_workers=1) as pool:
            pending = pool.submit(pre_transform, frame.copy())
            fields = build_fields(frame, params)
            target = as_frame(pending.result())
        _check_same_shape(frame, target)
    phi_min, phi_max = smooth_fields(fields, state)
    alpha = state.alpha if state is not None else 0.0
    out = apply_fields(target, phi_min, phi_max, params)
    return out, TemporalState(alpha, phi_min, phi_max)
