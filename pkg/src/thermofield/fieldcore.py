"""Construction of the min/max scalar fields from a RAW thermal frame.

Pipeline: grid-wise min/max pooling, local extrema suppression (LES),
message passing (MP) and bilinear upsampling back to frame size.
Grids and fields are float64 numpy arrays; frames are 2D uint16 arrays.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from . import _backend
from .errors import ParameterError


class Role(enum.IntEnum):
    MIN = 0
    MAX = 1


class LesTarget(str, enum.Enum):
    MAX_ONLY = "max"
    BOTH = "both"
    NEITHER = "none"


@dataclass(frozen=True)
class FieldscaleParams:
    """Tunables for field construction and post-rescale enhancement.

    ``les_distance=None`` means "derive from the grid": 2 for an 8x8 grid,
    ``max(1, round(grid_rows / 4))`` in general (ties round up).
    """

    grid_rows: int = 8
    grid_cols: int = 8
    les_threshold: float = 100.0
    les_distance: int | None = None
    mp_iterations: int = 7
    les_target: LesTarget = LesTarget.MAX_ONLY
    gamma: float = 1.5
    gamma_brighten: bool = True
    enhance: bool = True
    clahe_clip_limit: float = 2.0
    clahe_tiles: tuple[int, int] = (8, 8)

    def __post_init__(self):
        object.__setattr__(self, "les_target", LesTarget(self.les_target))
        object.__setattr__(self, "clahe_tiles", tuple(int(t) for t in self.clahe_tiles))
        if self.grid_rows < 1 or self.grid_cols < 1:
            raise ParameterError(f"grid must be at least 1x1, got {self.grid_rows}x{self.grid_cols}")
        if self.les_threshold < 0:
            raise ParameterError(f"LES threshold must be >= 0, got {self.les_threshold}")
        if self.les_distance is not None and self.les_distance < 1:
            raise ParameterError(f"LES distance must be >= 1, got {self.les_distance}")
        if self.mp_iterations < 0:
            raise ParameterError(f"MP iterations must be >= 0, got {self.mp_iterations}")
        if self.gamma <= 0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")
        if self.clahe_clip_limit < 1:
            raise ParameterError(f"CLAHE clip limit must be >= 1, got {self.clahe_clip_limit}")
        if len(self.clahe_tiles) != 2 or min(self.clahe_tiles) < 1:
            raise ParameterError(f"CLAHE tiles must be two counts >= 1, got {self.clahe_tiles}")

    @classmethod
    def fast(cls, **overrides) -> "FieldscaleParams":
        """The low-latency setting: one MP iteration, LES threshold 800."""
        return cls(**{"mp_iterations": 1, "les_threshold": 800.0, **overrides})

    @property
    def effective_les_distance(self) -> int:
        if self.les_distance is not None:
            return self.les_distance
        return max(1, int(np.floor(self.grid_rows / 4 + 0.5)))

    def with_(self, **changes) -> "FieldscaleParams":
        return replace(self, **changes)

    def check_frame(self, height: int, width: int) -> None:
        if self.grid_rows > height or self.grid_cols > width:
            raise ParameterError(
                f"grid {self.grid_rows}x{self.grid_cols} exceeds frame {height}x{width}")


def as_frame(frame) -> np.ndarray:
    """Validate and return ``frame`` as a C-contiguous 2D uint16 array."""
    arr = np.asarray(frame)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ParameterError(f"expected a non-empty 2D frame, got shape {arr.shape}")
    if arr.dtype != np.uint16:
        if not np.issubdtype(arr.dtype, np.integer):
            raise ParameterError(f"expected integer RAW counts, got dtype {arr.dtype}")
        if arr.min() < 0 or arr.max() > 65535:
            raise ParameterError("RAW counts must fit in 16 bits")
        arr = arr.astype(np.uint16)
    return np.ascontiguousarray(arr)


def _as_grid(grid) -> np.ndarray:
    g = np.ascontiguousarray(grid, dtype=np.float64)
    if g.ndim != 2 or g.size == 0:
        raise ParameterError(f"expected a non-empty 2D grid, got shape {g.shape}")
    return g


def pool_minmax(frame, grid_rows: int, grid_cols: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-patch minimum and maximum over a floor-partitioned grid.

    Patch ``(r, c)`` covers rows ``[r*H//R, (r+1)*H//R)`` and the analogous
    columns, so every pixel lands in exactly one patch.
    """
    frame = as_frame(frame)
    h, w = frame.shape
    if not (1 <= grid_rows <= h and 1 <= grid_cols <= w):
        raise ParameterError(f"grid {grid_rows}x{grid_cols} does not fit frame {h}x{w}")
    return _backend.kernels.pool_minmax(frame, grid_rows, grid_cols)


def neighborhood_average(grid, cell: tuple[int, int], d: int) -> float:
    """Mean of in-bounds cells within Chebyshev distance ``d`` of ``cell``, excluding it.

    A 1x1 grid has no neighbours; the cell's own value is returned.
    """
    g = _as_grid(grid)
    r, c = cell
    rows, cols = g.shape
    if not (0 <= r < rows and 0 <= c < cols):
        raise ParameterError(f"cell {cell} outside {rows}x{cols} grid")
    if d < 1:
        raise ParameterError(f"distance must be >= 1, got {d}")
    total, n = 0.0, 0
    for rr in range(max(0, r - d), min(rows, r + d + 1)):
        for cc in range(max(0, c - d), min(cols, c + d + 1)):
            if (rr, cc) != (r, c):
                total += g[rr, cc]
                n += 1
    return total / n if n else float(g[r, c])


def les(grid, threshold: float, d: int) -> np.ndarray:
    """Clamp every cell into ``[A - T, A + T]`` around its neighbourhood mean ``A``.

    All means come from the input grid (simultaneous update).
    """
    if threshold < 0 or d < 1:
        raise ParameterError(f"need threshold >= 0 and d >= 1, got {threshold}, {d}")
    return _backend.kernels.les(_as_grid(grid), float(threshold), int(d))


def mp_step(grid, role: Role) -> np.ndarray:
    return mp(grid, 1, role)


def mp(grid, iterations: int, role: Role) -> np.ndarray:
    """Synchronous message passing: ``v <- max(v, mean of 8-neighbours)`` for
    the max grid (``min`` for the min grid), repeated ``iterations`` times."""
    if iterations < 0:
        raise ParameterError(f"iterations must be >= 0, got {iterations}")
    return _backend.kernels.mp(_as_grid(grid), int(iterations), Role(role) is Role.MAX)


def upsample_bilinear(grid, width: int, height: int) -> np.ndarray:
    """Bilinear upsampling with samples at patch centres and edge replication."""
    g = _as_grid(grid)
    if width < g.shape[1] or height < g.shape[0]:
        raise ParameterError(f"cannot upsample {g.shape[0]}x{g.shape[1]} grid to {height}x{width}")
    return _backend.kernels.upsample(g, int(height), int(width))


def enforce_separation(phi_min: np.ndarray, phi_max: np.ndarray) -> np.ndarray:
    """Raise ``phi_max`` to at least ``phi_min + 1`` pixel-wise."""
    return np.maximum(phi_max, phi_min + 1.0)


def build_grids(frame, params: FieldscaleParams) -> tuple[np.ndarray, np.ndarray]:
    """Pooled grids after LES and MP, before upsampling."""
    frame = as_frame(frame)
    params.check_frame(*frame.shape)
    gmin, gmax = pool_minmax(frame, params.grid_rows, params.grid_cols)
    d = params.effective_les_distance
    if params.les_target is LesTarget.BOTH:
        gmin = les(gmin, params.les_threshold, d)
    if params.les_target is not LesTarget.NEITHER:
        gmax = les(gmax, params.les_threshold, d)
    gmin = mp(gmin, params.mp_iterations, Role.MIN)
    gmax = mp(gmax, params.mp_iterations, Role.MAX)
    return gmin, gmax


def build_fields(frame, params: FieldscaleParams | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Full-resolution ``(phi_min, phi_max)`` fields for ``frame``."""
    params = params or FieldscaleParams()
    frame = as_frame(frame)
    h, w = frame.shape
    gmin, gmax = build_grids(frame, params)
    # same result as upsample_bilinear twice plus enforce_separation, in one pass
    return _backend.kernels.field_pair(gmin, gmax, h, w)


def cell_index(n: int, cells: int) -> np.ndarray:
    """Cell index of each of ``n`` pixel positions under the floor partition."""
    edges = _backend._pycore.patch_edges(n, cells)
    return np.searchsorted(edges, np.arange(n), side="right") - 1
