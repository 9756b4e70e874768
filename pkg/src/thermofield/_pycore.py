"""Pure numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_core.pyx``.
The arithmetic is written in the same order in both so the two backends
produce bit-identical results; keep them in lockstep when editing.
"""
from __future__ import annotations

import numpy as np


def patch_edges(n: int, cells: int) -> np.ndarray:
    """Floor partition boundaries: cell ``i`` spans ``[e[i], e[i+1])``."""
    return (np.arange(cells + 1, dtype=np.int64) * n) // cells


def _centers(n: int, cells: int) -> np.ndarray:
    e = patch_edges(n, cells)
    return (e[:-1] + e[1:] - 1).astype(np.float64) / 2.0


def _interp_index(n: int, cells: int):
    """Lower/upper sample index and weight for each of ``n`` pixel positions."""
    c = _centers(n, cells)
    pos = np.arange(n, dtype=np.float64)
    hi = np.searchsorted(c, pos, side="right")
    lo = np.clip(hi - 1, 0, cells - 1)
    hi = np.clip(hi, 0, cells - 1)
    w = np.zeros(n, dtype=np.float64)
    inner = lo != hi
    w[inner] = (pos[inner] - c[lo[inner]]) / (c[hi[inner]] - c[lo[inner]])
    return lo, hi, w


def pool_minmax(frame: np.ndarray, rows: int, cols: int):
    ey = patch_edges(frame.shape[0], rows)
    ex = patch_edges(frame.shape[1], cols)
    mn = np.minimum.reduceat(np.minimum.reduceat(frame, ey[:-1], axis=0), ex[:-1], axis=1)
    mx = np.maximum.reduceat(np.maximum.reduceat(frame, ey[:-1], axis=0), ex[:-1], axis=1)
    return mn.astype(np.float64), mx.astype(np.float64)


def _neighbor_mean(grid: np.ndarray, d: int):
    """Mean over in-bounds cells within Chebyshev ``d``, excluding the centre.

    The mean is clamped to the neighbours' own min/max so round-off can never
    push it outside their range (constant neighbourhoods give exact means).
    """
    rows, cols = grid.shape
    total = np.zeros_like(grid)
    count = np.zeros(grid.shape, dtype=np.int64)
    lo = np.full(grid.shape, np.inf)
    hi = np.full(grid.shape, -np.inf)
    for dr in range(-d, d + 1):
        r0, r1 = max(0, -dr), min(rows, rows - dr)
        for dc in range(-d, d + 1):
            if dr == 0 and dc == 0:
                continue
            c0, c1 = max(0, -dc), min(cols, cols - dc)
            if r0 >= r1 or c0 >= c1:
                continue
            nb = grid[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
            total[r0:r1, c0:c1] += nb
            count[r0:r1, c0:c1] += 1
            np.minimum(lo[r0:r1, c0:c1], nb, out=lo[r0:r1, c0:c1])
            np.maximum(hi[r0:r1, c0:c1], nb, out=hi[r0:r1, c0:c1])
    has = count > 0
    mean = np.zeros_like(grid)
    mean[has] = np.minimum(np.maximum(total[has] / count[has], lo[has]), hi[has])
    return mean, has


def les(grid: np.ndarray, threshold: float, d: int) -> np.ndarray:
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    mean, has = _neighbor_mean(grid, d)
    lo = mean - threshold
    hi = mean + threshold
    out = grid.copy()
    below = has & (grid < lo)
    above = has & (grid > hi)
    out[below] = lo[below]
    out[above] = hi[above]
    return out


def mp(grid: np.ndarray, iterations: int, is_max: bool) -> np.ndarray:
    out = np.array(grid, dtype=np.float64, copy=True)
    update = np.maximum if is_max else np.minimum
    for _ in range(iterations):
        mean, has = _neighbor_mean(out, 1)
        out = np.where(has, update(out, mean), out)
    return out


def upsample(grid: np.ndarray, height: int, width: int) -> np.ndarray:
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    rows, cols = grid.shape
    x0, x1, wx = _interp_index(width, cols)
    y0, y1, wy = _interp_index(height, rows)
    a = grid[:, x0]
    tmp = grid[:, x1]
    tmp -= a
    tmp *= wx
    tmp += a
    top = tmp[y0]
    out = tmp[y1]
    out -= top
    out *= wy[:, None]
    out += top
    return out


def field_pair(gmin: np.ndarray, gmax: np.ndarray, height: int, width: int):
    """Upsample both grids and raise phi_max to at least phi_min + 1."""
    lo = upsample(gmin, height, width)
    hi = upsample(gmax, height, width)
    np.maximum(hi, lo + 1.0, out=hi)
    return lo, hi


def rescale(frame: np.ndarray, fmin: np.ndarray, fmax: np.ndarray) -> np.ndarray:
    den = fmax - fmin
    if not np.all(den > 0):
        raise RuntimeError("field separation violated: phi_max must exceed phi_min everywhere")
    t = frame.astype(np.float64)
    t -= fmin
    t *= 255.0
    t /= den
    t += 0.5
    np.floor(t, out=t)
    np.clip(t, 0, 255, out=t)
    return t.astype(np.uint8)


def tile_luts(img: np.ndarray, clip_limit: float, tiles_r: int, tiles_c: int) -> np.ndarray:
    ey = patch_edges(img.shape[0], tiles_r)
    ex = patch_edges(img.shape[1], tiles_c)
    luts = np.empty((tiles_r, tiles_c, 256), dtype=np.uint8)
    for r in range(tiles_r):
        for c in range(tiles_c):
            tile = img[ey[r]:ey[r + 1], ex[c]:ex[c + 1]]
            npix = tile.size
            hist = np.bincount(tile.ravel(), minlength=256).astype(np.int64)
            limit = clip_limit * npix / 256.0
            over = hist > limit
            excess = float(hist[over].sum()) - float(over.sum()) * limit
            h = np.where(over, limit, hist.astype(np.float64)) + excess / 256.0
            cdf = np.cumsum(h)
            luts[r, c] = np.clip(np.floor(cdf * 255.0 / npix + 0.5), 0, 255)
    return luts


def _runs(lo: np.ndarray, hi: np.ndarray):
    """Split positions into maximal runs sharing the same (lo, hi) sample pair."""
    key = lo * (hi.max() + 1) + hi
    cuts = np.flatnonzero(np.diff(key)) + 1
    starts = np.concatenate(([0], cuts))
    ends = np.concatenate((cuts, [len(lo)]))
    return [(int(a), int(b), int(lo[a]), int(hi[a])) for a, b in zip(starts, ends)]


def clahe(img: np.ndarray, clip_limit: float, tiles_r: int, tiles_c: int) -> np.ndarray:
    img = np.ascontiguousarray(img, dtype=np.uint8)
    h, w = img.shape
    luts = tile_luts(img, clip_limit, tiles_r, tiles_c).astype(np.float64)
    y0, y1, wy = _interp_index(h, tiles_r)
    x0, x1, wx = _interp_index(w, tiles_c)
    out = np.empty((h, w), dtype=np.uint8)
    # within a block the four blended tile mappings are fixed, so each
    # corner is a plain 1D table lookup
    for ya, yb, r0, r1 in _runs(y0, y1):
        wyb = wy[ya:yb, None]
        for xa, xb, c0, c1 in _runs(x0, x1):
            block = img[ya:yb, xa:xb]
            wxb = wx[xa:xb]
            a = np.take(luts[r0, c0], block)
            b = np.take(luts[r0, c1], block)
            c = np.take(luts[r1, c0], block)
            d = np.take(luts[r1, c1], block)
            # in place: b becomes top, d becomes bot, then the blend
            b -= a
            b *= wxb
            b += a
            d -= c
            d *= wxb
            d += c
            d -= b
            d *= wyb
            d += b
            d += 0.5
            np.floor(d, out=d)
            out[ya:yb, xa:xb] = np.clip(d, 0, 255)
    return out
