# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Mirrors ``_pycore`` operation for operation."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline Py_ssize_t _edge(Py_ssize_t i, Py_ssize_t n, Py_ssize_t cells) noexcept nogil:
    return (i * n) // cells


cdef void _interp_index(Py_ssize_t n, Py_ssize_t cells, Py_ssize_t* lo,
                        Py_ssize_t* hi, double* w) noexcept nogil:
    cdef Py_ssize_t i, j = 0
    cdef double *c = <double*> malloc(cells * sizeof(double))
    cdef double pos
    for i in range(cells):
        c[i] = <double>(_edge(i, n, cells) + _edge(i + 1, n, cells) - 1) / 2.0
    for i in range(n):
        pos = <double>i
        while j < cells and c[j] <= pos:
            j += 1
        # j = number of centers <= pos
        if j == 0:
            lo[i] = 0
            hi[i] = 0
            w[i] = 0.0
        elif j == cells:
            lo[i] = cells - 1
            hi[i] = cells - 1
            w[i] = 0.0
        else:
            lo[i] = j - 1
            hi[i] = j
            w[i] = (pos - c[j - 1]) / (c[j] - c[j - 1])
    free(c)


def pool_minmax(cnp.uint16_t[:, ::1] frame, Py_ssize_t rows, Py_ssize_t cols):
    cdef Py_ssize_t h = frame.shape[0], w = frame.shape[1]
    mn_arr = np.empty((rows, cols), dtype=np.float64)
    mx_arr = np.empty((rows, cols), dtype=np.float64)
    cdef double[:, ::1] mn = mn_arr
    cdef double[:, ::1] mx = mx_arr
    cdef Py_ssize_t r, c, y, x, y0, y1, x0, x1
    cdef cnp.uint16_t v, lo, hi
    with nogil:
        for r in range(rows):
            y0 = _edge(r, h, rows)
            y1 = _edge(r + 1, h, rows)
            for c in range(cols):
                x0 = _edge(c, w, cols)
                x1 = _edge(c + 1, w, cols)
                lo = 65535
                hi = 0
                for y in range(y0, y1):
                    for x in range(x0, x1):
                        v = frame[y, x]
                        if v < lo:
                            lo = v
                        if v > hi:
                            hi = v
                mn[r, c] = lo
                mx[r, c] = hi
    return mn_arr, mx_arr


cdef void _neighbor_mean(double[:, ::1] g, Py_ssize_t d, double[:, ::1] mean,
                         char[:, ::1] has) noexcept nogil:
    cdef Py_ssize_t rows = g.shape[0], cols = g.shape[1]
    cdef Py_ssize_t r, c, dr, dc, rr, cc, n
    cdef double s, v, lo, hi, m
    for r in range(rows):
        for c in range(cols):
            s = 0.0
            n = 0
            lo = INFINITY
            hi = -INFINITY
            for dr in range(-d, d + 1):
                rr = r + dr
                if rr < 0 or rr >= rows:
                    continue
                for dc in range(-d, d + 1):
                    cc = c + dc
                    if cc < 0 or cc >= cols or (dr == 0 and dc == 0):
                        continue
                    v = g[rr, cc]
                    s = s + v
                    n += 1
                    if v < lo:
                        lo = v
                    if v > hi:
                        hi = v
            if n > 0:
                # clamp round-off into the neighbours' range
                m = s / n
                if m < lo:
                    m = lo
                if m > hi:
                    m = hi
                mean[r, c] = m
                has[r, c] = 1
            else:
                mean[r, c] = 0.0
                has[r, c] = 0


def les(grid, double threshold, Py_ssize_t d):
    src_arr = np.ascontiguousarray(grid, dtype=np.float64)
    out_arr = src_arr.copy()
    mean_arr = np.empty_like(src_arr)
    has_arr = np.empty(src_arr.shape, dtype=np.int8)
    cdef double[:, ::1] src = src_arr
    cdef double[:, ::1] out = out_arr
    cdef double[:, ::1] mean = mean_arr
    cdef char[:, ::1] has = has_arr
    cdef Py_ssize_t r, c
    cdef double lo, hi, v
    with nogil:
        _neighbor_mean(src, d, mean, has)
        for r in range(src.shape[0]):
            for c in range(src.shape[1]):
                if not has[r, c]:
                    continue
                v = src[r, c]
                lo = mean[r, c] - threshold
                hi = mean[r, c] + threshold
                if v < lo:
                    out[r, c] = lo
                elif v > hi:
                    out[r, c] = hi
    return out_arr


def mp(grid, Py_ssize_t iterations, bint is_max):
    cur_arr = np.array(grid, dtype=np.float64, order="C", copy=True)
    mean_arr = np.empty_like(cur_arr)
    has_arr = np.empty(cur_arr.shape, dtype=np.int8)
    cdef double[:, ::1] cur = cur_arr
    cdef double[:, ::1] mean = mean_arr
    cdef char[:, ::1] has = has_arr
    cdef Py_ssize_t t, r, c
    cdef double v, a
    with nogil:
        for t in range(iterations):
            _neighbor_mean(cur, 1, mean, has)
            for r in range(cur.shape[0]):
                for c in range(cur.shape[1]):
                    if not has[r, c]:
                        continue
                    v = cur[r, c]
                    a = mean[r, c]
                    if is_max:
                        if a > v:
                            cur[r, c] = a
                    elif a < v:
                        cur[r, c] = a
    return cur_arr


def upsample(grid, Py_ssize_t height, Py_ssize_t width):
    g_arr = np.ascontiguousarray(grid, dtype=np.float64)
    cdef double[:, ::1] g = g_arr
    cdef Py_ssize_t rows = g.shape[0], cols = g.shape[1]
    out_arr = np.empty((height, width), dtype=np.float64)
    tmp_arr = np.empty((rows, width), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[:, ::1] tmp = tmp_arr
    cdef Py_ssize_t *x0 = <Py_ssize_t*> malloc(width * sizeof(Py_ssize_t))
    cdef Py_ssize_t *x1 = <Py_ssize_t*> malloc(width * sizeof(Py_ssize_t))
    cdef double *wx = <double*> malloc(width * sizeof(double))
    cdef Py_ssize_t *y0 = <Py_ssize_t*> malloc(height * sizeof(Py_ssize_t))
    cdef Py_ssize_t *y1 = <Py_ssize_t*> malloc(height * sizeof(Py_ssize_t))
    cdef double *wy = <double*> malloc(height * sizeof(double))
    cdef Py_ssize_t r, x, y
    cdef double a, top, wyy
    with nogil:
        _interp_index(width, cols, x0, x1, wx)
        _interp_index(height, rows, y0, y1, wy)
        for r in range(rows):
            for x in range(width):
                a = g[r, x0[x]]
                tmp[r, x] = a + wx[x] * (g[r, x1[x]] - a)
        for y in range(height):
            wyy = wy[y]
            for x in range(width):
                top = tmp[y0[y], x]
                out[y, x] = top + wyy * (tmp[y1[y], x] - top)
    free(x0); free(x1); free(wx); free(y0); free(y1); free(wy)
    return out_arr


def field_pair(gmin, gmax, Py_ssize_t height, Py_ssize_t width):
    """Upsample both grids and raise phi_max to at least phi_min + 1, in one pass."""
    a_arr = np.ascontiguousarray(gmin, dtype=np.float64)
    b_arr = np.ascontiguousarray(gmax, dtype=np.float64)
    cdef double[:, ::1] ga = a_arr
    cdef double[:, ::1] gb = b_arr
    cdef Py_ssize_t rows = ga.shape[0], cols = ga.shape[1]
    lo_arr = np.empty((height, width), dtype=np.float64)
    hi_arr = np.empty((height, width), dtype=np.float64)
    ta_arr = np.empty((rows, width), dtype=np.float64)
    tb_arr = np.empty((rows, width), dtype=np.float64)
    cdef double[:, ::1] lo = lo_arr
    cdef double[:, ::1] hi = hi_arr
    cdef double[:, ::1] ta = ta_arr
    cdef double[:, ::1] tb = tb_arr
    cdef Py_ssize_t *x0 = <Py_ssize_t*> malloc(width * sizeof(Py_ssize_t))
    cdef Py_ssize_t *x1 = <Py_ssize_t*> malloc(width * sizeof(Py_ssize_t))
    cdef double *wx = <double*> malloc(width * sizeof(double))
    cdef Py_ssize_t *y0 = <Py_ssize_t*> malloc(height * sizeof(Py_ssize_t))
    cdef Py_ssize_t *y1 = <Py_ssize_t*> malloc(height * sizeof(Py_ssize_t))
    cdef double *wy = <double*> malloc(height * sizeof(double))
    cdef Py_ssize_t r, x, y
    cdef double a, top, wyy, vlo, vhi
    with nogil:
        _interp_index(width, cols, x0, x1, wx)
        _interp_index(height, rows, y0, y1, wy)
        for r in range(rows):
            for x in range(width):
                a = ga[r, x0[x]]
                ta[r, x] = a + wx[x] * (ga[r, x1[x]] - a)
                a = gb[r, x0[x]]
                tb[r, x] = a + wx[x] * (gb[r, x1[x]] - a)
        for y in range(height):
            wyy = wy[y]
            for x in range(width):
                top = ta[y0[y], x]
                vlo = top + wyy * (ta[y1[y], x] - top)
                top = tb[y0[y], x]
                vhi = top + wyy * (tb[y1[y], x] - top)
                lo[y, x] = vlo
                hi[y, x] = vhi if vhi >= vlo + 1.0 else vlo + 1.0
    free(x0); free(x1); free(wx); free(y0); free(y1); free(wy)
    return lo_arr, hi_arr


def rescale(cnp.uint16_t[:, ::1] frame, fmin, fmax):
    cdef double[:, ::1] lo = np.ascontiguousarray(fmin, dtype=np.float64)
    cdef double[:, ::1] hi = np.ascontiguousarray(fmax, dtype=np.float64)
    cdef Py_ssize_t h = frame.shape[0], w = frame.shape[1], y, x
    out_arr = np.empty((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    cdef double den, t
    cdef int bad = 0
    with nogil:
        for y in range(h):
            for x in range(w):
                den = hi[y, x] - lo[y, x]
                bad |= not (den > 0)
                t = 255.0 * (<double>frame[y, x] - lo[y, x]) / den + 0.5
                # floor then clamp to [0, 255]; truncation equals floor for t >= 0
                if t >= 256.0:
                    out[y, x] = 255
                elif t >= 0.0:
                    out[y, x] = <cnp.uint8_t><int>t
                else:
                    out[y, x] = 0
    if bad:
        raise RuntimeError("field separation violated: phi_max must exceed phi_min everywhere")
    return out_arr


def tile_luts(cnp.uint8_t[:, ::1] img, double clip_limit, Py_ssize_t tiles_r, Py_ssize_t tiles_c):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    luts_arr = np.empty((tiles_r, tiles_c, 256), dtype=np.uint8)
    cdef cnp.uint8_t[:, :, ::1] luts = luts_arr
    cdef long long hist[256]
    cdef Py_ssize_t r, c, y, x, k, y0, y1, x0, x1, npix, nover
    cdef long long over_sum
    cdef double limit, excess, add, cdf, v
    with nogil:
        for r in range(tiles_r):
            y0 = _edge(r, h, tiles_r)
            y1 = _edge(r + 1, h, tiles_r)
            for c in range(tiles_c):
                x0 = _edge(c, w, tiles_c)
                x1 = _edge(c + 1, w, tiles_c)
                for k in range(256):
                    hist[k] = 0
                for y in range(y0, y1):
                    for x in range(x0, x1):
                        hist[img[y, x]] += 1
                npix = (y1 - y0) * (x1 - x0)
                limit = clip_limit * npix / 256.0
                over_sum = 0
                nover = 0
                for k in range(256):
                    if hist[k] > limit:
                        over_sum += hist[k]
                        nover += 1
                excess = <double>over_sum - <double>nover * limit
                add = excess / 256.0
                cdf = 0.0
                for k in range(256):
                    if hist[k] > limit:
                        cdf = cdf + (limit + add)
                    else:
                        cdf = cdf + (<double>hist[k] + add)
                    v = floor(cdf * 255.0 / npix + 0.5)
                    if v < 0:
                        v = 0
                    elif v > 255:
                        v = 255
                    luts[r, c, k] = <cnp.uint8_t>v
    return luts_arr


def clahe(img, double clip_limit, Py_ssize_t tiles_r, Py_ssize_t tiles_c):
    src_arr = np.ascontiguousarray(img, dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] src = src_arr
    cdef cnp.uint8_t[:, :, ::1] luts = tile_luts(src_arr, clip_limit, tiles_r, tiles_c)
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1], y, x
    out_arr = np.empty((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    cdef Py_ssize_t *x0 = <Py_ssize_t*> malloc(w * sizeof(Py_ssize_t))
    cdef Py_ssize_t *x1 = <Py_ssize_t*> malloc(w * sizeof(Py_ssize_t))
    cdef double *wx = <double*> malloc(w * sizeof(double))
    cdef Py_ssize_t *y0 = <Py_ssize_t*> malloc(h * sizeof(Py_ssize_t))
    cdef Py_ssize_t *y1 = <Py_ssize_t*> malloc(h * sizeof(Py_ssize_t))
    cdef double *wy = <double*> malloc(h * sizeof(double))
    cdef cnp.uint8_t p
    cdef double a, b, c, d, top, bot, v
    with nogil:
        _interp_index(w, tiles_c, x0, x1, wx)
        _interp_index(h, tiles_r, y0, y1, wy)
        for y in range(h):
            for x in range(w):
                p = src[y, x]
                a = luts[y0[y], x0[x], p]
                b = luts[y0[y], x1[x], p]
                c = luts[y1[y], x0[x], p]
                d = luts[y1[y], x1[x], p]
                top = a + wx[x] * (b - a)
                bot = c + wx[x] * (d - c)
                v = top + wy[y] * (bot - top) + 0.5
                if v >= 256.0:
                    out[y, x] = 255
                elif v >= 0.0:
                    out[y, x] = <cnp.uint8_t><int>v
                else:
                    out[y, x] = 0
    free(x0); free(x1); free(wx); free(y0); free(y1); free(wy)
    return out_arr
