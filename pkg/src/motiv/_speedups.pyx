# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled geometry/layout kernels.

Mirrors motiv._kernels_py operation-for-operation; both backends must return
bitwise-identical results. Selected automatically by motiv.kernels when the
extension is built.
"""

from libc.math cimport sqrt
from libc.stdlib cimport free, malloc, qsort, realloc

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"

_EMPTY_RING = np.zeros((0, 2), dtype=np.float64)


cdef inline bint _inside(double x, double y, int side,
                         double min_x, double min_y,
                         double max_x, double max_y) noexcept nogil:
    if side == 0:
        return x >= min_x
    if side == 1:
        return x <= max_x
    if side == 2:
        return y >= min_y
    return y <= max_y


def clip_ring_to_rect(ring, double min_x, double min_y,
                      double max_x, double max_y):
    """Sutherland-Hodgman clip of a closed ring against a rectangle.

    Same contract as the fallback: closed (m, 2) input, closed or empty
    float64 output, input orientation preserved.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] arr = np.ascontiguousarray(
        ring, dtype=np.float64)
    cdef int n = arr.shape[0] - 1
    if n < 0:
        n = 0
    # Each half-plane pass at most doubles the vertex count: 16n covers all 4.
    cdef int cap = 16 * (n + 2) + 8
    cdef double* buf_a = <double*> malloc(2 * cap * sizeof(double))
    cdef double* buf_b = <double*> malloc(2 * cap * sizeof(double))
    if buf_a == NULL or buf_b == NULL:
        free(buf_a)
        free(buf_b)
        raise MemoryError()
    cdef double* cur = buf_a
    cdef double* nxt = buf_b
    cdef double* tmp
    cdef int count = n
    cdef int out_count, i, side
    cdef double px, py, cx, cy, edge, t
    cdef bint prev_in, cur_in
    for i in range(n):
        cur[2 * i] = arr[i, 0]
        cur[2 * i + 1] = arr[i, 1]
    for side in range(4):
        if count == 0:
            break
        out_count = 0
        px = cur[2 * (count - 1)]
        py = cur[2 * (count - 1) + 1]
        prev_in = _inside(px, py, side, min_x, min_y, max_x, max_y)
        for i in range(count):
            cx = cur[2 * i]
            cy = cur[2 * i + 1]
            cur_in = _inside(cx, cy, side, min_x, min_y, max_x, max_y)
            if cur_in:
                if not prev_in:
                    if side == 0 or side == 1:
                        edge = min_x if side == 0 else max_x
                        t = (edge - px) / (cx - px)
                        nxt[2 * out_count] = edge
                        nxt[2 * out_count + 1] = py + t * (cy - py)
                    else:
                        edge = min_y if side == 2 else max_y
                        t = (edge - py) / (cy - py)
                        nxt[2 * out_count] = px + t * (cx - px)
                        nxt[2 * out_count + 1] = edge
                    out_count += 1
                nxt[2 * out_count] = cx
                nxt[2 * out_count + 1] = cy
                out_count += 1
            elif prev_in:
                if side == 0 or side == 1:
                    edge = min_x if side == 0 else max_x
                    t = (edge - px) / (cx - px)
                    nxt[2 * out_count] = edge
                    nxt[2 * out_count + 1] = py + t * (cy - py)
                else:
                    edge = min_y if side == 2 else max_y
                    t = (edge - py) / (cy - py)
                    nxt[2 * out_count] = px + t * (cx - px)
                    nxt[2 * out_count + 1] = edge
                out_count += 1
            px = cx
            py = cy
            prev_in = cur_in
        tmp = cur
        cur = nxt
        nxt = tmp
        count = out_count
    if count < 3:
        free(buf_a)
        free(buf_b)
        return _EMPTY_RING
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty(
        (count + 1, 2), dtype=np.float64)
    for i in range(count):
        out[i, 0] = cur[2 * i]
        out[i, 1] = cur[2 * i + 1]
    out[count, 0] = cur[0]
    out[count, 1] = cur[1]
    free(buf_a)
    free(buf_b)
    return out


def ring_signed_area(ring):
    """Signed shoelace area of a closed ring (positive counter-clockwise)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] arr = np.ascontiguousarray(
        ring, dtype=np.float64)
    cdef int n = arr.shape[0]
    if n < 4:
        return 0.0
    cdef double total = 0.0
    cdef int i
    for i in range(n - 1):
        total += arr[i, 0] * arr[i + 1, 1] - arr[i + 1, 0] * arr[i, 1]
    return 0.5 * total


def point_in_rings(double x, double y, rings):
    """Even-odd point test against a set of closed rings."""
    cdef bint inside = False
    cdef cnp.ndarray[cnp.float64_t, ndim=2] arr
    cdef int i, n
    cdef double x1, y1, x2, y2, xi
    for ring in rings:
        arr = np.ascontiguousarray(ring, dtype=np.float64)
        n = arr.shape[0] - 1
        for i in range(n):
            y1 = arr[i, 1]
            y2 = arr[i + 1, 1]
            if (y1 > y) != (y2 > y):
                x1 = arr[i, 0]
                x2 = arr[i + 1, 0]
                xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
                if xi > x:
                    inside = not inside
    return bool(inside)


cdef struct SweepEntry:
    double key
    int idx


cdef int _cmp_sweep(const void* a, const void* b) noexcept nogil:
    cdef const SweepEntry* ea = <const SweepEntry*> a
    cdef const SweepEntry* eb = <const SweepEntry*> b
    if ea.key < eb.key:
        return -1
    if ea.key > eb.key:
        return 1
    if ea.idx < eb.idx:
        return -1
    if ea.idx > eb.idx:
        return 1
    return 0


cdef int _cmp_i64(const void* a, const void* b) noexcept nogil:
    cdef long long va = (<const long long*> a)[0]
    cdef long long vb = (<const long long*> b)[0]
    if va < vb:
        return -1
    if va > vb:
        return 1
    return 0


cdef long long _collect_pairs(double* px, double* aa, int n,
                              long long** pairs_io, long long* cap_io,
                              SweepEntry* entries, int* active) except -1:
    """x-extent sweep producing sorted (i*n + j) pair codes, i < j."""
    cdef long long* pairs = pairs_io[0]
    cdef long long cap = cap_io[0]
    cdef long long* grown
    cdef long long count = 0
    cdef int k, m, idx, j, kept, active_n
    cdef double lo
    for k in range(n):
        entries[k].key = px[k] - aa[k]
        entries[k].idx = k
    qsort(entries, n, sizeof(SweepEntry), _cmp_sweep)
    active_n = 0
    for k in range(n):
        idx = entries[k].idx
        lo = px[idx] - aa[idx]
        kept = 0
        for m in range(active_n):
            j = active[m]
            if px[j] + aa[j] >= lo:
                active[kept] = j
                kept += 1
        active_n = kept
        for m in range(active_n):
            j = active[m]
            if count == cap:
                cap = cap * 2 if cap > 0 else 1024
                grown = <long long*> realloc(pairs, cap * sizeof(long long))
                if grown == NULL:
                    raise MemoryError()
                pairs = grown
                pairs_io[0] = pairs
                cap_io[0] = cap
            if j < idx:
                pairs[count] = (<long long> j) * n + idx
            else:
                pairs[count] = (<long long> idx) * n + j
            count += 1
        active[active_n] = idx
        active_n += 1
    qsort(pairs, <size_t> count, sizeof(long long), _cmp_i64)
    return count


cdef double _max_penetration(double* px, double* py, double* aa, double* bb,
                             int n, long long** pairs_io, long long* cap_io,
                             SweepEntry* entries, int* active) except -1.0:
    cdef long long count = _collect_pairs(px, aa, n, pairs_io, cap_io,
                                          entries, active)
    cdef long long* pairs = pairs_io[0]
    cdef double worst = 0.0
    cdef long long k, code
    cdef int i, j
    cdef double dx, dy, sum_a, sum_b, sx, sy, s2, dist, s, depth
    for k in range(count):
        code = pairs[k]
        i = <int> (code // n)
        j = <int> (code % n)
        dx = px[j] - px[i]
        dy = py[j] - py[i]
        sum_a = aa[i] + aa[j]
        sum_b = bb[i] + bb[j]
        sx = dx / sum_a
        sy = dy / sum_b
        s2 = sx * sx + sy * sy
        if s2 >= 1.0:
            continue
        dist = sqrt(dx * dx + dy * dy)
        if dist < 1e-12:
            depth = sum_a
        else:
            s = sqrt(s2)
            depth = dist * (1.0 - s) / s
        if depth > worst:
            worst = depth
    return worst


def relax_layout(anchors, start, semi_a, semi_b, double spring=0.1,
                 double tol=0.05, int max_iter=300):
    """Anchor-spring plus pairwise-separation relaxation; see the fallback
    module for the full contract. Returns (positions, iterations, converged,
    residual)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] anc = np.ascontiguousarray(
        anchors, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] st = np.ascontiguousarray(
        start, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sa = np.ascontiguousarray(
        semi_a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sb = np.ascontiguousarray(
        semi_b, dtype=np.float64)
    cdef int n = anc.shape[0]
    if n == 0:
        return np.zeros((0, 2), dtype=np.float64), 0, True, 0.0

    cdef double* ax = <double*> malloc(n * sizeof(double))
    cdef double* ay = <double*> malloc(n * sizeof(double))
    cdef double* px = <double*> malloc(n * sizeof(double))
    cdef double* py = <double*> malloc(n * sizeof(double))
    cdef double* aa = <double*> malloc(n * sizeof(double))
    cdef double* bb = <double*> malloc(n * sizeof(double))
    cdef double* disp = <double*> malloc(n * sizeof(double))
    cdef SweepEntry* entries = <SweepEntry*> malloc(n * sizeof(SweepEntry))
    cdef int* active = <int*> malloc(n * sizeof(int))
    cdef long long* pairs = NULL
    cdef long long pairs_cap = 0
    if (ax == NULL or ay == NULL or px == NULL or py == NULL or aa == NULL
            or bb == NULL or disp == NULL or entries == NULL or active == NULL):
        free(ax); free(ay); free(px); free(py); free(aa); free(bb)
        free(disp); free(entries); free(active)
        raise MemoryError()

    cdef int i, j, it
    cdef long long k, count, code
    cdef double dx, dy, sum_a, sum_b, sx, sy, s2, dist, s, depth, half
    cdef double ux, uy, max_disp, residual
    cdef bint converged = False
    cdef int iterations = 0
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out
    for i in range(n):
        ax[i] = anc[i, 0]
        ay[i] = anc[i, 1]
        px[i] = st[i, 0]
        py[i] = st[i, 1]
        aa[i] = sa[i]
        bb[i] = sb[i]

    try:
        for it in range(max_iter):
            iterations += 1
            for i in range(n):
                dx = spring * (ax[i] - px[i])
                dy = spring * (ay[i] - py[i])
                px[i] += dx
                py[i] += dy
                disp[i] = sqrt(dx * dx + dy * dy)
            count = _collect_pairs(px, aa, n, &pairs, &pairs_cap,
                                   entries, active)
            for k in range(count):
                code = pairs[k]
                i = <int> (code // n)
                j = <int> (code % n)
                dx = px[j] - px[i]
                dy = py[j] - py[i]
                sum_a = aa[i] + aa[j]
                sum_b = bb[i] + bb[j]
                sx = dx / sum_a
                sy = dy / sum_b
                s2 = sx * sx + sy * sy
                if s2 >= 1.0:
                    continue
                dist = sqrt(dx * dx + dy * dy)
                if dist < 1e-12:
                    ux = 1.0
                    uy = 0.0
                    depth = sum_a
                else:
                    s = sqrt(s2)
                    depth = dist * (1.0 - s) / s
                    ux = dx / dist
                    uy = dy / dist
                half = 0.5 * depth
                px[i] -= ux * half
                py[i] -= uy * half
                px[j] += ux * half
                py[j] += uy * half
                disp[i] += half
                disp[j] += half
            max_disp = 0.0
            for i in range(n):
                if disp[i] > max_disp:
                    max_disp = disp[i]
            if max_disp < tol:
                if _max_penetration(px, py, aa, bb, n, &pairs, &pairs_cap,
                                    entries, active) <= tol:
                    converged = True
                    break

        residual = _max_penetration(px, py, aa, bb, n, &pairs, &pairs_cap,
                                    entries, active)
        out = np.empty((n, 2), dtype=np.float64)
        for i in range(n):
            out[i, 0] = px[i]
            out[i, 1] = py[i]
        return out, iterations, bool(converged), residual
    finally:
        free(ax); free(ay); free(px); free(py); free(aa); free(bb)
        free(disp); free(entries); free(active); free(pairs)
