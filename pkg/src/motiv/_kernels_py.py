"""Pure-Python fallback for the compiled geometry/layout kernels.

Every function here mirrors motiv._speedups operation-for-operation (same
arithmetic, same evaluation order) so that both backends produce
bitwise-identical results. This is the slow path; see benchmarks/ for the
measured gap.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

_EMPTY_RING = np.zeros((0, 2), dtype=np.float64)


def _inside(x: float, y: float, side: int, min_x, min_y, max_x, max_y) -> bool:
    if side == 0:
        return x >= min_x
    if side == 1:
        return x <= max_x
    if side == 2:
        return y >= min_y
    return y <= max_y


def _intersect(px, py, cx, cy, side, min_x, min_y, max_x, max_y):
    if side == 0 or side == 1:
        edge = min_x if side == 0 else max_x
        t = (edge - px) / (cx - px)
        return (edge, py + t * (cy - py))
    edge = min_y if side == 2 else max_y
    t = (edge - py) / (cy - py)
    return (px + t * (cx - px), edge)


def clip_ring_to_rect(ring, min_x, min_y, max_x, max_y):
    """Sutherland-Hodgman clip of a closed ring against an axis-aligned rectangle.

    `ring` is an (m, 2) array with ring[0] == ring[-1]. Returns a closed ring
    as an (k, 2) float64 array, or an empty (0, 2) array when disjoint.
    Orientation of the input is preserved, so clipped holes stay negatively
    oriented.
    """
    arr = np.asarray(ring, dtype=np.float64)
    pts = [(float(p[0]), float(p[1])) for p in arr[:-1]]
    for side in range(4):
        if not pts:
            break
        out: list[tuple[float, float]] = []
        n = len(pts)
        prev = pts[n - 1]
        for i in range(n):
            cur = pts[i]
            prev_in = _inside(prev[0], prev[1], side, min_x, min_y, max_x, max_y)
            cur_in = _inside(cur[0], cur[1], side, min_x, min_y, max_x, max_y)
            if cur_in:
                if not prev_in:
                    out.append(
                        _intersect(prev[0], prev[1], cur[0], cur[1], side,
                                   min_x, min_y, max_x, max_y)
                    )
                out.append(cur)
            elif prev_in:
                out.append(
                    _intersect(prev[0], prev[1], cur[0], cur[1], side,
                               min_x, min_y, max_x, max_y)
                )
            prev = cur
        pts = out
    if len(pts) < 3:
        return _EMPTY_RING
    pts.append(pts[0])
    return np.array(pts, dtype=np.float64)


def ring_signed_area(ring) -> float:
    """Signed shoelace area of a closed ring (positive for counter-clockwise)."""
    arr = np.asarray(ring, dtype=np.float64)
    n = arr.shape[0]
    if n < 4:
        return 0.0
    total = 0.0
    for i in range(n - 1):
        total += arr[i, 0] * arr[i + 1, 1] - arr[i + 1, 0] * arr[i, 1]
    return 0.5 * total


def point_in_rings(x: float, y: float, rings) -> bool:
    """Even-odd test of a point against a set of closed rings.

    Holes are handled implicitly: a point inside both an outer ring and a
    hole ring crosses an even number of edges and reports outside.
    """
    inside = False
    for ring in rings:
        arr = np.asarray(ring, dtype=np.float64)
        n = arr.shape[0] - 1
        for i in range(n):
            y1 = arr[i, 1]
            y2 = arr[i + 1, 1]
            if (y1 > y) != (y2 > y):
                xi = arr[i, 0] + (y - y1) * (arr[i + 1, 0] - arr[i, 0]) / (y2 - y1)
                if xi > x:
                    inside = not inside
    return inside


def _candidate_pairs(px, aa, n):
    """All index pairs (i < j) whose x-extents overlap, in ascending order.

    Sweep over interval starts; ties on the start coordinate break by index
    so the candidate set matches the compiled backend exactly.
    """
    order = sorted(range(n), key=lambda i: (px[i] - aa[i], i))
    pairs: list[int] = []
    active: list[int] = []
    for idx in order:
        lo = px[idx] - aa[idx]
        active = [j for j in active if px[j] + aa[j] >= lo]
        for j in active:
            if j < idx:
                pairs.append(j * n + idx)
            else:
                pairs.append(idx * n + j)
        active.append(idx)
    pairs.sort()
    return pairs


def _max_penetration(px, py, aa, bb, n) -> float:
    worst = 0.0
    for code in _candidate_pairs(px, aa, n):
        i = code // n
        j = code % n
        dx = px[j] - px[i]
        dy = py[j] - py[i]
        sum_a = aa[i] + aa[j]
        sum_b = bb[i] + bb[j]
        sx = dx / sum_a
        sy = dy / sum_b
        s2 = sx * sx + sy * sy
        if s2 >= 1.0:
            continue
        dist = math.sqrt(dx * dx + dy * dy)
        if dist < 1e-12:
            depth = sum_a
        else:
            s = math.sqrt(s2)
            depth = dist * (1.0 - s) / s
        if depth > worst:
            worst = depth
    return worst


def relax_layout(anchors, start, semi_a, semi_b, spring=0.1, tol=0.05, max_iter=300):
    """Anchor-spring plus pairwise-separation relaxation of ellipse glyphs.

    Each iteration first pulls every glyph toward its anchor by
    `spring * (anchor - position)`, then walks candidate pairs in ascending
    index order and, for each pair whose scaled-ellipse test
    ((dx/(a_i+a_j))^2 + (dy/(b_i+b_j))^2 < 1) reports overlap, pushes both
    glyphs apart along the center line by half the penetration depth each.
    Pushes are applied immediately, so later pairs see updated positions.

    Stops when the largest per-glyph displacement of an iteration falls
    below `tol` and a fresh sweep finds no residual penetration above `tol`,
    or after `max_iter` iterations.

    Returns (positions (n, 2) float64, iterations, converged, residual).
    """
    anchors = np.asarray(anchors, dtype=np.float64)
    n = anchors.shape[0]
    ax = [float(v) for v in anchors[:, 0]]
    ay = [float(v) for v in anchors[:, 1]]
    st = np.asarray(start, dtype=np.float64)
    px = [float(v) for v in st[:, 0]]
    py = [float(v) for v in st[:, 1]]
    aa = [float(v) for v in np.asarray(semi_a, dtype=np.float64)]
    bb = [float(v) for v in np.asarray(semi_b, dtype=np.float64)]

    converged = False
    iterations = 0
    if n == 0:
        return np.zeros((0, 2), dtype=np.float64), 0, True, 0.0

    for _ in range(max_iter):
        iterations += 1
        disp = [0.0] * n
        for i in range(n):
            dx = spring * (ax[i] - px[i])
            dy = spring * (ay[i] - py[i])
            px[i] += dx
            py[i] += dy
            disp[i] += math.sqrt(dx * dx + dy * dy)
        for code in _candidate_pairs(px, aa, n):
            i = code // n
            j = code % n
            dx = px[j] - px[i]
            dy = py[j] - py[i]
            sum_a = aa[i] + aa[j]
            sum_b = bb[i] + bb[j]
            sx = dx / sum_a
            sy = dy / sum_b
            s2 = sx * sx + sy * sy
            if s2 >= 1.0:
                continue
            dist = math.sqrt(dx * dx + dy * dy)
            if dist < 1e-12:
                ux = 1.0
                uy = 0.0
                depth = sum_a
            else:
                s = math.sqrt(s2)
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
            if _max_penetration(px, py, aa, bb, n) <= tol:
                converged = True
                break

    residual = _max_penetration(px, py, aa, bb, n)
    out = np.empty((n, 2), dtype=np.float64)
    out[:, 0] = px
    out[:, 1] = py
    return out, iterations, converged, residual
