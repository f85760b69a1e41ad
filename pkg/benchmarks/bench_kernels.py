"""Compare the compiled kernel extension against the pure-Python fallback.

Run from the repo root:

    python3 benchmarks/bench_kernels.py [--sizes 100 400 1000]

The relaxation benchmark is capped at a fixed iteration budget so both
backends do identical work; results are checked for bitwise equality while
timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

import motiv._kernels_py as python_backend

try:
    import motiv._speedups as compiled_backend
except ImportError:
    compiled_backend = None


def _star_ring(rng, n_vertices: int) -> np.ndarray:
    angles = np.sort(rng.uniform(0, 2 * np.pi, n_vertices))
    radii = rng.uniform(0.3, 3.0, n_vertices)
    pts = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    return np.vstack([pts, pts[:1]])


def _time(fn, *args, repeat: int = 3):
    best = np.inf
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_clip(backend, rings, rects):
    def run():
        total = 0
        for ring in rings:
            for rect in rects:
                out = backend.clip_ring_to_rect(ring, *rect)
                total += out.shape[0]
        return total

    return _time(run)


def bench_relax(backend, anchors, semi_a, semi_b, iters: int):
    def run():
        return backend.relax_layout(anchors, anchors.copy(), semi_a, semi_b,
                                    0.1, 0.05, iters)

    return _time(run, repeat=1)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[100, 400, 1000])
    parser.add_argument("--relax-iters", type=int, default=40)
    args = parser.parse_args()

    if compiled_backend is None:
        print("compiled extension not built; only timing the fallback")

    rng = np.random.default_rng(42)
    rings = [_star_ring(rng, n) for n in (8, 40, 200, 600)]
    rects = [tuple(np.sort(rng.uniform(-3, 3, 2)).tolist()
                   + np.sort(rng.uniform(-3, 3, 2)).tolist())
             for _ in range(50)]
    rects = [(r[0], r[2], r[1], r[3]) for r in rects]

    print(f"{'benchmark':<28} {'python':>12} {'compiled':>12} {'speedup':>9}")

    t_py, n_py = bench_clip(python_backend, rings, rects)
    row = f"{'clip 4 rings x 50 rects':<28} {t_py * 1e3:>10.1f}ms"
    if compiled_backend is not None:
        t_c, n_c = bench_clip(compiled_backend, rings, rects)
        assert n_py == n_c
        row += f" {t_c * 1e3:>10.1f}ms {t_py / t_c:>8.1f}x"
    print(row)

    for n in args.sizes:
        anchors = rng.uniform([50, 50], [910, 550], size=(n, 2))
        pop_t = rng.random(n) ** 3
        semi_a = 2.0 + 18.0 * pop_t
        semi_b = np.where(rng.random(n) < 0.85, 1.0, rng.uniform(1, 12, n))
        t_py, res_py = bench_relax(python_backend, anchors, semi_a, semi_b,
                                   args.relax_iters)
        row = f"{f'relax n={n} ({args.relax_iters} it)':<28} {t_py * 1e3:>10.1f}ms"
        if compiled_backend is not None:
            t_c, res_c = bench_relax(compiled_backend, anchors, semi_a, semi_b,
                                     args.relax_iters)
            assert (res_py[0] == res_c[0]).all(), "backends diverged"
            row += f" {t_c * 1e3:>10.1f}ms {t_py / t_c:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
