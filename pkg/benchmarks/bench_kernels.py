"""Compare the numba kernels against the pure-numpy fallback.

Times render / decode / warp on the same inputs with both backends and
reports the largest disagreement between them. Run with::

    python benchmarks/bench_kernels.py [--n 20000] [--repeat 3]

The first numba call of each kernel is made before timing, so compile time
(or cache loading) is excluded.
"""

import argparse
import time

import numpy as np

from subpixel_heatmaps import _jit, kernels
from subpixel_heatmaps.geometry import invert, make_rotation


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def run(n, repeat, seed=0):
    rng = np.random.default_rng(seed)
    centers = rng.uniform(3, 60, (n, 2))
    visible = np.ones(n, bool)
    maps = kernels._render_np(centers, visible, 64, 64, 1.0, 1.0, -1.0)
    warp_m = invert(make_rotation(20.0, (31.5, 31.5))).matrix

    cases = {
        "render": (
            lambda: kernels._render_nb(centers, visible, 64, 64, 1.0, 1.0, -1.0),
            lambda: kernels._render_np(centers, visible, 64, 64, 1.0, 1.0, -1.0),
        ),
        "decode_argmax": (
            lambda: kernels._decode_nb(maps, kernels.ARGMAX, 5, 10.0)[0],
            lambda: kernels._decode_np(maps, kernels.ARGMAX, 5, 10.0)[0],
        ),
        "decode_heuristic": (
            lambda: kernels._decode_nb(maps, kernels.HEURISTIC, 5, 10.0)[0],
            lambda: kernels._decode_np(maps, kernels.HEURISTIC, 5, 10.0)[0],
        ),
        "decode_local": (
            lambda: kernels._decode_nb(maps, kernels.LOCAL_SOFTARGMAX, 5, 10.0)[0],
            lambda: kernels._decode_np(maps, kernels.LOCAL_SOFTARGMAX, 5, 10.0)[0],
        ),
        "decode_global": (
            lambda: kernels._decode_nb(maps, kernels.GLOBAL_SOFTARGMAX, 5, 10.0)[0],
            lambda: kernels._decode_np(maps, kernels.GLOBAL_SOFTARGMAX, 5, 10.0)[0],
        ),
        "warp": (
            lambda: kernels._warp_nb(maps[: n // 4], warp_m),
            lambda: kernels._warp_np(maps[: n // 4], warp_m),
        ),
    }

    print(f"n={n} maps of 64x64, best of {repeat}")
    print(f"{'kernel':<18}{'numba s':>10}{'numpy s':>10}{'speedup':>9}{'max |diff|':>13}")
    for name, (nb, np_) in cases.items():
        nb()  # compile or load from cache
        t_nb, a = best_of(nb, repeat)
        t_np, b = best_of(np_, repeat)
        diff = float(np.max(np.abs(a - b)))
        print(f"{name:<18}{t_nb:>10.3f}{t_np:>10.3f}{t_np / t_nb:>9.1f}{diff:>13.2e}")


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--n", type=int, default=20000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    if not _jit.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    run(args.n, args.repeat)


if __name__ == "__main__":
    main()
