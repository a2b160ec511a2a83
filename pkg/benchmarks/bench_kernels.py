"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5] [--pixels 40000] [--boxes 400]

Both backends get identical inputs; results are checked for equality before
timings are reported.
"""
import argparse
import sys
import timeit

import numpy as np

from a11yaudit import kernels
from a11yaudit.ui_model import LINEAR


def pixel_region(n, rng):
    # two-tone text-like region with a little anti-aliasing noise
    fg = np.array([153, 153, 153])
    bg = np.array([255, 255, 255])
    share = rng.random(n) < 0.3
    px = np.where(share[:, None], fg, bg) + rng.integers(-6, 7, size=(n, 3))
    return np.clip(px, 0, 255).astype(np.uint8)


def box_layout(m, rng):
    l = rng.integers(0, 1000, m)
    t = rng.integers(0, 2000, m)
    boxes = np.stack([l, t, l + rng.integers(0, 200, m), t + rng.integers(0, 200, m)], axis=1)
    # flat hierarchy: every node is its own subtree
    pre = np.arange(m)
    return boxes.astype(np.int64), pre, pre.copy()


def bench(label, fn, repeat):
    best = min(timeit.repeat(fn, number=1, repeat=repeat))
    print(f"  {label:<10} {best * 1e3:9.2f} ms")
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pixels", type=int, default=40_000)
    ap.add_argument("--boxes", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    px = pixel_region(args.pixels, rng)
    boxes, pre, end = box_layout(args.boxes, rng)
    py, cy = kernels.python_backend, kernels.compiled_backend
    if cy is None:
        print("compiled backend not built; only the Python backend is timed", file=sys.stderr)

    jobs = {
        f"two_means ({args.pixels} px)": lambda b: b.two_means(px, LINEAR, 20),
        f"overlap_pairs ({args.boxes} boxes)": lambda b: b.overlap_pairs(boxes, pre, end, 9, 10),
    }
    for name, job in jobs.items():
        print(name)
        t_py = bench("python", lambda: job(py), args.repeat)
        if cy is not None:
            assert job(py) == job(cy), f"{name}: backends disagree"
            t_cy = bench("cython", lambda: job(cy), args.repeat)
            print(f"  speed-up   {t_py / t_cy:9.1f}x")


if __name__ == "__main__":
    main()
