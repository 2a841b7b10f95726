"""Time the numba and numpy backends of the hot kernels on built-in varifolds.

    python benchmarks/bench_kernels.py [--repeat 5] [--samples 1,4]

Both backends are checked against each other before timing.
"""
import argparse
import time

import numpy as np
from scipy.spatial import cKDTree

from legvar import studies
from legvar._kernels import nearest_gauge, theta_terms
from legvar.cutoff import make_cutoff
from legvar.varifold import _local


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def tile(v, copies: int):
    """Repeat samples with tiny jitter so larger inputs keep the same geometry."""
    if copies == 1:
        return v
    rng = np.random.default_rng(0)
    base = np.concatenate([v.base + 1e-9 * rng.normal(size=v.base.shape) for _ in range(copies)])
    return type(v)(base, np.concatenate([v.frames] * copies), np.concatenate([v.weights] * copies) / copies)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--samples", default="1,4", help="tiling factors for the input size")
    args = ap.parse_args()
    chi = make_cutoff("bump")
    print(f"{'kernel':<14}{'varifold':<20}{'n':>9}{'numba [ms]':>13}{'numpy [ms]':>13}{'speedup':>9}")
    for name in ("plane", "clifford-blowdown", "clifford"):
        v0, centre, _, radii = studies.builtin_varifold(name)
        for copies in (int(c) for c in args.samples.split(",")):
            v = tile(v0, copies)
            x = _local(v, centre)
            a = float(radii[len(radii) // 2])
            run = {b: (lambda b=b: theta_terms(x, v.frames, v.weights, a, chi.code, chi.norm, b))
                   for b in ("numba", "numpy")}
            ref = run["numpy"]()
            got = run["numba"]()  # also triggers compilation
            for r, g in zip(ref, got):
                np.testing.assert_allclose(g, r, rtol=1e-12, atol=1e-15)
            tn, tp = (best_of(run[b], args.repeat) for b in ("numba", "numpy"))
            print(f"{'theta_terms':<14}{name:<20}{len(v):>9}{1e3 * tn:>13.2f}{1e3 * tp:>13.2f}{tp / tn:>9.1f}")

        pts = np.unique(v0.base, axis=0)
        _, nbr = cKDTree(pts).query(pts, k=8)
        a_ = nearest_gauge(pts, nbr, "numpy")
        np.testing.assert_allclose(nearest_gauge(pts, nbr, "numba"), a_, rtol=1e-12)
        tn = best_of(lambda: nearest_gauge(pts, nbr, "numba"), args.repeat)
        tp = best_of(lambda: nearest_gauge(pts, nbr, "numpy"), args.repeat)
        print(f"{'nearest_gauge':<14}{name:<20}{len(pts):>9}{1e3 * tn:>13.2f}{1e3 * tp:>13.2f}{tp / tn:>9.1f}")


if __name__ == "__main__":
    main()
