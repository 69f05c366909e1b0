"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--n 20000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from entdecay import kernels
from entdecay.entanglement import scan_grid
from entdecay.qstate import SeedSpec, sample_hs_mixed


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rho = np.ascontiguousarray(sample_hs_mixed(SeedSpec(1, 0), args.n))
    qs = np.linspace(0.0, 1.0, 16)
    small = np.ascontiguousarray(rho[: max(args.n // 10, 1)])
    cases = {
        "concurrence": lambda m: m.concurrence(rho),
        "apply_local": lambda m: m.apply_local(rho, 1, 0, 0.3),
        "evolved_concurrence(16 q)": lambda m: m.evolved_concurrence(rho, 2, 0, qs),
        "esd_numeric(n/10)": lambda m: m.esd_numeric(small, 0, 0, 1e-8, scan_grid(), 1e-12),
    }
    impls = kernels.backends()
    print(f"n = {args.n}, backends: {', '.join(impls)}")
    print(f"{'kernel':28s}" + "".join(f"{name:>12s}" for name in impls) + "     speedup")
    for label, fn in cases.items():
        times = {name: best_of(lambda: fn(mod), args.repeat) for name, mod in impls.items()}
        row = f"{label:28s}" + "".join(f"{times[name]:11.4f}s" for name in impls)
        if "cython" in times:
            row += f"  {times['python'] / times['cython']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
