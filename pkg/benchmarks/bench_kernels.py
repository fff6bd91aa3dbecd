"""Compare the compiled and numpy kernels on the workloads the library runs.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""
import argparse
import json
import sys
import timeit

import numpy as np

from fmlab import _pykernels
from fmlab.norms import dyadic_family
from fmlab.weights import FatCantorSet, SubExp, PowerAbs

try:
    from fmlab import _ckernels
except ImportError:
    _ckernels = None


def _cases():
    lo, hi = dyadic_family(6)
    sub = SubExp(1.0, 0.5)
    pw = PowerAbs(0.3)
    g = FatCantorSet(24)
    ell, gap, mass = g._tables
    x = np.random.default_rng(0).uniform(-0.1, 1.1, 1_000_000)
    return {
        "gk15 subexp, dyadic K=6": lambda k: k.log_power_integrals(sub.kernel_code, *sub.kernel_params(), 1.0, lo, hi),
        "gk15 powerabs s=-1": lambda k: k.log_power_integrals(pw.kernel_code, *pw.kernel_params(), -1.0, lo, hi),
        "cantor membership 1e6": lambda k: k.cantor_membership(x, ell, gap),
        "cantor cdf 1e6": lambda k: k.cantor_cdf(x, ell, gap, mass),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json")
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the numpy kernels are timed", file=sys.stderr)
    rows = []
    print(f"{'case':28s} {'numpy [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, fn in _cases().items():
        t_py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat))
        ref = np.asarray(fn(_pykernels), dtype=float)
        if _ckernels is not None:
            t_c = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat))
            got = np.asarray(fn(_ckernels), dtype=float)
            diff = float(np.max(np.abs(got - ref))) if ref.size else 0.0
        else:
            t_c, diff = float("nan"), float("nan")
        rows.append({"case": name, "numpy_s": t_py, "cython_s": t_c, "max_abs_diff": diff})
        print(f"{name:28s} {1e3 * t_py:12.2f} {1e3 * t_c:12.2f} {t_py / t_c:8.2f} {diff:11.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
