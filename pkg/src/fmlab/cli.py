"""Command-line front end.

Exit codes: 0 when every check passes, 1 on usage or parse errors, 2 when a
numeric check fails (the failing rows are echoed to stderr).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .grid import Grid, SampledFunction, gaussian
from .mollify import lebesgue_point_integral, mollifier, weighted_young_check
from .multipliers import (
    PlateauBump, KernelSpec, SymbolError, certificate_sweep, default_delta_schedule,
    discrete_l2_operator_norm, kernel_l1_upper_bound, mollifier_kernel, parse_symbol_spec,
)
from .norms import (
    SpaceSpec, ap_constant, ax_constant, doubling_constant_estimate, parse_p, weak_doubling_witness,
)
from .scenarios import SCENARIOS
from .weights import GRAMMAR, BSequence, WeightSpecError, parse_weight_spec

SCHEMA = 1
SYMBOL_GRAMMAR = "name(\":\" key \"=\" number (\",\" key \"=\" number)*)?  with name in const, mollifier, aminus, band, mod, lorentz"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.stderr.write(f"weight grammar: {GRAMMAR}\nsymbol grammar: {SYMBOL_GRAMMAR}\n")
        sys.exit(1)


# ---------------------------------------------------------------------------
# argument types


def _weight(text):
    try:
        return parse_weight_spec(text)
    except WeightSpecError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _p(text):
    try:
        p = parse_p(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"p must be a real >= 1 or inf, got {text!r}") from None
    if not p >= 1:
        raise argparse.ArgumentTypeError(f"p must be >= 1, got {text!r}")
    return p


def _floats(text):
    """Comma list ``a,b,c`` or range ``lo:hi:step`` (inclusive)."""
    try:
        if ":" in text:
            lo, hi, step = (float(t) for t in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(math.floor((hi - lo) / step + 1e-9)) + 1
            return [lo + i * step for i in range(n)]
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list or lo:hi:step, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _pow2(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"N must be an integer, got {text!r}") from None
    if n < 8 or n & (n - 1):
        raise argparse.ArgumentTypeError(f"N must be a power of two >= 8, got {n}")
    return n


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


# ---------------------------------------------------------------------------
# output


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(_jsonable(v), sort_keys=True)
    return str(v)


class Table:
    def __init__(self, meta: dict, rows: list, passed: bool, failing=()):
        self.meta = _jsonable(meta)
        self.rows = [_jsonable(r) for r in rows]
        self.passed = passed
        self.failing = list(failing)

    def to_json(self) -> str:
        return json.dumps({"schema": SCHEMA, "meta": {**self.meta, "passed": self.passed}, "rows": self.rows},
                          indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"schema={SCHEMA}"])
        cols = list(self.rows[0]) if self.rows else []
        prov = sorted(k for k in self.meta if k not in cols)
        w.writerow(prov + cols)
        for r in self.rows:
            w.writerow([_cell(self.meta[k]) for k in prov] + [_cell(r[c]) for c in cols])
        return buf.getvalue()


def _write(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".fmlab-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# subcommands


def _space(args):
    return SpaceSpec(args.p, args.weight)


def _base_meta(args, **extra):
    meta = {"command": args.command, "version": __version__}
    if getattr(args, "weight", None) is not None:
        meta["weight"] = args.weight.format()
    if getattr(args, "p", None) is not None:
        meta["p"] = args.p
    meta.update(extra)
    return meta


def cmd_doubling(args):
    rep = doubling_constant_estimate(_space(args), args.tau, args.R, args.y)
    rows = [{"R": R, "inf_ratio": float(v), "argmin_y": y}
            for R, v, y in zip(rep.R_schedule, rep.per_R_inf, rep.per_R_argmin_y)]
    ok = bool(np.all(rep.ratios >= 1 - 1e-12))
    meta = _base_meta(args, tau=args.tau, R=args.R, y=args.y, liminf_estimate=rep.liminf_estimate)
    return Table(meta, rows, ok, [r for r, v in zip(rows, rep.per_R_inf) if v < 1 - 1e-12])


def cmd_witness(args):
    rep = weak_doubling_witness(_space(args), args.tau, [int(j) for j in args.j])
    rows = [{"j": pt.j, "y": pt.y, "R": pt.R, "ratio": pt.ratio, "centered_ratio": c}
            for pt, c in zip(rep.points, rep.centered_ratios)]
    bad = [r for r in rows if r["ratio"] > rep.bound]
    return Table(_base_meta(args, tau=args.tau, j=args.j, bound=rep.bound, shift=rep.shift), rows, not bad, bad)


def cmd_ap(args):
    rows, bad = [], []
    for K in range(max(1, args.K - 2), args.K + 1):
        ap = ap_constant(_space(args), K)
        ax = ax_constant(_space(args), K)
        if ap.divergent or ax.divergent:
            agree = ap.divergent and ax.divergent
        else:
            agree = abs(ap.value - ax.value) <= 1e-10 * ap.value
        row = {"K": K, "ap": ap.value, "ax": ax.value, "divergent": ap.divergent,
               "argmax_a": ap.argmax[0], "argmax_b": ap.argmax[1], "intervals": ap.n_intervals,
               "agree": agree}
        rows.append(row)
        if not agree or ap.value < 1 - 1e-12:
            bad.append(row)
    return Table(_base_meta(args, K=args.K), rows, not bad, bad)


def cmd_mnorm(args):
    grid = Grid(args.L, args.N)
    norm = discrete_l2_operator_norm(args.symbol, args.weight, grid, args.n_small, method=args.method,
                                     seed=args.seed)
    sup = args.symbol.sup_on_grid(grid)
    row = {"norm": norm, "sup_abs_symbol": sup}
    return Table(_base_meta(args, symbol=args.symbol_text, L=args.L, N=args.N, n_small=args.n_small,
                            method=args.method, seed=args.seed), [row], math.isfinite(norm))


def cmd_probe(args):
    grid = Grid(args.L, args.N)
    deltas = args.delta or default_delta_schedule(grid, args.rho)
    y_rule = args.y if args.y is not None else args.y_rule
    rep = certificate_sweep(args.symbol, _space(args), args.eta, deltas, y_rule, args.rho, grid)
    rows = [{"eta": r.eta, "symbol_abs": r.symbol_abs, "lower_bound": r.lower_bound, "delta": r.delta,
             "y": r.y, "doubling_correction": r.doubling_correction} for r in rep.rows]
    bad = [r for r in rows if not math.isfinite(r["lower_bound"])]
    meta = _base_meta(args, symbol=args.symbol_text, L=args.L, N=args.N, delta=deltas, rho=args.rho,
                      y_rule=y_rule if isinstance(y_rule, str) else list(y_rule), best=rep.best)
    return Table(meta, rows, not bad, bad)


def cmd_kernelbound(args):
    if args.mollifier is not None:
        grid = Grid(args.L, args.N)
        k = mollifier_kernel(args.mollifier, grid)
        kind = f"mollifier:j={args.mollifier:g}"
    else:
        k = KernelSpec.a_minus_alpha(args.alpha)
        kind = f"aminus:alpha={args.alpha:g}"
    value = kernel_l1_upper_bound(k, args.weight, caveat=args.caveat)
    return Table(_base_meta(args, kernel=kind, caveat=args.caveat, L=args.L, N=args.N),
                 [{"bound": value, "finite": math.isfinite(value)}], True)


def cmd_lebesgue(args):
    grid = Grid(args.L, args.N)
    psi = SampledFunction(grid, PlateauBump(args.rho).transform(grid.x))
    rows, bad = [], []
    for eta in args.eta:
        prev = math.inf
        for d in args.delta:
            val = lebesgue_point_integral(args.symbol, eta, psi, d)
            row = {"eta": eta, "delta": d, "I": val, "decreasing": val < prev}
            rows.append(row)
            if not val < prev:
                bad.append(row)
            prev = val
    meta = _base_meta(args, symbol=args.symbol_text, L=args.L, N=args.N, rho=args.rho, delta=args.delta)
    return Table(meta, rows, not bad, bad)


def cmd_young(args):
    grid = Grid(args.L, args.N)
    rng = np.random.default_rng(args.seed)
    rows, bad = [], []
    for i in range(args.draws):
        if args.preset == "w1":
            j = int(rng.integers(1, 5))
            kappa = mollifier(j, grid)
        else:
            lo = float(rng.uniform(-4.0, -1.0))
            kappa = SampledFunction(grid, np.where((grid.x >= lo) & (grid.x <= lo + 1.0), 1.0, 0.0))
        f = gaussian(grid, sigma=float(rng.uniform(0.3, 2.0)), center=float(rng.uniform(-2.0, 2.0)))
        res = weighted_young_check(kappa, f, p=args.p, preset=args.preset, c=args.c)
        row = {"draw": i, "lhs": res.lhs, "rhs": res.rhs, "holds": res.holds}
        rows.append(row)
        if not res.holds:
            bad.append(row)
    return Table(_base_meta(args, preset=args.preset, c=args.c, L=args.L, N=args.N, seed=args.seed), rows,
                 not bad, bad)


def cmd_scenario(args):
    name = args.name
    if name == "two-classes":
        rep = SCENARIOS[name](depth=args.depth, b=BSequence(), m_max=args.mmax, seed=args.seed)
    elif name == "exp-weight-unbounded":
        rep = SCENARIOS[name](c=args.c, alpha=args.alpha, p=args.p, seed=args.seed)
    elif name == "nondoubling-growth":
        rep = SCENARIOS[name](c=args.c, tau=args.tau, p=args.p, R_schedule=args.R)
    elif name == "power-trick":
        rep = SCENARIOS[name](parse_symbol_spec(args.symbol), args.weight, m_max=args.mmax)
    else:
        rep = SCENARIOS[name](alpha1=args.alpha1, alpha2=args.alpha2, x0_list=args.x0, eps=args.eps)
    return rep


# ---------------------------------------------------------------------------
# parser


def _common(sp, weight="const:c=1", p="2", space=True):
    if space:
        sp.add_argument("--weight", type=_weight, default=_weight(weight), help=f"weight spec ({GRAMMAR})")
        sp.add_argument("--p", type=_p, default=_p(p), help="exponent, real >= 1 or inf")
    sp.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    sp.add_argument("--out", default=None, help="output path; stdout when omitted")
    sp.add_argument("--seed", type=_seed, default=0, help="seed for randomized steps")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="fmlab", description="Fourier multipliers on weighted Lebesgue spaces of the line.",
                     formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"fmlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("doubling", help="doubling ratios over an (R, y) schedule", formatter_class=fmt)
    _common(sp)
    sp.add_argument("--tau", type=float, default=2.0, help="dilation factor > 1")
    sp.add_argument("--R", type=_floats, default=[4.0, 8.0, 16.0], help="increasing radii")
    sp.add_argument("--y", type=_floats, default=_floats("-20:20:1"), help="searched centers")
    sp.set_defaults(func=cmd_doubling)

    sp = sub.add_parser("witness", help="weak doubling witness sequence", formatter_class=fmt)
    _common(sp, weight="subexp:c=1,beta=0.5")
    sp.add_argument("--tau", type=float, default=2.0, help="dilation factor > 1")
    sp.add_argument("--j", type=_floats, default=_floats("1:20:1"), help="sequence indices")
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("ap", help="A_p and A_X constants over dyadic intervals", formatter_class=fmt)
    _common(sp)
    sp.add_argument("--K", type=int, default=10, help="dyadic levels; rows for K-2..K")
    sp.set_defaults(func=cmd_ap)

    sp = sub.add_parser("mnorm", help="dense operator norm on weighted l^2", formatter_class=fmt)
    _common(sp)
    sp.add_argument("--symbol", default="lorentz", help=f"symbol spec ({SYMBOL_GRAMMAR})")
    sp.add_argument("--L", type=_positive, default=8.0, help="grid half width")
    sp.add_argument("--N", type=_pow2, default=256, help="grid size")
    sp.add_argument("--n-small", type=int, default=512, help="largest dense size")
    sp.add_argument("--method", choices=("svd", "power"), default="svd", help="singular value method")
    sp.set_defaults(func=cmd_mnorm)

    sp = sub.add_parser("probe", help="probe certificate sweep", formatter_class=fmt)
    _common(sp, weight="power:alpha=0.2")
    sp.add_argument("--symbol", default="lorentz", help=f"symbol spec ({SYMBOL_GRAMMAR})")
    sp.add_argument("--L", type=_positive, default=128.0, help="grid half width")
    sp.add_argument("--N", type=_pow2, default=4096, help="grid size")
    sp.add_argument("--eta", type=_floats, default=[0.0], help="probed frequencies")
    sp.add_argument("--delta", type=_floats, default=None, help="delta schedule; halving from 1 down to 8/L when omitted")
    sp.add_argument("--y", type=_floats, default=None, help="explicit centers; overrides --y-rule")
    sp.add_argument("--y-rule", choices=("zero", "witness"), default="zero", help="center rule")
    sp.add_argument("--rho", type=float, default=2.0, help="plateau ratio > 1")
    sp.set_defaults(func=cmd_probe)

    sp = sub.add_parser("kernelbound", help="weighted L^1 norm of a convolution kernel", formatter_class=fmt)
    _common(sp, weight="exp:c=1")
    sp.add_argument("--alpha", type=float, default=0.5, help="order of the analytic kernel")
    sp.add_argument("--mollifier", type=_positive, default=None, help="use the mollifier kernel rho_j instead")
    sp.add_argument("--L", type=_positive, default=8.0, help="grid half width for sampled kernels")
    sp.add_argument("--N", type=_pow2, default=4096, help="grid size for sampled kernels")
    sp.add_argument("--caveat", action="store_true", help="allow weights outside the exponential presets")
    sp.set_defaults(func=cmd_kernelbound)

    sp = sub.add_parser("lebesgue", help="Lebesgue-point integral sequence", formatter_class=fmt)
    _common(sp, space=False)
    sp.add_argument("--symbol", default="lorentz", help=f"symbol spec ({SYMBOL_GRAMMAR})")
    sp.add_argument("--eta", type=_floats, default=[0.0, 2.0], help="points")
    sp.add_argument("--delta", type=_floats, default=[1.0, 0.5, 0.25, 0.125], help="decreasing scales")
    sp.add_argument("--rho", type=float, default=2.0, help="plateau ratio of the kernel")
    sp.add_argument("--L", type=_positive, default=256.0, help="half width of the kernel window")
    sp.add_argument("--N", type=_pow2, default=16384, help="kernel samples")
    sp.set_defaults(func=cmd_lebesgue)

    sp = sub.add_parser("young", help="randomized weighted Young inequality checks", formatter_class=fmt)
    _common(sp, space=False)
    sp.add_argument("--p", type=_p, default=2.0, help="exponent, real >= 1 or inf")
    sp.add_argument("--preset", choices=("w1", "w2"), default="w1", help="exp(cx) on R, or exp(c phi) with kernels in x <= 0")
    sp.add_argument("--c", type=_positive, default=1.0, help="weight rate")
    sp.add_argument("--draws", type=int, default=20, help="random (kappa, f) draws")
    sp.add_argument("--L", type=_positive, default=8.0, help="grid half width")
    sp.add_argument("--N", type=_pow2, default=1024, help="grid size")
    sp.set_defaults(func=cmd_young)

    sp = sub.add_parser("scenario", help="run a named demonstration", formatter_class=fmt)
    sp.add_argument("name", choices=sorted(SCENARIOS), help="scenario name")
    _common(sp, weight="power:alpha=0.2")
    sp.add_argument("--depth", type=int, default=8, help="fat Cantor depth (two-classes)")
    sp.add_argument("--mmax", type=int, default=5, help="largest copy index / power")
    sp.add_argument("--c", type=_positive, default=1.0, help="exponential rate")
    sp.add_argument("--alpha", type=float, default=0.5, help="symbol order (exp-weight-unbounded)")
    sp.add_argument("--tau", type=float, default=2.0, help="dilation factor")
    sp.add_argument("--R", type=_floats, default=[4.0, 8.0, 16.0], help="radii (nondoubling-growth)")
    sp.add_argument("--symbol", default="lorentz", help="symbol spec (power-trick)")
    sp.add_argument("--alpha1", type=float, default=2.0, help="left exponent (superexp-triviality)")
    sp.add_argument("--alpha2", type=float, default=2.0, help="right exponent (superexp-triviality)")
    sp.add_argument("--x0", type=_floats, default=[1.0, -1.0], help="base shifts (superexp-triviality)")
    sp.add_argument("--eps", type=float, default=0.25, help="sampling radius (superexp-triviality)")
    sp.set_defaults(func=cmd_scenario)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "symbol") and isinstance(args.symbol, str):
        args.symbol_text = args.symbol
        if args.command != "scenario":
            try:
                args.symbol = parse_symbol_spec(args.symbol)
            except (SymbolError, ValueError) as exc:
                parser.error(str(exc))
    try:
        result = args.func(args)
    except (ValueError, TypeError, SymbolError) as exc:
        sys.stderr.write(f"fmlab {args.command}: {exc}\n")
        return 1
    except ArithmeticError as exc:
        sys.stderr.write(f"fmlab {args.command}: numeric failure: {exc}\n")
        return 2
    text = result.to_json() if args.format == "json" else result.to_csv()
    if args.format == "json" and not text.endswith("\n"):
        text += "\n"
    _write(text, args.out)
    if not result.passed:
        failing = result.failing() if callable(result.failing) else result.failing
        for row in failing:
            sys.stderr.write(f"FAILED: {row}\n")
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
