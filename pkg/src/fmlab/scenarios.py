"""End-to-end demonstrations that emit pass/fail tables.

Every row records the measured value, the predicted bound, the relation
between them and where the prediction comes from.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .bump import bump
from .grid import Grid, SampledFunction
from .multipliers import (
    AMinusAlpha, KernelSpec, MollifierTransform, MultiplierSymbol, apply_multiplier,
    discrete_l2_operator_norm, kernel_l1_upper_bound, probe_lower_bound,
)
from .norms import (
    SpaceSpec, doubling_constant_estimate, log_lofstrom_ratio, lofstrom_ratio, weak_doubling_witness,
)
from .weights import BSequence, CantorSeq, Constant, Exp, SubExp, SuperExp, Weight

SCHEMA = 1


@dataclass(frozen=True)
class Row:
    label: str
    measured: float
    predicted: float
    relation: str  # "<=", ">=", "==", "info"
    passed: bool
    provenance: str


@dataclass
class ScenarioReport:
    name: str
    params: dict
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def add(self, label, measured, predicted, relation, provenance, tol=0.0, passed=None):
        measured, predicted = float(measured), float(predicted)
        if passed is None:
            if relation == "<=":
                passed = measured <= predicted + tol
            elif relation == ">=":
                passed = measured >= predicted - tol
            elif relation == "==":
                passed = abs(measured - predicted) <= tol
            else:
                passed = True
        self.rows.append(Row(label, measured, predicted, relation, bool(passed), provenance))

    def failing(self):
        return [r for r in self.rows if not r.passed]

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "meta": {"scenario": self.name, "params": self.params, "notes": list(self.notes),
                     "passed": self.passed},
            "rows": [asdict(r) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioReport":
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported schema {data.get('schema')!r}")
        meta = data["meta"]
        return cls(meta["scenario"], dict(meta["params"]), [Row(**r) for r in data["rows"]],
                   list(meta["notes"]))

    @classmethod
    def from_json(cls, text: str) -> "ScenarioReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"schema={SCHEMA}"])
        w.writerow(["scenario", "params", *Row.__dataclass_fields__])
        params = json.dumps(self.params, sort_keys=True)
        for r in self.rows:
            w.writerow([self.name, params, r.label, repr(r.measured), repr(r.predicted), r.relation,
                        r.passed, r.provenance])
        return buf.getvalue()

    def __eq__(self, other):
        if not isinstance(other, ScenarioReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


# ---------------------------------------------------------------------------
# two classes of multipliers


def _cantor_cell_fraction(G, x, h, shift):
    """|G_shift intersected with the cell [x - h/2, x + h/2]| / h, G_shift = shift + G."""
    return G.measure_in(x - 0.5 * h - shift, x + 0.5 * h - shift) / h


def cantor_density(G, j: int, points, cells_per_unit: int = 256):
    """int rho_j(x - y) chi_G(y) dy at each point, midpoint rule on cells of width 1/(cells_per_unit j)."""
    width = 1.0 / (cells_per_unit * j)
    centers = np.arange(-1.0 / j + 0.5 * width, 1.0 + 1.0 / j, width)
    mass = G.measure_in(centers - 0.5 * width, centers + 0.5 * width)
    keep = mass > 0
    centers, mass = centers[keep], mass[keep]
    pts = np.asarray(points, dtype=float)
    out = np.empty(pts.size)
    for i in range(0, pts.size, 512):
        chunk = pts[i: i + 512]
        out[i: i + 512] = (j * bump(j * (chunk[:, None] - centers[None, :]))) @ mass
    return out


def select_mollifier_index(G, grid: Grid, candidates=(1, 2, 4, 8, 16, 32, 64), level: float = 0.5):
    """Smallest j whose best local G-density reaches ``level``; returns (j, point, density)."""
    scan = np.linspace(0.0, 1.0, 1025)
    for j in candidates:
        if grid.h > 1.0 / (8 * j):
            break
        dens = cantor_density(G, j, scan)
        i = int(np.argmax(dens))
        if dens[i] >= level:
            return j, float(scan[i]), float(dens[i])
    raise ValueError("no admissible mollifier index reaches the density level on this grid")


def _smooth_unit_functions(grid: Grid, count: int, seed: int):
    rng = np.random.default_rng(seed)
    x = grid.x
    sigma = grid.L / 6
    out = []
    for _ in range(count):
        w, th, c = rng.uniform(0.2, 6.0), rng.uniform(0, 2 * np.pi), rng.uniform(-grid.L / 4, grid.L / 4)
        # |u| <= 1 everywhere, not only at the nodes
        out.append(SampledFunction(grid, np.cos(w * x + th) * np.exp(-((x - c) / sigma) ** 2)))
    return out


def two_classes_demo(depth: int = 8, b: BSequence = BSequence(), j: int | None = None, m_max: int = 5,
                     grid: Grid | None = None, n_smooth: int = 5, seed: int = 0) -> ScenarioReport:
    """Mollifier symbol on L^inf(w_{G,b}): bounded on smooth inputs, unbounded on chi_{G_m} / b_m."""
    if depth < 6:
        raise ValueError("depth must be at least 6")
    if not 1 <= m_max <= 8:
        raise ValueError("m_max must lie in 1..8")
    grid = grid or Grid(32.0, 32768)
    if grid.L < 2 * m_max + 3:
        raise ValueError(f"grid half width {grid.L} cannot hold G_{m_max} = {2 * m_max} + G")
    weight = CantorSeq(depth, b)
    G = weight.set
    if j is None:
        j, x_star, dens = select_mollifier_index(G, grid)
    else:
        scan = np.linspace(0.0, 1.0, 1025)
        d = cantor_density(G, j, scan)
        x_star, dens = float(scan[np.argmax(d)]), float(d.max())
    a = MollifierTransform(j)
    rep = ScenarioReport("two-classes", {"depth": depth, "b": b.kind, "j": j, "m_max": m_max,
                                         "L": grid.L, "N": grid.N, "seed": seed})
    rep.notes.append(f"density point of G at scale 1/{j}: x = {x_star:.6f}, local density {dens:.6f}")
    rep.notes.append("the companion failure of the norm fundamental property for L^1(1/w) quantifies "
                     "over all continuous test functions and is not run")
    logw = weight.log(grid.x)
    worst = 0.0
    for u in _smooth_unit_functions(grid, n_smooth, seed):
        v = apply_multiplier(a, u)
        worst = max(worst, float(np.max(np.abs(v.values) * np.exp(logw))))
    rep.add("bounded side: max ||W_a u||_Linf(w) over smooth |u| <= 1", worst, 1.0, "<=",
            "mollifier averages: |rho_j * u| <= sup|u| and w <= 1", tol=0.05)
    for m in range(1, m_max + 1):
        bm = b(m)
        bm_f = float(bm)
        exact = Fraction(1) / bm * bm if isinstance(bm, Fraction) else 1.0 / bm_f * bm_f
        rep.add(f"||u_{m}||_Linf(w)", float(exact), 1.0, "==", "b_m^-1 * b_m on G_m", tol=1e-15)
        u = SampledFunction(grid, _cantor_cell_fraction(G, grid.x, grid.h, 2.0 * m) / bm_f)
        v = apply_multiplier(a, u)
        near = np.abs(grid.x - (2 * m + x_star)) <= 1.0 / j
        measured = float(np.max(np.abs(v.values[near])))
        rep.add(f"growth m={m}: max |W_a u_{m}| near density point", measured, 1.0 / (4.0 * bm_f), ">=",
                "density >= 1/2 at a Lebesgue point gives 1/(2 b_m); factor 2 slack")
    return rep


# ---------------------------------------------------------------------------
# unbounded multiplier on an exponentially weighted space


def exp_weight_unbounded_demo(c: float = 1.0, alpha: float = 0.5, p: float = 2.0,
                              grid: Grid | None = None, n_probes: int = 50, seed: int = 0,
                              base_grid: Grid | None = None) -> ScenarioReport:
    """(xi + i0)^-alpha on L^p(e^{cx}): finite kernel bound above every probe, unbounded symbol."""
    if not c > 0:
        raise ValueError("c must be positive")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if not p >= 1:
        raise ValueError("p must be >= 1")
    grid = grid or Grid(32.0, 4096)
    base_grid = base_grid or Grid(16.0, 1024)
    rep = ScenarioReport("exp-weight-unbounded", {"c": c, "alpha": alpha, "p": p, "L": grid.L, "N": grid.N,
                                                  "n_probes": n_probes, "seed": seed})
    kernel = KernelSpec.a_minus_alpha(alpha)
    weight = Exp(c)
    bound = kernel_l1_upper_bound(kernel, weight)
    rep.add("kernel bound ||k_alpha f_-||_L1(w)", bound, c ** -alpha, "==",
            "|k_alpha| Gamma(alpha) / c^alpha = c^-alpha", tol=1e-12)
    space = SpaceSpec(p, weight)
    rng = np.random.default_rng(seed)
    a = AMinusAlpha(alpha)
    worst = 0.0
    delta_min = max(4.0 * 2.0 / grid.L, 16.0 * grid.h)
    for _ in range(n_probes):
        delta = float(np.exp(rng.uniform(math.log(delta_min), 0.0)))
        room = grid.L / 2 - 2.0 / delta
        y = float(rng.uniform(-room, room))
        eta = float(rng.uniform(-5.0, 5.0))
        cert = probe_lower_bound(a, space, eta, delta, y, 2.0, grid, kernel=kernel)
        worst = max(worst, cert.lower_bound)
    rep.add(f"max probe lower bound over {n_probes} probes", worst, bound, "<=",
            "probe quotients never exceed the kernel bound", tol=1e-6)
    coarse, fine = base_grid, Grid(2 * base_grid.L, 2 * base_grid.N)
    growth = a.sup_on_grid(fine) / a.sup_on_grid(coarse)
    rep.add(f"grid max growth N={coarse.N}->{fine.N}", growth, 2.0 ** alpha, "==",
            "|a(i eps)| = eps^-alpha with eps = dxi/2 halved", tol=0.1 * 2.0 ** alpha)
    rep.notes.append("refinement doubles L with N, which halves dxi")
    return rep


# ---------------------------------------------------------------------------
# doubling growth


def nondoubling_growth_demo(c: float = 1.0, tau: float = 2.0, p: float = 2.0, R_schedule=(4.0, 8.0, 16.0),
                            y_search=tuple(range(-20, 21))) -> ScenarioReport:
    if not c > 0:
        raise ValueError("c must be positive")
    if not tau > 1:
        raise ValueError("tau must exceed 1")
    R_schedule = tuple(float(r) for r in R_schedule)
    rep = ScenarioReport("nondoubling-growth", {"c": c, "tau": tau, "p": p, "R": list(R_schedule),
                                                "y_search": [float(y) for y in y_search]})
    est = doubling_constant_estimate(SpaceSpec(p, Exp(c)), tau, R_schedule, y_search)
    inf = est.per_R_inf
    for R, v in zip(R_schedule, inf):
        rep.add(f"inf_y ratio at R={R:g}", v, 1.0, ">=", "lattice property", tol=1e-12)
    if tau - 1 < 1e-6:
        rep.notes.append("no growth detectable: tau is numerically 1")
        rep.add("growth", float(inf[-1] / inf[0]), 1.0, "info", "tau -> 1 limit")
    else:
        trend = np.exp(c * (tau - 1) * np.array(R_schedule) / 2) / np.array(R_schedule)
        K = inf[0] / trend[0]
        rep.notes.append(f"fitted constant K = {K:.6g} on R = {R_schedule[0]:g}")
        for R, v, t in zip(R_schedule[1:], inf[1:], trend[1:]):
            rep.add(f"inf_y ratio at R={R:g} vs K e^(c(tau-1)R/2)/R", v, K * t, ">=",
                    "lower bound e^(c(tau-1)R/2)/R, constant fitted at the first radius")
        for (R0, v0), (R1, v1) in zip(zip(R_schedule, inf), zip(R_schedule[1:], inf[1:])):
            rep.add(f"consecutive growth R={R0:g}->{R1:g}", v1 / v0,
                    0.9 * math.exp(c * (tau - 1) * (R1 - R0) / 2), ">=",
                    "0.9 e^(c(tau-1) dR/2)")
    wit = weak_doubling_witness(SpaceSpec(p, SubExp(1.0, 0.5)), tau if tau > 1 + 1e-6 else 2.0)
    rep.add("subexp(c=1,beta=0.5) witness max ratio", wit.max_ratio, wit.bound, "<=",
            "exp((tau+1) sqrt(phi(1))) with unit constants")
    return rep


# ---------------------------------------------------------------------------
# power trick


def power_trick_check(a: MultiplierSymbol, weight: Weight = Constant(), n_small: int = 128, m_max: int = 5,
                      grid: Grid | None = None) -> ScenarioReport:
    if not 1 <= m_max <= 8:
        raise ValueError("m_max must lie in 1..8")
    grid = grid or Grid(8.0, n_small)
    rep = ScenarioReport("power-trick", {"symbol": type(a).__name__, "weight": weight.format(),
                                         "n_small": n_small, "m_max": m_max, "L": grid.L, "N": grid.N})
    sup1 = a.sup_on_grid(grid)
    base = discrete_l2_operator_norm(a, weight, grid, n_small)
    cap = math.log(1e300)
    for m in range(1, m_max + 1):
        if m * math.log(max(base, sup1, 1e-300)) > cap:
            rep.notes.append(f"rows capped at m = {m - 1}: overflow")
            break
        am = a ** m
        rep.add(f"max|a|^{m} == max|a^{m}|", sup1 ** m, am.sup_on_grid(grid), "==",
                "pointwise identity", tol=1e-12 * max(1.0, sup1 ** m))
        nm = discrete_l2_operator_norm(am, weight, grid, n_small)
        rep.add(f"norm(a^{m}) <= norm(a)^{m}", nm, base ** m, "<=", "submultiplicativity",
                tol=1e-8 * max(1.0, base ** m))
    return rep


# ---------------------------------------------------------------------------
# superexponential triviality


def superexp_triviality_demo(alpha1: float = 2.0, alpha2: float = 2.0, x0_list=(1.0, -1.0), eps: float = 0.25,
                             k_max: int = 20, threshold: float = 1e6) -> ScenarioReport:
    if not (alpha1 > 1 and alpha2 > 1):
        raise ValueError("alpha1 and alpha2 must exceed 1")
    x0_list = tuple(float(x) for x in x0_list)
    if not 0 < eps < min(abs(x) for x in x0_list) / 3:
        raise ValueError("need 0 < eps < min |x0| / 3")
    w = SuperExp(alpha1, alpha2)
    rep = ScenarioReport("superexp-triviality", {"alpha1": alpha1, "alpha2": alpha2, "x0": list(x0_list),
                                                 "eps": eps, "k_max": k_max, "threshold": threshold})
    ks = range(1, k_max + 1)
    for x0 in x0_list:
        # log space: the ratio itself saturates at +inf for large exponents
        logs = [log_lofstrom_ratio(w, x0, eps, k) for k in ks]
        inc = all(b > a for a, b in zip(logs, logs[1:]))
        rep.add(f"x0={x0:g}: strictly increasing in k", float(inc), 1.0, "==", "convex exponent", tol=0)
        first = next((k for k, v in zip(ks, logs) if v > math.log(threshold)), math.inf)
        rep.add(f"x0={x0:g}: first k with ratio > {threshold:g}", first, k_max, "<=",
                "exponent grows linearly in k")
    x0c = min(abs(x) for x in x0_list)
    contrast = [lofstrom_ratio(Exp(1.0), x0c, eps, k) for k in ks]
    rep.add(f"exp(c=1) contrast at x0={x0c:g}: max ratio over k", max(contrast), math.exp(x0c - 2 * eps), "==",
            "exponent telescopes to c (x0 - 2 eps)", tol=1e-9 * math.exp(x0c - 2 * eps))
    return rep


SCENARIOS = {
    "two-classes": two_classes_demo,
    "exp-weight-unbounded": exp_weight_unbounded_demo,
    "nondoubling-growth": nondoubling_growth_demo,
    "power-trick": power_trick_check,
    "superexp-triviality": superexp_triviality_demo,
}
