"""Weighted L^p norms, ball-indicator norms, doubling constants, A_p / A_X.

Integrals of powers of weights are always carried as natural logs; the
exponential families overflow double precision long before the schedules
used here become uninteresting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .grid import SampledFunction
from .weights import (
    CantorFlat, CantorSeq, Constant, Exp, ExpAbs, PowerAbs, PowerOnePlus, SubExp, Weight,
)

LOG_OVERFLOW = math.log(1e300)


class QuadratureError(ArithmeticError):
    def __init__(self, achieved: float, requested: float):
        self.achieved = achieved
        self.requested = requested
        super().__init__(f"quadrature reached relative error {achieved:.3g}, requested {requested:.3g}")


class WeightOverflowError(OverflowError):
    pass


@dataclass(frozen=True)
class SpaceSpec:
    """L^p(R, w): norm of f is || f w ||_p."""

    p: float
    weight: Weight = field(default_factory=Constant)

    def __post_init__(self):
        p = float(self.p)
        if not (p >= 1):
            raise ValueError(f"p must be >= 1 or inf, got {self.p}")
        object.__setattr__(self, "p", p)

    @property
    def conjugate(self) -> float:
        if math.isinf(self.p):
            return 1.0
        if self.p == 1:
            return math.inf
        return self.p / (self.p - 1.0)

    def describe(self) -> str:
        p = "inf" if math.isinf(self.p) else f"{self.p:g}"
        return f"L^{p}({self.weight.format()})"


def parse_p(text) -> float:
    if isinstance(text, str) and text.strip().lower() in ("inf", "infinity", "oo"):
        return math.inf
    return float(text)


# ---------------------------------------------------------------------------
# integrals of w**s over intervals


def _log_int_monomial(t, u, v):
    """log int_u^v x**t dx for 0 <= u <= v (arrays), +inf when divergent at 0."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    out = np.full(np.broadcast(u, v).shape, -np.inf)
    nonempty = v > u
    q = t + 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.log1p((v - u) / u)  # log(v / u) without cancellation
        if q == 0:
            val = np.where(u > 0, np.log(ratio), np.inf)
        elif q > 0:
            from_u = q * np.log(u) + np.log(np.expm1(q * ratio)) - math.log(q)
            val = np.where(u > 0, from_u, q * np.log(v) - math.log(q))
        else:
            from_u = q * np.log(u) + np.log(-np.expm1(q * ratio)) - math.log(-q)
            val = np.where(u > 0, from_u, np.inf)
    return np.where(nonempty, val, out)


def _log_int_exp(t, a, b):
    """log int_a^b exp(t x) dx (arrays)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    width = b - a
    with np.errstate(divide="ignore", invalid="ignore"):
        if t > 0:
            val = t * b + np.log(-np.expm1(-t * width)) - math.log(t)
        elif t < 0:
            val = t * a + np.log(-np.expm1(t * width)) - math.log(-t)
        else:
            val = np.log(width)
    return np.where(width > 0, val, -np.inf)


def _split_sym(a, b):
    """Reflect the negative part of [a, b] onto [0, inf): returns (neg_u, neg_v, pos_u, pos_v)."""
    neg_u = np.maximum(-b, 0.0)
    neg_v = np.maximum(-a, 0.0)
    pos_u = np.maximum(a, 0.0)
    pos_v = np.maximum(b, 0.0)
    return neg_u, neg_v, pos_u, pos_v


def _closed_form_log_integral(weight: Weight, s: float, a, b):
    if isinstance(weight, Constant):
        with np.errstate(divide="ignore"):
            return s * math.log(weight.c) + np.log(np.maximum(b - a, 0.0))
    if isinstance(weight, Exp):
        return _log_int_exp(s * weight.c, a, b)
    if isinstance(weight, ExpAbs):
        nu, nv, pu, pv = _split_sym(a, b)
        return np.logaddexp(_log_int_exp(s * weight.c, nu, nv), _log_int_exp(s * weight.c, pu, pv))
    if isinstance(weight, PowerAbs):
        nu, nv, pu, pv = _split_sym(a, b)
        t = s * weight.gamma
        return np.logaddexp(_log_int_monomial(t, nu, nv), _log_int_monomial(t, pu, pv))
    if isinstance(weight, PowerOnePlus):
        nu, nv, pu, pv = _split_sym(a, b)
        t = s * weight.alpha
        neg = np.where(nv > nu, _log_int_monomial(t, 1.0 + nu, 1.0 + nv), -np.inf)
        pos = np.where(pv > pu, _log_int_monomial(t, 1.0 + pu, 1.0 + pv), -np.inf)
        return np.logaddexp(neg, pos)
    return None


def _cantor_log_integral(weight: Weight, s: float, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    width = np.maximum(b - a, 0.0)
    G = weight.set
    if isinstance(weight, CantorFlat):
        inside = G.measure_in(a, b)
        total = width * 2.0 ** s + (1.0 - 2.0 ** s) * inside
    else:
        total = width.copy()
        m_max = int(np.floor(max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0)) / 2.0))
        for m in range(1, m_max + 1):
            coef = float(weight.b(m)) ** s - 1.0
            lo, hi = 2.0 * m, 2.0 * m + 1.0
            pos = (b >= lo) & (a <= hi)
            neg = (a <= -lo) & (b >= -hi)
            if np.any(pos):
                total = total + np.where(pos, coef * G.measure_in(a - 2.0 * m, b - 2.0 * m), 0.0)
            if np.any(neg):
                total = total + np.where(neg, coef * G.measure_in(-b - 2.0 * m, -a - 2.0 * m), 0.0)
    with np.errstate(divide="ignore"):
        return np.log(np.maximum(total, 0.0))


def log_weighted_integral(weight: Weight, s: float, a, b, method: str = "auto",
                          rtol: float = 1e-10, tol: float = 1e-8) -> np.ndarray:
    """log of int_a^b w(x)**s dx, elementwise over interval endpoints.

    ``method="auto"`` uses closed forms where they exist (constant, power and
    exponential families, and the piecewise-constant Cantor weights) and the
    adaptive log-space Gauss-Kronrod kernel otherwise; ``method="quad"``
    forces the kernel. Raises ``QuadratureError`` if the achieved relative
    error exceeds ``tol``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if method not in ("auto", "quad"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        if isinstance(weight, (CantorFlat, CantorSeq)):
            return _cantor_log_integral(weight, s, a, b)
        closed = _closed_form_log_integral(weight, s, a, b)
        if closed is not None:
            return closed
    if weight.kernel_code is None:
        raise ValueError(f"no quadrature path for weight {weight.format()}")
    p0, p1 = weight.kernel_params()
    shape = np.broadcast(a, b).shape
    aa, bb = (np.ravel(v) for v in np.broadcast_arrays(a, b))
    # every family is smooth off x = 0; a kink inside a panel can hide between nodes
    n = aa.size
    lo = np.concatenate([aa, np.maximum(aa, 0.0)])
    hi = np.concatenate([np.minimum(bb, 0.0), bb])
    vals, achieved = kernels.log_power_integrals(weight.kernel_code, p0, p1, float(s), lo, hi, rtol)
    vals = np.asarray(vals)
    worst = float(np.max(achieved, initial=0.0))
    if worst > tol:
        raise QuadratureError(worst, tol)
    return np.logaddexp(vals[:n], vals[n:]).reshape(shape)


def log_ess_sup(weight: Weight, a, b) -> np.ndarray:
    """log of the essential supremum of w over the open interval (a, b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if isinstance(weight, CantorFlat):
        full = weight.set.measure_in(a, b) >= (b - a) * (1 - 1e-15)
        return np.where(full, 0.0, math.log(2.0))
    if isinstance(weight, CantorSeq):
        width = b - a
        cov = np.zeros(np.broadcast(a, b).shape)
        best = np.full(cov.shape, -np.inf)
        m_max = int(np.floor(max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0)) / 2.0))
        G = weight.set
        for m in range(1, m_max + 1):
            part = G.measure_in(a - 2.0 * m, b - 2.0 * m) + G.measure_in(-b - 2.0 * m, -a - 2.0 * m)
            cov = cov + part
            best = np.where(part > 0, np.maximum(best, math.log(float(weight.b(m)))), best)
        return np.where(cov >= width * (1 - 1e-15), best, 0.0)
    # every remaining family is monotone in x on each side of 0
    cands = [weight.log(a), weight.log(b)]
    straddle = (a < 0) & (b > 0)
    cands.append(np.where(straddle, weight.log(np.zeros_like(a)), -np.inf))
    out = np.maximum.reduce(cands)
    if isinstance(weight, PowerAbs) and weight.gamma < 0:
        out = np.where((a <= 0) & (b >= 0), np.inf, out)
    return out


def log_chi_norm(weight: Weight, p: float, a, b, method: str = "auto") -> np.ndarray:
    """log || chi_(a,b) ||_{L^p(w)}."""
    if math.isinf(p):
        return log_ess_sup(weight, a, b)
    return log_weighted_integral(weight, p, a, b, method=method) / p


# ---------------------------------------------------------------------------
# norms of sampled functions


def log_weighted_lp_norm(f: SampledFunction, space: SpaceSpec) -> float:
    vals = np.abs(f.values)
    supp = vals > 0
    if not np.any(supp):
        return -math.inf
    logw = space.weight.log(f.grid.x[supp])
    if np.max(logw) > LOG_OVERFLOW:
        raise WeightOverflowError(
            f"weight {space.weight.format()} exceeds 1e300 on the support of f"
        )
    terms = np.log(vals[supp]) + logw
    if math.isinf(space.p):
        return float(np.max(terms))
    p = space.p
    m = np.max(terms)
    return float(m + (math.log(f.grid.h) + math.log(np.sum(np.exp(p * (terms - m))))) / p)


def weighted_lp_norm(f: SampledFunction, space: SpaceSpec) -> float:
    """(h sum |f w|^p)^(1/p), or the grid max for p = inf."""
    return math.exp(log_weighted_lp_norm(f, space))


# ---------------------------------------------------------------------------
# balls and doubling


def log_ball_indicator_norm(space: SpaceSpec, y: float, R: float, method: str = "auto") -> float:
    if not R > 0:
        raise ValueError("radius must be positive")
    return float(log_chi_norm(space.weight, space.p, np.array(y - R), np.array(y + R), method))


def ball_indicator_norm(space: SpaceSpec, y: float, R: float, method: str = "auto") -> float:
    """|| chi_B(y,R) ||_{L^p(w)}, B(y, R) = (y - R, y + R)."""
    return math.exp(log_ball_indicator_norm(space, y, R, method))


def doubling_ratio(space: SpaceSpec, tau: float, y: float, R: float) -> float:
    if not tau > 1:
        raise ValueError("tau must exceed 1")
    return math.exp(log_ball_indicator_norm(space, y, tau * R) - log_ball_indicator_norm(space, y, R))


@dataclass(frozen=True)
class DoublingReport:
    """Ratios ||chi_B(y, tau R)|| / ||chi_B(y, R)|| on a finite (R, y) schedule.

    ``liminf_estimate`` is the minimum of the per-R infima over the tail half
    of the R schedule. It bounds D_{X,tau} from above only in the sense that
    the infimum over y is restricted to the searched set.
    """

    space: SpaceSpec
    tau: float
    R_schedule: tuple
    y_search: tuple
    ratios: np.ndarray = field(repr=False)  # shape (len(R), len(y))
    per_R_inf: np.ndarray = field(repr=False)
    per_R_argmin_y: tuple
    liminf_estimate: float

    def rows(self):
        for i, R in enumerate(self.R_schedule):
            yield {"R": R, "inf_ratio": float(self.per_R_inf[i]), "argmin_y": self.per_R_argmin_y[i]}


def doubling_constant_estimate(space: SpaceSpec, tau: float, R_schedule, y_search) -> DoublingReport:
    R_schedule = tuple(float(r) for r in R_schedule)
    y_search = tuple(float(y) for y in y_search)
    if not R_schedule or not y_search:
        raise ValueError("schedules must be nonempty")
    if any(b <= a for a, b in zip(R_schedule, R_schedule[1:])):
        raise ValueError("R schedule must be increasing")
    if not tau > 1:
        raise ValueError("tau must exceed 1")
    R = np.array(R_schedule)[:, None]
    y = np.array(y_search)[None, :]
    w, p = space.weight, space.p
    log_big = log_chi_norm(w, p, y - tau * R, y + tau * R)
    log_small = log_chi_norm(w, p, y - R, y + R)
    ratios = np.exp(log_big - log_small)
    per_R = ratios.min(axis=1)
    argmin = tuple(y_search[i] for i in ratios.argmin(axis=1))
    tail = per_R[len(per_R) // 2:]
    ratios.setflags(write=False)
    per_R.setflags(write=False)
    return DoublingReport(space, float(tau), R_schedule, y_search, ratios, per_R, argmin,
                          float(tail.min()))


@dataclass(frozen=True)
class WitnessPoint:
    j: int
    y: float
    R: float
    ratio: float


@dataclass(frozen=True)
class WitnessReport:
    tau: float
    shift: int
    points: tuple
    bound: float  # exp((tau + 1) sqrt(phi(1))) with C0 = C1 = 1
    centered_ratios: tuple  # same radii, y = 0

    @property
    def max_ratio(self) -> float:
        return max(pt.ratio for pt in self.points)


def weak_doubling_witness(space: SpaceSpec, tau: float, j_values=range(1, 21)) -> WitnessReport:
    """Centers and radii along which the doubling ratio stays bounded.

    For w = exp(c|x|^beta) = exp(|x| phi(|x|)) with phi(r) = c r^(beta-1):
    R_j = phi(j)^(-1/2), y_j = j + m, with the smallest integer m >= 0 that
    keeps every enlarged ball B(y_j, tau R_j) inside x > 0. ``centered_ratios``
    repeats the radii at y = 0 for comparison.
    """
    w = space.weight
    if not isinstance(w, SubExp):
        raise TypeError(f"witness sequences are constructed for subexp weights only, got {w.format()}")
    if w.beta >= 1:
        raise ValueError("phi(r) = c r^(beta-1) must decrease; beta = 1 is the exponential case")
    if not tau > 1:
        raise ValueError("tau must exceed 1")
    js = np.array(list(j_values), dtype=float)
    if js.size == 0 or np.any(js < 1):
        raise ValueError("j values must be positive")
    R = w.growth_rate(js) ** -0.5
    m = int(max(0, math.floor(np.max(tau * R - js)) + 1))
    y = js + m

    def log_ratios(centers):
        return (log_chi_norm(w, space.p, centers - tau * R, centers + tau * R)
                - log_chi_norm(w, space.p, centers - R, centers + R))

    pts = tuple(WitnessPoint(int(j), float(yy), float(rr), float(math.exp(lr)))
                for j, yy, rr, lr in zip(js, y, R, log_ratios(y)))
    centered = tuple(float(v) for v in np.exp(log_ratios(np.zeros_like(y))))
    bound = math.exp((tau + 1.0) * math.sqrt(float(w.growth_rate(1.0))))
    return WitnessReport(float(tau), m, pts, bound, centered)


# ---------------------------------------------------------------------------
# Muckenhoupt constants


def dyadic_family(K: int = 10):
    """Dyadic intervals [j 2^k, (j+1) 2^k], k = -K..K, with centers in [-2^K, 2^K]."""
    lo, hi = [], []
    span = 2.0 ** K
    for k in range(-K, K + 1):
        ell = 2.0 ** k
        j = np.arange(math.floor(-span / ell - 0.5), math.ceil(span / ell - 0.5) + 1)
        a = j * ell
        centers = a + 0.5 * ell
        keep = (centers >= -span) & (centers <= span)
        lo.append(a[keep])
        hi.append(a[keep] + ell)
    return np.concatenate(lo), np.concatenate(hi)


@dataclass(frozen=True)
class APResult:
    value: float
    log_value: float
    divergent: bool
    argmax: tuple  # (a, b) of the extremal interval
    n_intervals: int
    K: int | None

    def __float__(self):
        return self.value


def _require_ap_range(space: SpaceSpec):
    if not (1 < space.p < math.inf):
        raise ValueError("A_p / A_X constants need 1 < p < inf")


def _ap_from_logs(log_vals, a, b, K):
    if np.any(np.isnan(log_vals)):
        raise ArithmeticError("A_p evaluation produced NaN")
    i = int(np.argmax(log_vals))
    lv = float(log_vals[i])
    value = math.inf if lv > 709.0 else math.exp(lv)
    divergent = math.isinf(lv)
    return APResult(value, lv, divergent, (float(a[i]), float(b[i])), int(a.size), K)


def ap_constant(space: SpaceSpec, K: int = 10, family=None) -> APResult:
    """sup over intervals Q of (avg_Q w^p)^(1/p) (avg_Q w^-p')^(1/p')."""
    _require_ap_range(space)
    a, b = family if family is not None else dyadic_family(K)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p, q = space.p, space.conjugate
    log_len = np.log(b - a)
    w = space.weight
    avg_p = log_weighted_integral(w, p, a, b) - log_len
    avg_q = log_weighted_integral(w, -q, a, b) - log_len
    return _ap_from_logs(avg_p / p + avg_q / q, a, b, None if family is not None else K)


def ax_constant(space: SpaceSpec, K: int = 10, family=None) -> APResult:
    """sup over Q of |Q|^-1 ||chi_Q||_{L^p(w)} ||chi_Q||_{L^p'(1/w)}."""
    _require_ap_range(space)
    a, b = family if family is not None else dyadic_family(K)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p, q = space.p, space.conjugate
    w = space.weight
    norm_x = log_chi_norm(w, p, a, b)
    norm_dual = log_weighted_integral(w, -q, a, b) / q  # ||chi_Q||_{L^q(1/w)}
    return _ap_from_logs(norm_x + norm_dual - np.log(b - a), a, b, None if family is not None else K)


def ap_convergence(space: SpaceSpec, Ks=(8, 9, 10)) -> list[APResult]:
    """A_p over nested dyadic families; the drift across K is the diagnostic."""
    return [ap_constant(space, K) for K in Ks]


# ---------------------------------------------------------------------------
# Lofstrom triviality ratio


def log_lofstrom_ratio(weight: Weight, x0: float, eps: float, k: int) -> float:
    if x0 == 0:
        raise ValueError("x0 must be nonzero")
    if not 0 < eps < abs(x0) / 2:
        raise ValueError("need 0 < eps < |x0| / 2")
    if k < 1:
        raise ValueError("k must be positive")
    xk = (k + 1) * x0
    t = np.linspace(-eps, eps, 129)  # step eps / 64
    num = weight.log(xk + t)
    den = weight.log(xk - x0 + t)
    return float(np.min(num) - np.max(den))


def lofstrom_ratio(weight: Weight, x0: float, eps: float, k: int) -> float:
    """inf over sampled |x|, |y| <= eps of w(x_k + x) / w(x_k - x0 + y), x_k = (k+1) x0."""
    lr = log_lofstrom_ratio(weight, x0, eps, k)
    return math.inf if lr > 709.0 else math.exp(lr)
