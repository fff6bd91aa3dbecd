"""Mollifiers, the Lebesgue-point integral, L^2 approximation, weighted Young checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bump import bump
from .grid import Grid, SampledFunction, convolve
from .norms import SpaceSpec, weighted_lp_norm
from .weights import Exp, PhiExp, Weight


class ResolutionError(ValueError):
    pass


class HypothesisViolation(ValueError):
    def __init__(self, x: float, y: float, value: float):
        self.x, self.y, self.value = x, y, value
        super().__init__(f"w*(y) w(x - y) / w(x) = {value:.6g} < 1 at x = {x:.6g}, y = {y:.6g}")


def mollifier(j: int, grid: Grid) -> SampledFunction:
    """j rho(j x) sampled and rescaled so that h * sum = 1."""
    if j <= 0:
        raise ValueError("mollifier index must be positive")
    if grid.h > 1.0 / (8 * j):
        raise ResolutionError(f"h = {grid.h:g} does not resolve support 1/{j}; need h <= {1 / (8 * j):g}")
    vals = j * bump(j * grid.x)
    return SampledFunction(grid, vals / (grid.h * vals.sum()))


# ---------------------------------------------------------------------------
# Lebesgue-point integral


def psi_decay_constant(psi: SampledFunction) -> float:
    """Smallest C with |psi(t)| <= C (1 + |t|)^-2 on the sampled window."""
    return float(np.max(np.abs(psi.values) * (1.0 + np.abs(psi.x)) ** 2))


def check_psi_decay(psi: SampledFunction, tail_fraction: float = 1e-6) -> float:
    """Fit C on the inner half of the window and require the outer half to obey it.

    Also requires the samples at the window edge to be negligible, so that
    truncating psi to the window loses at most ``tail_fraction`` of its mass.
    """
    t = np.abs(psi.x)
    v = np.abs(psi.values)
    inner = t <= psi.grid.L / 2
    C = float(np.max(v[inner] * (1.0 + t[inner]) ** 2))
    scaled = v[~inner] * (1.0 + t[~inner]) ** 2
    if scaled.size and np.max(scaled) > C * (1 + 1e-9):
        raise ValueError("psi does not decay like (1 + |xi|)^-2 on its window")
    edge = t >= psi.grid.L * 0.95
    mass = psi.grid.h * v.sum()
    if psi.grid.h * v[edge].sum() > tail_fraction * mass:
        raise ValueError("psi is not negligible at the edge of its window; widen the grid")
    return C


def lebesgue_point_integral(a, eta: float, psi: SampledFunction, delta: float) -> float:
    """I(delta) = int |a(xi) - a(eta)| |psi_delta(eta - xi)| dxi, psi_delta(t) = psi(t/delta)/delta.

    ``psi`` is sampled on a grid whose nodes t_n play the role of the
    rescaled variable (eta - xi)/delta, so no interpolation is involved:
    I = h sum_n |a(eta - delta t_n) - a(eta)| |psi(t_n)|.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    t = psi.x
    base = np.asarray(a(np.array([float(eta)])))[0]
    diff = np.abs(np.asarray(a(eta - delta * t)) - base)
    return float(psi.grid.h * np.sum(diff * np.abs(psi.values)))


def lebesgue_sequence(a, eta: float, psi: SampledFunction, delta0: float = 1.0, halvings: int = 3):
    check_psi_decay(psi)
    return [lebesgue_point_integral(a, eta, psi, delta0 / 2 ** i) for i in range(halvings + 1)]


# ---------------------------------------------------------------------------
# bounded L^2 approximation


@dataclass(frozen=True)
class ApproxStage:
    j: int
    R: float
    v: SampledFunction = field(repr=False)
    l2_error: float
    weighted_norm: float


@dataclass(frozen=True)
class ApproxSequence:
    stages: tuple
    u_l2: float
    u_weighted: float
    window: int = 5

    @property
    def limsup_proxy(self) -> float:
        """Max weighted norm over the last ``window`` stages."""
        return max(s.weighted_norm for s in self.stages[-self.window:])


def _truncation_radius(u: SampledFunction, target: float) -> float:
    """Smallest node radius R with ||u chi_{|x| > R}||_2 <= target (bisection)."""
    x = np.abs(u.x)
    mass = np.abs(u.values) ** 2 * u.grid.h
    radii = np.unique(x)

    def tail(R):
        return math.sqrt(mass[x > R].sum())

    lo, hi = 0, radii.size - 1
    if tail(radii[lo]) <= target:
        return float(radii[lo])
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail(radii[mid]) <= target:
            hi = mid
        else:
            lo = mid
    return float(radii[hi])


def bounded_l2_approx_sequence(u: SampledFunction, weight: Weight, stages: int, p: float = 2.0,
                               tail_target=lambda j: 4.0 ** -j, window: int = 5) -> ApproxSequence:
    """v_j = rho_j * (chi_{B(0, R_j)} u) for j = 1..stages.

    R_j is the smallest grid radius whose L^2 tail is below ``tail_target(j)``.
    """
    if not weight.continuous:
        raise ValueError(
            f"{weight.format()} is not continuous; for discontinuous weights of Cantor type "
            "bounded L^2 approximation can fail, so the construction is refused"
        )
    if stages < 1:
        raise ValueError("need at least one stage")
    space = SpaceSpec(p, weight)
    grid = u.grid
    x = grid.x
    out = []
    for j in range(1, stages + 1):
        R = _truncation_radius(u, tail_target(j))
        cut = SampledFunction(grid, np.where(np.abs(x) <= R, u.values, 0.0))
        v = convolve(mollifier(j, grid), cut, warn=False)
        outside = np.abs(x) > R + 1.0 / j + grid.h
        assert not np.any(np.abs(v.values[outside]) > 1e-12 * (1 + np.max(np.abs(v.values))))
        out.append(ApproxStage(j, R, v, (u - v).l2_norm(), weighted_lp_norm(v, space)))
    return ApproxSequence(tuple(out), u.l2_norm(), weighted_lp_norm(u, space), window)


# ---------------------------------------------------------------------------
# weighted Young inequality


@dataclass(frozen=True)
class YoungResult:
    lhs: float
    rhs: float
    holds: bool


PRESETS = ("w1", "w2")


def preset_weights(name: str, c: float = 1.0):
    """(w_star, w, omega) for the two exponential presets."""
    if name == "w1":
        return Exp(c), Exp(c), (-math.inf, math.inf)
    if name == "w2":
        return PhiExp(c), PhiExp(c), (-math.inf, 0.0)
    raise ValueError(f"unknown preset {name!r}; expected one of {PRESETS}")


def verify_young_hypothesis(w_star: Weight, w: Weight, omega, grid: Grid, n: int = 128):
    """Check w*(y) w(x - y) / w(x) >= 1 on an n x n lattice with y in omega."""
    lo, hi = max(omega[0], -grid.L), min(omega[1], grid.L)
    if lo > hi:
        raise ValueError("support constraint does not meet the grid window")
    ys = np.linspace(lo, hi, n)
    xs = np.linspace(-grid.L, grid.L, n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    val = w_star.log(Y) + w.log(X - Y) - w.log(X)
    i = np.unravel_index(np.argmin(val), val.shape)
    if val[i] < -1e-12:
        raise HypothesisViolation(float(X[i]), float(Y[i]), float(math.exp(val[i])))


def weighted_young_check(kappa: SampledFunction, f: SampledFunction, w_star: Weight | None = None,
                         w: Weight | None = None, p: float = 2.0, omega=None,
                         preset: str | None = None, c: float = 1.0) -> YoungResult:
    """||kappa * f||_{L^p(w)} <= ||kappa||_{L^1(w*)} ||f||_{L^p(w)} at the grid level.

    The presets are exp(c x) on the line and exp(c phi(x)) with supports in
    x <= 0; for these w*(y) w(x - y) / w(x) >= 1 holds identically and the
    lattice check is skipped.
    """
    if preset is not None:
        w_star, w, omega = preset_weights(preset, c)
    elif w_star is None or w is None:
        raise ValueError("give both weights or a preset")
    else:
        omega = omega or (-math.inf, math.inf)
        verify_young_hypothesis(w_star, w, omega, kappa.grid)
    supp = kappa.support_indices()
    if supp.size:
        xs = kappa.x[supp]
        if xs.min() < omega[0] - 1e-12 or xs.max() > omega[1] + 1e-12:
            raise ValueError(f"kappa is supported in [{xs.min():g}, {xs.max():g}], outside {omega}")
    lhs = weighted_lp_norm(convolve(kappa, f, warn=False, method="direct"), SpaceSpec(p, w))
    rhs = weighted_lp_norm(kappa, SpaceSpec(1.0, w_star)) * weighted_lp_norm(f, SpaceSpec(p, w))
    return YoungResult(lhs, rhs, bool(lhs <= rhs * (1 + 1e-6) + 1e-9))
