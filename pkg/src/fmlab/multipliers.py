"""Multiplier operators on the grid, probe certificates and kernel bounds.

A symbol ``a`` acts by ``f -> F^-1 (a F f)``. Lower bounds on the multiplier
norm come from Rayleigh quotients of modulated plateau bumps; upper bounds
come from the weighted L^1 norm of the convolution kernel.
"""
from __future__ import annotations

import cmath
import math
import warnings
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .bump import bump, bump_cdf, bump_transform
from .grid import Grid, SampledFunction, Spectrum, convolve, forward_transform, inverse_transform
from .norms import SpaceSpec, ball_indicator_norm, weak_doubling_witness, weighted_lp_norm
from .weights import Exp, PhiExp, SubExp, Weight


class SymbolError(ValueError):
    pass


class ProbeSupportError(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    def __init__(self, residual: float, steps: int):
        self.residual = residual
        self.steps = steps
        super().__init__(f"power iteration stalled after {steps} steps, residual {residual:.3g}")


class CalibrationError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# symbols


class MultiplierSymbol:
    tag = "symbol"

    def __call__(self, xi):
        raise NotImplementedError

    def evaluate_on_grid(self, grid: Grid) -> np.ndarray:
        return np.broadcast_to(np.asarray(self(grid.xi), dtype=complex), (grid.N,)).copy()

    def sup_on_grid(self, grid: Grid) -> float:
        return float(np.max(np.abs(self.evaluate_on_grid(grid))))

    def __mul__(self, other: "MultiplierSymbol") -> "PointwiseProduct":
        return PointwiseProduct(self, other)

    def __pow__(self, m: int) -> "MultiplierSymbol":
        if m < 1:
            raise ValueError("only positive integer powers")
        out = self
        for _ in range(m - 1):
            out = PointwiseProduct(out, self)
        return out


@dataclass(frozen=True, eq=False)
class ConstantSymbol(MultiplierSymbol):
    c: complex = 1.0
    tag = "const"

    def __call__(self, xi):
        return np.full(np.shape(xi), complex(self.c))


@dataclass(frozen=True, eq=False)
class MollifierTransform(MultiplierSymbol):
    """F rho_j with rho_j(x) = j rho(j x)."""

    j: float = 1.0
    tag = "mollifier"

    def __call__(self, xi):
        return bump_transform(np.asarray(xi, dtype=float) / self.j).astype(complex)


@dataclass(frozen=True, eq=False)
class AMinusAlpha(MultiplierSymbol):
    """(xi + i0)^-alpha: |xi|^-alpha for xi > 0, |xi|^-alpha e^(-i pi alpha) for xi < 0.

    Unbounded at 0. On a grid the xi = 0 bin is evaluated at xi + i eps
    with eps = dxi / 2.
    """

    alpha: float = 0.5
    tag = "aminus"

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    def __call__(self, xi, eps: float = 0.0):
        xi = np.asarray(xi, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            # imaginary part +0 selects arg = pi on the negative axis
            return np.power(xi + 1j * eps, -self.alpha)

    def evaluate_on_grid(self, grid: Grid) -> np.ndarray:
        xi = grid.xi
        out = self(xi)
        zero = xi == 0
        out[zero] = self(xi[zero], eps=0.5 * grid.dxi)
        return out


@dataclass(frozen=True, eq=False)
class BandIndicator(MultiplierSymbol):
    """1 on the closed band [xi1, xi2]."""

    xi1: float = -1.0
    xi2: float = 1.0
    tag = "band"

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        return ((xi >= self.xi1) & (xi <= self.xi2)).astype(complex)


@dataclass(frozen=True, eq=False)
class Modulation(MultiplierSymbol):
    """exp(-i xi y): translation by y."""

    y: float = 0.0
    tag = "mod"

    def __call__(self, xi):
        return np.exp(-1j * np.asarray(xi, dtype=float) * self.y)


@dataclass(frozen=True, eq=False)
class Lorentzian(MultiplierSymbol):
    """1 / (1 + (xi / scale)^2)."""

    scale: float = 1.0
    tag = "lorentz"

    def __call__(self, xi):
        u = np.asarray(xi, dtype=float) / self.scale
        return (1.0 / (1.0 + u * u)).astype(complex)


@dataclass(frozen=True, eq=False)
class PointwiseProduct(MultiplierSymbol):
    a: MultiplierSymbol
    b: MultiplierSymbol
    tag = "product"

    def __call__(self, xi):
        return np.asarray(self.a(xi)) * np.asarray(self.b(xi))

    def evaluate_on_grid(self, grid: Grid) -> np.ndarray:
        return self.a.evaluate_on_grid(grid) * self.b.evaluate_on_grid(grid)


@dataclass(frozen=True, eq=False)
class ShiftedSymbol(MultiplierSymbol):
    """xi -> a(xi + eta)."""

    a: MultiplierSymbol
    eta: float
    tag = "shifted"

    def __call__(self, xi):
        return self.a(np.asarray(xi, dtype=float) + self.eta)


@dataclass(frozen=True, eq=False)
class FunctionSymbol(MultiplierSymbol):
    func: object
    name: str = "function"
    tag = "function"

    def __call__(self, xi):
        return np.asarray(self.func(np.asarray(xi, dtype=float)), dtype=complex)


@dataclass(frozen=True, eq=False)
class TabulatedSymbol(MultiplierSymbol):
    """Values given at the frequencies of one grid only."""

    grid: Grid
    values: np.ndarray = field(repr=False)
    tag = "table"

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.grid.N,):
            raise ValueError("table length must match the grid")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        k = np.rint(xi / self.grid.dxi).astype(int) + self.grid.N // 2
        if np.any((k < 0) | (k >= self.grid.N)) or not np.allclose(
                (k - self.grid.N // 2) * self.grid.dxi, xi, rtol=0, atol=1e-9 * self.grid.dxi):
            raise SymbolError("tabulated symbol queried off its frequency grid")
        return self.values[k]

    def evaluate_on_grid(self, grid: Grid) -> np.ndarray:
        if grid == self.grid:
            return np.array(self.values)
        return self(grid.xi)


_SYMBOLS = {
    "const": (ConstantSymbol, {"c": 1.0}),
    "mollifier": (MollifierTransform, {"j": 1.0}),
    "aminus": (AMinusAlpha, {"alpha": 0.5}),
    "band": (BandIndicator, {"lo": -1.0, "hi": 1.0}),
    "mod": (Modulation, {"y": 0.0}),
    "lorentz": (Lorentzian, {"scale": 1.0}),
}

_SYMBOL_RE = re.compile(r"^\s*([a-z]+)\s*(?::(.*))?$")


def parse_symbol_spec(text: str) -> MultiplierSymbol:
    """``name[:key=value,...]`` with names const, mollifier, aminus, band, mod, lorentz."""
    m = _SYMBOL_RE.match(text)
    if not m or m.group(1) not in _SYMBOLS:
        raise SymbolError(f"unknown symbol {text!r}; expected one of {', '.join(_SYMBOLS)}")
    cls, defaults = _SYMBOLS[m.group(1)]
    params = dict(defaults)
    for item in filter(None, (s.strip() for s in (m.group(2) or "").split(","))):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in defaults:
            raise SymbolError(f"bad parameter {item!r} for {m.group(1)}; keys: {', '.join(defaults)}")
        try:
            params[key] = float(val)
        except ValueError:
            raise SymbolError(f"parameter {key} needs a number, got {val.strip()!r}") from None
    return cls(*params.values())


# ---------------------------------------------------------------------------
# operators


def _symbol_values(a: MultiplierSymbol, grid: Grid) -> np.ndarray:
    vals = a.evaluate_on_grid(grid)
    if not np.all(np.isfinite(vals)):
        bad = grid.xi[~np.isfinite(vals)]
        raise SymbolError(f"symbol is not finite at xi = {bad[:4].tolist()}")
    return vals


def apply_multiplier(a: MultiplierSymbol, f: SampledFunction) -> SampledFunction:
    spec = forward_transform(f)
    return inverse_transform(Spectrum(f.grid, _symbol_values(a, f.grid) * spec.values))


def multiplier_matrix(a: MultiplierSymbol, grid: Grid) -> np.ndarray:
    """Dense matrix of f -> F^-1 a F f on the grid samples."""
    vals = _symbol_values(a, grid)
    # forward then inverse: the h factors and the (-1)^k phases cancel
    col = np.fft.ifft(np.fft.ifftshift(vals))
    idx = (np.arange(grid.N)[:, None] - np.arange(grid.N)[None, :]) % grid.N
    return col[idx]


def subgrid(grid: Grid, n_small: int) -> Grid:
    """Grid with the same spacing and ``n_small`` nodes centered on 0."""
    if n_small >= grid.N:
        return grid
    return Grid(grid.L * n_small / grid.N, n_small)


def discrete_l2_operator_norm(a: MultiplierSymbol, weight: Weight, grid: Grid,
                              n_small: int = 512, method: str = "svd",
                              tol: float = 1e-10, max_steps: int = 10_000, seed: int = 0) -> float:
    """Largest singular value of M_w F^-1 diag(a) F M_w^-1 on weighted l^2.

    Runs on ``grid`` itself when it has at most ``n_small`` nodes, otherwise
    on the centered subgrid with the same spacing.
    """
    if n_small > 512:
        raise ValueError("dense computation is limited to 512 nodes")
    g = subgrid(grid, n_small)
    T = multiplier_matrix(a, g)
    lw = weight.log(g.x)
    with np.errstate(over="raise"):
        try:
            M = T * np.exp(lw[:, None] - lw[None, :])
        except FloatingPointError:
            raise OverflowError("weight ratio overflows on this grid") from None
    if method == "svd":
        return float(np.linalg.norm(M, 2))
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(g.N) + 1j * rng.standard_normal(g.N)
    v /= np.linalg.norm(v)
    lam = 0.0
    resid = math.inf
    for step in range(1, max_steps + 1):
        u = M.conj().T @ (M @ v)
        new = float(np.real(np.vdot(v, u)))
        nu = np.linalg.norm(u)
        if nu == 0:
            return 0.0
        resid = float(np.linalg.norm(u - new * v) / nu)
        v = u / nu
        if abs(new - lam) <= tol * new and resid <= math.sqrt(tol):
            return math.sqrt(new)
        lam = new
    raise ConvergenceError(resid, max_steps)


# ---------------------------------------------------------------------------
# plateau bump and probes


@dataclass(frozen=True)
class PlateauBump:
    """Even, 1 on [-1, 1], 0 outside (-rho, rho).

    Indicator of [-c, c], c = (1 + rho) / 2, convolved with the unit bump
    scaled to half-width s = (rho - 1) / 2.
    """

    rho: float = 2.0

    def __post_init__(self):
        if not self.rho > 1:
            raise ValueError("rho must exceed 1")

    @property
    def _cs(self):
        return 0.5 * (1.0 + self.rho), 0.5 * (self.rho - 1.0)

    def __call__(self, x):
        c, s = self._cs
        x = np.asarray(x, dtype=float)
        return bump_cdf((x + c) / s) - bump_cdf((x - c) / s)

    def transform(self, xi):
        c, s = self._cs
        xi = np.asarray(xi, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            box = np.where(xi == 0, 2.0 * c, 2.0 * np.sin(c * xi) / xi)
        return box * bump_transform(s * xi)


MIN_TRANSITION_SAMPLES = 16


def _check_transition(rho: float, width_scale: float, h: float):
    n = (rho - 1.0) * width_scale / h
    if n < MIN_TRANSITION_SAMPLES:
        raise ValueError(
            f"grid too coarse: {n:.1f} samples across the transition band, need {MIN_TRANSITION_SAMPLES}"
        )


def smooth_plateau_bump(rho: float, grid: Grid) -> SampledFunction:
    if not rho > 1:
        raise ValueError("rho must exceed 1")
    _check_transition(rho, 1.0, grid.h)
    return SampledFunction(grid, PlateauBump(rho)(grid.x))


@dataclass(frozen=True)
class ProbeCertificate:
    eta: float
    delta: float
    y: float
    rho: float
    lower_bound: float
    doubling_correction: float

    def __post_init__(self):
        assert self.lower_bound >= 0
        assert self.doubling_correction >= 1 - 1e-12
        assert self.rho > 1 and self.delta > 0


def probe_function(grid: Grid, eta: float, delta: float, y: float, rho: float = 2.0) -> SampledFunction:
    """exp(i eta x) phi(delta (x - y)); its transform concentrates at +eta."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if abs(y) + rho / delta > grid.L / 2 + 1e-12:
        raise ProbeSupportError(
            f"probe support B({y}, {rho / delta:g}) leaves [-L/2, L/2] = [{-grid.L / 2:g}, {grid.L / 2:g}]"
        )
    if abs(eta) >= grid.nyquist:
        raise ProbeSupportError(f"eta = {eta} beyond the Nyquist frequency {grid.nyquist:g}")
    _check_transition(rho, 1.0 / delta, grid.h)
    x = grid.x
    return SampledFunction(grid, np.exp(1j * eta * x) * PlateauBump(rho)(delta * (x - y)))


def probe_lower_bound(a: MultiplierSymbol, space: SpaceSpec, eta: float, delta: float, y: float,
                      rho: float = 2.0, grid: Grid | None = None,
                      kernel: "KernelSpec | None" = None) -> ProbeCertificate:
    """Rayleigh quotient ||W_a f|| / ||f|| in ``space`` for one modulated plateau bump.

    With ``kernel`` set, W_a f is computed by aperiodic convolution with the
    sampled kernel instead of the periodic FFT product.
    """
    grid = grid or Grid(64.0, 4096)
    f = probe_function(grid, eta, delta, y, rho)
    g = kernel.convolve(f) if kernel is not None else apply_multiplier(a, f)
    # FFT round-off fills the window at ~eps max|g|; increasing weights would
    # amplify it. Dropping it only lowers the quotient, so the bound stays valid.
    vals = g.values
    floor = np.finfo(float).eps * grid.N * float(np.max(np.abs(vals), initial=0.0))
    if floor > 0:
        g = SampledFunction(grid, np.where(np.abs(vals) <= floor, 0.0, vals))
    den = weighted_lp_norm(f, space)
    assert den > 0
    lb = weighted_lp_norm(g, space) / den
    corr = ball_indicator_norm(space, y, rho / delta) / ball_indicator_norm(space, y, 1.0 / delta)
    return ProbeCertificate(float(eta), float(delta), float(y), float(rho), float(lb), float(corr))


def default_delta_schedule(grid: Grid, rho: float = 2.0, start: float = 1.0):
    """Halve delta from ``start`` while the probe support fits in [-L/2, L/2]."""
    out = []
    d = start
    floor = max(8.0 / grid.L, 2.0 * rho / grid.L)
    while d >= floor - 1e-15:
        out.append(d)
        d /= 2.0
    return out


@dataclass(frozen=True)
class SweepRow:
    eta: float
    symbol_abs: float
    lower_bound: float
    delta: float
    y: float
    doubling_correction: float


@dataclass(frozen=True)
class SweepReport:
    best: float
    rows: tuple
    certificates: tuple = field(repr=False)


def _centers(y_rule, space, delta, rho, grid):
    if isinstance(y_rule, str):
        if y_rule == "zero":
            return [0.0]
        if y_rule == "witness":
            if not isinstance(space.weight, SubExp):
                return [0.0]
            rep = weak_doubling_witness(space, rho)
            room = grid.L / 2 - rho / delta
            return [pt.y for pt in rep.points if pt.y <= room] or [0.0]
        raise ValueError(f"unknown y rule {y_rule!r}")
    return [float(v) for v in y_rule]


def certificate_sweep(a: MultiplierSymbol, space: SpaceSpec, eta_list, delta_schedule=None,
                      y_rule="zero", rho: float = 2.0, grid: Grid | None = None,
                      kernel: "KernelSpec | None" = None) -> SweepReport:
    """Best probe lower bound per eta over the delta schedule and centers."""
    grid = grid or Grid(64.0, 4096)
    deltas = list(delta_schedule) if delta_schedule is not None else default_delta_schedule(grid, rho)
    etas = [float(e) for e in eta_list]
    if not deltas or not etas:
        raise ValueError("schedules must be nonempty")
    rows, certs = [], []
    for eta in etas:
        best = None
        for d in deltas:
            for y in _centers(y_rule, space, d, rho, grid):
                if abs(y) + rho / d > grid.L / 2:
                    continue
                c = probe_lower_bound(a, space, eta, d, y, rho, grid, kernel)
                certs.append(c)
                if best is None or c.lower_bound > best.lower_bound:
                    best = c
        if best is None:
            raise ProbeSupportError("no probe in the schedule fits the grid")
        rows.append(SweepRow(eta, float(abs(np.asarray(a(np.array([eta])))[0])), best.lower_bound,
                             best.delta, best.y, best.doubling_correction))
    return SweepReport(max(r.lower_bound for r in rows), tuple(rows), tuple(certs))


# ---------------------------------------------------------------------------
# kernels


def k_alpha(alpha: float) -> complex:
    """Constant with k_alpha F(f_-) = (xi + i0)^-alpha, f_-(x) = |x|^(alpha-1) on x < 0."""
    return cmath.exp(-0.5j * math.pi * alpha) / special.gamma(alpha)


@dataclass(frozen=True)
class KernelSpec:
    """F^-1 a, either sampled on a grid or the analytic k_alpha |x|^(alpha-1) 1_{x<0}."""

    sampled: SampledFunction | None = None
    alpha: float | None = None
    constant: complex | None = None

    def __post_init__(self):
        if (self.sampled is None) == (self.alpha is None):
            raise ValueError("give exactly one of a sampled kernel or alpha")
        if self.alpha is not None:
            if not 0 < self.alpha < 1:
                raise ValueError("alpha must lie in (0, 1)")
            if self.constant is None:
                object.__setattr__(self, "constant", k_alpha(self.alpha))

    @classmethod
    def a_minus_alpha(cls, alpha: float) -> "KernelSpec":
        return cls(alpha=alpha)

    @property
    def analytic(self) -> bool:
        return self.alpha is not None

    def cell_weights(self, grid: Grid) -> np.ndarray:
        """K_j for j = 1..N: weight of the cell [-j h, -(j-1) h).

        The first cell is integrated exactly; the others use the left
        endpoint, where both |x|^(alpha-1) and any increasing weight are
        smallest, so weighted sums never exceed the continuous kernel norm.
        """
        if not self.analytic:
            raise TypeError("cell weights exist for the analytic kernel only")
        h, a = grid.h, self.alpha
        j = np.arange(1, grid.N + 1, dtype=float)
        out = self.constant * h * (j * h) ** (a - 1.0)
        out[0] = self.constant * h ** a / a
        return out

    def convolve(self, f: SampledFunction) -> SampledFunction:
        """Aperiodic (W f)(x_n) = sum_j K_j f(x_n + j h), zero outside the window."""
        if not self.analytic:
            return convolve(self.sampled, f, warn=False)
        n = f.grid.N
        K = self.cell_weights(f.grid)
        m = 2 * n
        # correlation via convolution with the reversed signal
        spec = np.fft.fft(np.r_[0.0, K, np.zeros(m - n - 1)], m) * np.fft.fft(f.values[::-1], m)
        out = np.fft.ifft(spec)[:n][::-1].copy()
        # the kernel lives on x < 0, so W f vanishes right of supp f; round-off
        # there would be amplified by increasing weights
        supp = f.support_indices()
        out[(supp[-1] + 1 if supp.size else 0):] = 0.0
        return SampledFunction(f.grid, out)


def kernel_l1_upper_bound(k: KernelSpec, weight: Weight, caveat: bool = False) -> float:
    """||F^-1 a||_{L^1(w)}; +inf when divergent.

    Only exponential-type weights (Exp, PhiExp) satisfy the submultiplicative
    hypothesis under which this dominates the multiplier norm; any other
    weight requires ``caveat=True``.
    """
    if not isinstance(weight, (Exp, PhiExp)) and not caveat:
        raise ValueError(f"kernel bound needs an Exp or PhiExp weight, got {weight.format()}")
    if not k.analytic:
        f = k.sampled
        logw = weight.log(f.x)
        vals = np.abs(f.values)
        nz = vals > 0
        if not np.any(nz):
            return 0.0
        return float(f.grid.h * np.sum(vals[nz] * np.exp(logw[nz])))
    mod = abs(k.constant)
    a = k.alpha
    if isinstance(weight, (Exp, PhiExp)):
        # on x <= 0 both weights are exp(c x)
        if weight.c <= 0:
            return math.inf
        return mod * special.gamma(a) / weight.c ** a
    with warnings.catch_warnings():
        # quad signals a divergent tail only through this warning
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(lambda t: t ** (a - 1.0) * float(weight(-t)), 0.0, math.inf, limit=200)
        except integrate.IntegrationWarning:
            return math.inf
    return mod * val if math.isfinite(val) else math.inf


def _f_minus_transform(alpha: float, xi: float) -> complex:
    """int_0^inf t^(alpha-1) exp(i t xi) dt (conditionally convergent)."""
    w = abs(xi)
    re0, _ = integrate.quad(lambda t: math.cos(w * t), 0.0, 1.0, weight="alg", wvar=(alpha - 1.0, 0.0))
    im0, _ = integrate.quad(lambda t: math.sin(w * t), 0.0, 1.0, weight="alg", wvar=(alpha - 1.0, 0.0))
    re1, _ = integrate.quad(lambda t: t ** (alpha - 1.0), 1.0, math.inf, weight="cos", wvar=w)
    im1, _ = integrate.quad(lambda t: t ** (alpha - 1.0), 1.0, math.inf, weight="sin", wvar=w)
    val = complex(re0 + re1, im0 + im1)
    return val if xi > 0 else val.conjugate()


@dataclass(frozen=True)
class Calibration:
    constant: complex
    residual: float
    reference_xi: tuple


def calibrate_k_alpha(alpha: float, reference_xi=(-2.0, -1.0, 1.0, 2.0), max_residual: float = 1e-4) -> Calibration:
    """Least-squares k with k F(f_-)(xi) = (xi + i0)^-alpha at the reference frequencies."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    xs = np.array(reference_xi, dtype=float)
    F = np.array([_f_minus_transform(alpha, x) for x in xs])
    target = AMinusAlpha(alpha)(xs)
    k = complex(np.vdot(F, target) / np.vdot(F, F))
    resid = float(np.max(np.abs(k * F - target)))
    if resid > max_residual:
        raise CalibrationError(f"calibration residual {resid:.3g} exceeds {max_residual:g}")
    return Calibration(k, resid, tuple(float(x) for x in xs))


def mollifier_kernel(j: float, grid: Grid) -> KernelSpec:
    return KernelSpec(sampled=SampledFunction(grid, j * bump(j * grid.x)))


__all__ = [
    "AMinusAlpha", "BandIndicator", "Calibration", "CalibrationError", "ConstantSymbol",
    "ConvergenceError", "FunctionSymbol", "KernelSpec", "Lorentzian", "Modulation",
    "MollifierTransform", "MultiplierSymbol", "PlateauBump", "PointwiseProduct",
    "ProbeCertificate", "ProbeSupportError", "ShiftedSymbol", "SweepReport", "SweepRow",
    "SymbolError", "TabulatedSymbol", "apply_multiplier", "calibrate_k_alpha",
    "certificate_sweep", "default_delta_schedule", "discrete_l2_operator_norm", "k_alpha",
    "kernel_l1_upper_bound", "mollifier_kernel", "multiplier_matrix", "parse_symbol_spec",
    "probe_function", "probe_lower_bound", "smooth_plateau_bump", "subgrid",
]
