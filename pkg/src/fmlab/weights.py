"""Weight families, the fat Cantor set, and the weight DSL.

Every weight exposes ``__call__`` (vectorized pointwise value) and ``log``
(natural log, used throughout to keep exponential families finite).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import kernels


class WeightSpecError(ValueError):
    """Base class for DSL failures."""


class WeightSpecParseError(WeightSpecError):
    def __init__(self, text: str, offset: int, expected: list[str]):
        self.text = text
        self.offset = offset
        self.expected = list(expected)
        super().__init__(
            f"cannot parse weight spec {text!r} at byte {offset}: expected one of {', '.join(expected)}"
        )


class WeightSpecRangeError(WeightSpecError):
    pass


# ---------------------------------------------------------------------------
# fat Cantor set


MAX_CANTOR_DEPTH = 30
_MAX_MATERIALIZED_DEPTH = 20


@dataclass(frozen=True)
class FatCantorSet:
    """Smith-Volterra-Cantor construction stopped after ``depth`` rounds.

    Round k removes an open interval of length 4**-k from the middle of each
    of the 2**(k-1) surviving intervals. All surviving intervals at a round
    share one length, so membership and the cumulative measure are computed
    by descending the levels instead of scanning an interval list.
    """

    depth: int

    def __post_init__(self):
        if int(self.depth) != self.depth or self.depth < 0:
            raise ValueError(f"depth must be a nonnegative integer, got {self.depth}")
        if self.depth > MAX_CANTOR_DEPTH:
            raise OverflowError(f"depth {self.depth} exceeds the supported maximum {MAX_CANTOR_DEPTH}")

    @cached_property
    def level_lengths(self) -> tuple[Fraction, ...]:
        ell = [Fraction(1)]
        for k in range(1, self.depth + 1):
            ell.append((ell[-1] - Fraction(1, 4 ** k)) / 2)
        return tuple(ell)

    @property
    def measure(self) -> Fraction:
        return Fraction(1, 2) + Fraction(1, 2 ** (self.depth + 1))

    @cached_property
    def _tables(self):
        ell = np.array([float(v) for v in self.level_lengths])
        gap = np.array([0.0] + [4.0 ** -k for k in range(1, self.depth + 1)])
        mass = np.array([float(self.measure / 2 ** k) for k in range(self.depth + 1)])
        return ell, gap, mass

    def intervals(self) -> list[tuple[Fraction, Fraction]]:
        """Exact sorted interval list (only for depth <= 20)."""
        if self.depth > _MAX_MATERIALIZED_DEPTH:
            raise OverflowError(f"refusing to list 2**{self.depth} intervals")
        out = [(Fraction(0), Fraction(1))]
        for k in range(1, self.depth + 1):
            ell = self.level_lengths[k]
            gap = Fraction(1, 4 ** k)
            nxt = []
            for a, b in out:
                nxt.append((a, a + ell))
                nxt.append((a + ell + gap, b))
            out = nxt
        return out

    def contains(self, x) -> np.ndarray:
        ell, gap, _ = self._tables
        return np.asarray(kernels.cantor_membership(np.asarray(x, dtype=float), ell, gap), dtype=bool)

    def cdf(self, x) -> np.ndarray:
        """Lebesgue measure of the set intersected with [0, x]."""
        ell, gap, mass = self._tables
        return np.asarray(kernels.cantor_cdf(np.asarray(x, dtype=float), ell, gap, mass))

    def measure_in(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return np.maximum(self.cdf(b) - self.cdf(np.minimum(a, b)), 0.0)


def build_fat_cantor(depth: int) -> FatCantorSet:
    return FatCantorSet(depth)


@dataclass(frozen=True)
class BSequence:
    """Values b_m in (0, 1), m = 1, 2, ..., decreasing to 0.

    ``kind="harmonic"``: b_m = 1 / (m + shift); ``kind="geometric"``: b_m = ratio**m.
    """

    kind: str = "harmonic"
    shift: int = 1
    ratio: float = 0.5

    def __post_init__(self):
        if self.kind == "harmonic":
            if int(self.shift) != self.shift or self.shift < 1:
                raise WeightSpecRangeError(f"harmonic shift must be a positive integer, got {self.shift}")
        elif self.kind == "geometric":
            if not 0 < self.ratio < 1:
                raise WeightSpecRangeError(f"geometric ratio must lie in (0, 1), got {self.ratio}")
        else:
            raise WeightSpecRangeError(f"unknown b-sequence kind {self.kind!r}")

    def __call__(self, m: int):
        if m < 1:
            raise ValueError("b_m is defined for m >= 1")
        if self.kind == "harmonic":
            return Fraction(1, m + int(self.shift))
        return self.ratio ** m

    def values(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        if self.kind == "harmonic":
            return 1.0 / (m + self.shift)
        return self.ratio ** m


# ---------------------------------------------------------------------------
# weight families


class Weight:
    """Common interface. Subclasses are frozen dataclasses."""

    name = ""
    continuous = True
    kernel_code: int | None = None

    def log(self, x) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x):
        return np.exp(self.log(x))

    def params(self) -> dict:
        return dict(self.__dict__)

    def kernel_params(self) -> tuple[float, float]:
        raise NotImplementedError

    def format(self) -> str:
        return format_weight_spec(self)

    def __str__(self):
        return self.format()


@dataclass(frozen=True)
class Constant(Weight):
    c: float = 1.0
    name = "const"
    kernel_code = kernels.CONSTANT

    def __post_init__(self):
        _require(self.c > 0 and math.isfinite(self.c), "const: c must be positive")

    def log(self, x):
        return np.full(np.shape(x), math.log(self.c))

    def kernel_params(self):
        return float(self.c), 0.0


@dataclass(frozen=True)
class PowerOnePlus(Weight):
    """(1 + |x|)**alpha"""

    alpha: float
    name = "power"
    kernel_code = kernels.POWER_ONE_PLUS

    def __post_init__(self):
        _require(math.isfinite(self.alpha), "power: alpha must be finite")

    def log(self, x):
        return self.alpha * np.log1p(np.abs(x))

    def kernel_params(self):
        return float(self.alpha), 0.0


@dataclass(frozen=True)
class PowerAbs(Weight):
    """|x|**gamma; the value at the single point x = 0 is fixed to 1."""

    gamma: float
    name = "powerabs"
    kernel_code = kernels.POWER_ABS

    def __post_init__(self):
        _require(math.isfinite(self.gamma), "powerabs: gamma must be finite")

    @property
    def continuous(self):
        # vanishes or blows up at 0 unless gamma == 0
        return self.gamma == 0

    def log(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.gamma * np.log(ax)
        return np.where(ax == 0.0, 0.0, out)

    def kernel_params(self):
        return float(self.gamma), 0.0


@dataclass(frozen=True)
class Exp(Weight):
    """exp(c x)"""

    c: float = 1.0
    name = "exp"
    kernel_code = kernels.EXP

    def __post_init__(self):
        _require(self.c > 0, "exp: c must be positive")

    def log(self, x):
        return self.c * np.asarray(x, dtype=float)

    def kernel_params(self):
        return float(self.c), 0.0


@dataclass(frozen=True)
class ExpAbs(Weight):
    """exp(c |x|)"""

    c: float = 1.0
    name = "expabs"
    kernel_code = kernels.EXP_ABS

    def __post_init__(self):
        _require(self.c > 0, "expabs: c must be positive")

    def log(self, x):
        return self.c * np.abs(x)

    def kernel_params(self):
        return float(self.c), 0.0


@dataclass(frozen=True)
class SubExp(Weight):
    """exp(c |x|**beta), 0 < beta <= 1"""

    c: float = 1.0
    beta: float = 0.5
    name = "subexp"
    kernel_code = kernels.SUB_EXP

    def __post_init__(self):
        _require(self.c > 0, "subexp: c must be positive")
        _require(0 < self.beta <= 1, "subexp: beta must lie in (0, 1]")

    def log(self, x):
        return self.c * np.abs(x) ** self.beta

    def growth_rate(self, r):
        """phi(r) = c r**(beta - 1), so that w(x) = exp(|x| phi(|x|))."""
        return self.c * np.asarray(r, dtype=float) ** (self.beta - 1.0)

    def kernel_params(self):
        return float(self.c), float(self.beta)


@dataclass(frozen=True)
class SuperExp(Weight):
    """exp(|x|**alpha1) for x < 0, exp(x**alpha2) for x >= 0; both exponents > 1."""

    alpha1: float = 2.0
    alpha2: float = 2.0
    name = "superexp"
    kernel_code = kernels.SUPER_EXP

    def __post_init__(self):
        _require(self.alpha1 > 1 and self.alpha2 > 1, "superexp: alpha1 and alpha2 must exceed 1")

    def log(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        return np.where(x < 0, ax ** self.alpha1, ax ** self.alpha2)

    def kernel_params(self):
        return float(self.alpha1), float(self.alpha2)


def phi_default(x):
    """x for x <= 0 and x + x**2 for x >= 0; difference quotients on [0, inf) are >= 1."""
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0, x, x + x * x)


@dataclass(frozen=True)
class PhiExp(Weight):
    """exp(c phi(x)) with the default phi."""

    c: float = 1.0
    name = "phiexp"
    kernel_code = kernels.PHI_EXP

    def __post_init__(self):
        _require(self.c > 0, "phiexp: c must be positive")

    def log(self, x):
        return self.c * phi_default(x)

    def kernel_params(self):
        return float(self.c), 0.0


@dataclass(frozen=True)
class CantorFlat(Weight):
    """1 on the depth-d fat Cantor set G, 2 elsewhere."""

    depth: int = 8
    name = "cantor"
    continuous = False

    def __post_init__(self):
        _require(int(self.depth) == self.depth and 0 <= self.depth <= MAX_CANTOR_DEPTH,
                 f"cantor: depth must be an integer in [0, {MAX_CANTOR_DEPTH}]")

    @cached_property
    def set(self) -> FatCantorSet:
        return FatCantorSet(int(self.depth))

    def log(self, x):
        return np.where(self.set.contains(x), 0.0, math.log(2.0))

    def __call__(self, x):
        return np.where(self.set.contains(x), 1.0, 2.0)

    def params(self):
        return {"depth": self.depth}


@dataclass(frozen=True)
class CantorSeq(Weight):
    """b_m on G_m = 2m + G (m >= 1), 1 elsewhere on x >= 0, extended evenly."""

    depth: int = 8
    b: BSequence = BSequence()
    name = "cantorseq"
    continuous = False

    def __post_init__(self):
        _require(int(self.depth) == self.depth and 0 <= self.depth <= MAX_CANTOR_DEPTH,
                 f"cantorseq: depth must be an integer in [0, {MAX_CANTOR_DEPTH}]")

    @cached_property
    def set(self) -> FatCantorSet:
        return FatCantorSet(int(self.depth))

    def copy_index(self, x) -> np.ndarray:
        """m >= 1 when |x| lies in G_m, else 0."""
        ax = np.abs(np.asarray(x, dtype=float))
        m = np.floor(ax / 2.0)
        inside = (m >= 1) & self.set.contains(ax - 2.0 * m)
        return np.where(inside, m, 0).astype(int)

    def __call__(self, x):
        m = self.copy_index(x)
        return np.where(m > 0, self.b.values(np.maximum(m, 1)), 1.0)

    def log(self, x):
        return np.log(self(x))

    def params(self):
        out = {"depth": self.depth}
        if self.b.kind == "harmonic":
            out["shift"] = self.b.shift
        else:
            out["ratio"] = self.b.ratio
        return out


def _require(ok, message):
    if not ok:
        raise WeightSpecRangeError(message)


def eval_weight(spec: Weight, x):
    """Pointwise value of the weight at x (scalar or array)."""
    out = spec(x)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# DSL:  name(":" key "=" number ("," key "=" number)*)?


_NAMES = {
    "const": (Constant, ("c",)),
    "power": (PowerOnePlus, ("alpha",)),
    "powerabs": (PowerAbs, ("gamma",)),
    "exp": (Exp, ("c",)),
    "expabs": (ExpAbs, ("c",)),
    "subexp": (SubExp, ("c", "beta")),
    "superexp": (SuperExp, ("alpha1", "alpha2")),
    "phiexp": (PhiExp, ("c",)),
    "cantor": (CantorFlat, ("depth",)),
    "cantorseq": (CantorSeq, ("depth", "shift", "ratio")),
}
_REQUIRED = {"power": ("alpha",), "powerabs": ("gamma",)}
_NAME_RE = re.compile(r"[a-z]+")
_KEY_RE = re.compile(r"[a-z][a-z0-9]*")
_NUM_RE = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")

GRAMMAR = (
    'name(":" key "=" number ("," key "=" number)*)?  with name in '
    + ", ".join(_NAMES)
)


def parse_weight_spec(text: str) -> Weight:
    m = _NAME_RE.match(text)
    if not m or m.group() not in _NAMES:
        raise WeightSpecParseError(text, 0, sorted(_NAMES))
    name = m.group()
    pos = m.end()
    cls, keys = _NAMES[name]
    values: dict[str, float] = {}
    if pos < len(text):
        if text[pos] != ":":
            raise WeightSpecParseError(text, pos, ['":"', "end of input"])
        pos += 1
        while True:
            km = _KEY_RE.match(text, pos)
            if not km or km.group() not in keys:
                raise WeightSpecParseError(text, pos, list(keys))
            key = km.group()
            if key in values:
                raise WeightSpecParseError(text, pos, [k for k in keys if k not in values] or ["end of input"])
            pos = km.end()
            if pos >= len(text) or text[pos] != "=":
                raise WeightSpecParseError(text, pos, ['"="'])
            pos += 1
            nm = _NUM_RE.match(text, pos)
            if not nm:
                raise WeightSpecParseError(text, pos, ["number"])
            values[key] = float(nm.group())
            pos = nm.end()
            if pos == len(text):
                break
            if text[pos] != ",":
                raise WeightSpecParseError(text, pos, ['","', "end of input"])
            pos += 1
    for key in _REQUIRED.get(name, ()):
        if key not in values:
            raise WeightSpecRangeError(f"{name}: missing required parameter {key}")
    if name in ("cantor", "cantorseq"):
        depth = values.pop("depth", 8.0)
        if depth != int(depth):
            raise WeightSpecRangeError(f"{name}: depth must be an integer")
        if name == "cantor":
            return CantorFlat(int(depth))
        if "shift" in values and "ratio" in values:
            raise WeightSpecRangeError("cantorseq: give either shift or ratio, not both")
        if "ratio" in values:
            b = BSequence("geometric", ratio=values["ratio"])
        else:
            shift = values.get("shift", 1.0)
            if shift != int(shift):
                raise WeightSpecRangeError("cantorseq: shift must be an integer")
            b = BSequence("harmonic", shift=int(shift))
        return CantorSeq(int(depth), b)
    return cls(**values)


def _fmt_number(v) -> str:
    v = float(v)
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def format_weight_spec(spec: Weight) -> str:
    params = spec.params()
    body = ",".join(f"{k}={_fmt_number(v)}" for k, v in params.items())
    return f"{spec.name}:{body}" if body else spec.name


# ---------------------------------------------------------------------------


def weight_regularity_ratio(spec: Weight, R: float, eps: float, x_samples, y_samples) -> float:
    """max of w(x + y) / w(x) over sampled |x| >= R, |y| <= eps."""
    x = np.asarray(x_samples, dtype=float)
    y = np.asarray(y_samples, dtype=float)
    x = x[np.abs(x) >= R]
    y = y[np.abs(y) <= eps]
    if x.size == 0 or y.size == 0:
        raise ValueError("no samples satisfy |x| >= R and |y| <= eps")
    log_ratio = spec.log(x[:, None] + y[None, :]) - spec.log(x)[:, None]
    return float(np.exp(np.max(log_ratio)))
