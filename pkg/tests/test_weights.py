import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fmlab.weights import (
    GRAMMAR, BSequence, CantorFlat, CantorSeq, Constant, Exp, ExpAbs, FatCantorSet, PhiExp, PowerAbs,
    PowerOnePlus, SubExp, SuperExp, WeightSpecParseError, WeightSpecRangeError, build_fat_cantor,
    eval_weight, format_weight_spec, parse_weight_spec, phi_default, weight_regularity_ratio,
)
from oracles import in_intervals, svc_intervals

CATALOG = [
    Constant(2.5), PowerOnePlus(2.0), PowerOnePlus(-1.5), PowerAbs(0.3), PowerAbs(-0.4), Exp(1.0), ExpAbs(0.5),
    SubExp(0.5, 0.5), SuperExp(2.0, 3.0), PhiExp(1.0), CantorFlat(4), CantorSeq(4), CantorSeq(5, BSequence("geometric", ratio=0.5)),
]


# ---------------------------------------------------------------------------
# fat Cantor set


@pytest.mark.parametrize("depth", [0, 1, 2, 5, 9])
def test_intervals_match_literal_construction(depth):
    G = build_fat_cantor(depth)
    assert G.intervals() == svc_intervals(depth)
    assert sum(b - a for a, b in G.intervals()) == G.measure
    assert G.measure == Fraction(1, 2) + Fraction(1, 2 ** (depth + 1))
    assert all(b - a <= Fraction(1, 2 ** depth) for a, b in G.intervals())
    ivs = G.intervals()
    assert all(b1 < a2 for (_, b1), (a2, _) in zip(ivs, ivs[1:]))


def test_depth_one_and_ten():
    assert build_fat_cantor(1).intervals() == [(0, Fraction(3, 8)), (Fraction(5, 8), 1)]
    assert build_fat_cantor(0).intervals() == [(0, 1)]
    assert float(build_fat_cantor(10).measure) == 0.50048828125


def test_depth_limits():
    with pytest.raises(OverflowError):
        FatCantorSet(31)
    with pytest.raises(OverflowError):
        FatCantorSet(21).intervals()
    with pytest.raises(ValueError):
        FatCantorSet(-1)
    assert FatCantorSet(30).measure == Fraction(1, 2) + Fraction(1, 2 ** 31)


def test_measure_decreases_to_one_half():
    ms = [FatCantorSet(d).measure for d in range(0, 31)]
    assert all(b < a for a, b in zip(ms, ms[1:]))
    assert all(m > Fraction(1, 2) for m in ms)


@pytest.mark.parametrize("depth", [3, 7])
def test_membership_and_cdf_against_interval_list(depth):
    G = FatCantorSet(depth)
    ivs = svc_intervals(depth)
    rng = np.random.default_rng(depth)
    pts = np.r_[rng.uniform(-0.2, 1.2, 3000), [float(a) for a, _ in ivs], [float(b) for _, b in ivs]]
    got = G.contains(pts)
    want = np.array([in_intervals(p, ivs) for p in pts])
    assert np.array_equal(got, want)
    for x in rng.uniform(-0.1, 1.1, 200):
        exact = sum(max(Fraction(0), min(b, Fraction(x)) - a) for a, b in ivs)
        assert G.cdf(x) == pytest.approx(float(exact), abs=1e-15)
    assert G.measure_in(0.0, 1.0) == pytest.approx(float(G.measure), abs=1e-15)


# ---------------------------------------------------------------------------
# evaluation


def test_reference_values():
    assert eval_weight(Exp(1), 2.0) == pytest.approx(math.exp(2), rel=1e-15)
    assert eval_weight(parse_weight_spec("power:alpha=2"), 1.0) == pytest.approx(4.0, rel=1e-15)
    assert eval_weight(CantorFlat(4), 0.5) == 2.0
    assert eval_weight(CantorSeq(4, BSequence()), 6.0) == 0.25


def test_cantor_seq_values():
    w = CantorSeq(4)
    ivs = svc_intervals(4)
    rng = np.random.default_rng(2)
    for m in (1, 2, 5):
        for t in rng.uniform(0, 1, 200):
            inside = in_intervals(t, ivs)
            assert w(2 * m + t) == (1 / (m + 1) if inside else 1.0)
    assert w(0.5) == 1.0  # G_0 is not used
    assert w(1.5) == 1.0


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50, allow_nan=False))
def test_cantor_seq_symmetric(y):
    for w in (CantorSeq(6), CantorSeq(3, BSequence("geometric", ratio=0.3))):
        assert w(y) == w(-y)


def test_positivity_at_a_million_points():
    # exp(930) overflows a double, so finiteness is checked on log w over the
    # full range and on w itself where it is representable
    x = np.random.default_rng(1).uniform(-30, 30, 1_000_000)
    for w in CATALOG:
        lw = w.log(x)
        assert np.all(np.isfinite(lw)), w
        with np.errstate(over="ignore"):
            assert np.all(w(x) > 0), w
        small = x[np.abs(x) < 5]
        v = w(small)
        assert np.all(v > 0) and np.all(np.isfinite(v)), w


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, 5, allow_nan=False))
def test_superexp_branches(x):
    w = SuperExp(1.5, 2.5)
    expected = math.exp(abs(x) ** 1.5) if x < 0 else math.exp(x ** 2.5)
    assert w(x) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 100), st.floats(1e-6, 100))
def test_phi_slope_condition(x, d):
    z = x + d
    assert (phi_default(z) - phi_default(x)) / (z - x) >= 1 - 1e-9


def test_phiexp_is_exp_on_the_left():
    x = np.linspace(-10, 0, 101)
    assert np.allclose(PhiExp(0.7)(x), np.exp(0.7 * x), rtol=1e-15)


def test_regularity_ratio_examples():
    xs = np.linspace(-40, 40, 8001)
    ys = np.linspace(-1, 1, 201)
    assert weight_regularity_ratio(SubExp(1, 0.5), 10, 1, xs, ys) <= math.e
    assert weight_regularity_ratio(Constant(1), 3, 0.5, xs, ys) == 1.0
    assert weight_regularity_ratio(Exp(1), 10, 1, xs, ys) == pytest.approx(math.e, rel=1e-12)
    with pytest.raises(ValueError):
        weight_regularity_ratio(Exp(1), 100, 1, xs, ys)


def test_bsequence():
    b = BSequence()
    assert [b(m) for m in (1, 2, 3)] == [Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)]
    vals = BSequence("geometric", ratio=0.5).values(np.arange(1, 30))
    assert np.all((0 < vals) & (vals < 1)) and np.all(np.diff(vals) < 0)
    with pytest.raises(ValueError):
        b(0)
    with pytest.raises(WeightSpecRangeError):
        BSequence("geometric", ratio=1.0)
    with pytest.raises(WeightSpecRangeError):
        BSequence("fibonacci")


# ---------------------------------------------------------------------------
# DSL


def test_parse_examples():
    assert parse_weight_spec("exp:c=1") == Exp(1.0)
    assert parse_weight_spec("subexp:c=0.5,beta=0.5") == SubExp(0.5, 0.5)
    assert parse_weight_spec("const") == Constant(1.0)
    assert parse_weight_spec("cantorseq:depth=6,ratio=0.25") == CantorSeq(6, BSequence("geometric", ratio=0.25))
    assert parse_weight_spec("cantorseq:depth=6,shift=3") == CantorSeq(6, BSequence("harmonic", shift=3))
    assert parse_weight_spec("powerabs:gamma=-.5") == PowerAbs(-0.5)
    assert parse_weight_spec("superexp:alpha1=1.5e0,alpha2=3") == SuperExp(1.5, 3.0)


@pytest.mark.parametrize("text,offset", [
    ("", 0), ("gauss:c=1", 0), ("exp;c=1", 3), ("exp:d=1", 4), ("exp:c", 5), ("exp:c=", 6),
    ("exp:c=1,", 8), ("exp:c=1,c=2", 8), ("exp:c=1 ", 7), ("exp:c=x", 6), ("exp: c=1", 4),
])
def test_parse_errors_report_offset(text, offset):
    with pytest.raises(WeightSpecParseError) as info:
        parse_weight_spec(text)
    assert info.value.offset == offset
    assert info.value.expected


@pytest.mark.parametrize("text", [
    "exp:c=0", "exp:c=-1", "subexp:beta=1.5", "superexp:alpha1=1", "power", "powerabs",
    "cantor:depth=31", "cantor:depth=2.5", "cantorseq:shift=1,ratio=0.5", "cantorseq:ratio=1",
    "const:c=0",
])
def test_range_errors(text):
    with pytest.raises(WeightSpecRangeError):
        parse_weight_spec(text)


def test_grammar_lists_every_name():
    for name in ("const", "power", "powerabs", "exp", "expabs", "subexp", "superexp", "phiexp", "cantor",
                 "cantorseq"):
        assert name in GRAMMAR


_pos = st.floats(0.01, 100, allow_nan=False)
_specs = st.one_of(
    st.builds(Constant, _pos), st.builds(PowerOnePlus, st.floats(-5, 5)), st.builds(PowerAbs, st.floats(-0.9, 0.9)),
    st.builds(Exp, _pos), st.builds(ExpAbs, _pos), st.builds(SubExp, _pos, st.floats(0.01, 1)),
    st.builds(SuperExp, st.floats(1.01, 5), st.floats(1.01, 5)), st.builds(PhiExp, _pos),
    st.builds(CantorFlat, st.integers(0, 30)),
    st.builds(CantorSeq, st.integers(0, 30), st.builds(BSequence, st.just("harmonic"), st.integers(1, 9))),
    st.builds(CantorSeq, st.integers(0, 30),
              st.builds(BSequence, st.just("geometric"), st.just(1), st.floats(0.01, 0.99))),
)


@settings(max_examples=300, deadline=None)
@given(_specs)
def test_format_parse_round_trip(spec):
    text = format_weight_spec(spec)
    assert parse_weight_spec(text) == spec
    assert format_weight_spec(parse_weight_spec(text)) == text
