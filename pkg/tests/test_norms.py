import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from fmlab.grid import Grid, SampledFunction, indicator
from fmlab.norms import (
    QuadratureError, SpaceSpec, WeightOverflowError, ap_constant, ap_convergence, ax_constant,
    ball_indicator_norm, doubling_constant_estimate, doubling_ratio, dyadic_family, lofstrom_ratio,
    log_weighted_integral, parse_p, weak_doubling_witness, weighted_lp_norm,
)
from fmlab.weights import (
    BSequence, CantorFlat, CantorSeq, Constant, Exp, ExpAbs, PhiExp, PowerAbs, PowerOnePlus, SubExp, SuperExp,
)
from oracles import ap_interval_quad, ball_norm_quad, quad_power


# ---------------------------------------------------------------------------
# SpaceSpec


def test_space_spec():
    assert SpaceSpec(2).conjugate == 2
    assert SpaceSpec(1).conjugate == math.inf
    assert SpaceSpec(math.inf).conjugate == 1
    assert SpaceSpec(3).conjugate == pytest.approx(1.5)
    assert SpaceSpec(2, Exp(1)).describe() == "L^2(exp:c=1)"
    with pytest.raises(ValueError):
        SpaceSpec(0.5)
    with pytest.raises(ValueError):
        SpaceSpec(float("nan"))
    assert parse_p("inf") == math.inf and parse_p("2.5") == 2.5


# ---------------------------------------------------------------------------
# weighted L^p norms of samples


def test_lp_norm_examples():
    g = Grid(4.0, 2048)
    assert abs(weighted_lp_norm(indicator(g, -1, 1), SpaceSpec(2)) - math.sqrt(2)) <= 5 * g.h
    assert weighted_lp_norm(g.zeros(), SpaceSpec(2, Exp(1))) == 0.0
    g = Grid(8.0, 4096)
    assert abs(weighted_lp_norm(indicator(g, 0, 1), SpaceSpec(1, Exp(1))) - (math.e - 1)) <= 1e-4
    # endpoint samples carry 1/2, so the sup sits one node inside
    assert weighted_lp_norm(indicator(g, -1, 1), SpaceSpec(math.inf, Exp(1))) == pytest.approx(math.exp(1 - g.h))


def test_lp_norm_overflow_is_flagged():
    g = Grid(800.0, 1024)
    f = indicator(g, 600, 700)
    with pytest.raises(WeightOverflowError):
        weighted_lp_norm(f, SpaceSpec(2, Exp(1)))
    # far from the support the weight may be huge without harm
    assert weighted_lp_norm(indicator(g, -1, 1), SpaceSpec(2, Exp(1))) > 0


def test_lp_norm_matches_plain_sum():
    g = Grid(6.0, 512)
    rng = np.random.default_rng(0)
    f = SampledFunction(g, rng.standard_normal(512) * np.exp(-g.x ** 2))
    for w in (PowerOnePlus(1.5), SubExp(1, 0.5), Exp(2)):
        for p in (1.0, 2.0, 3.5):
            direct = (g.h * np.sum(np.abs(f.values * w(g.x)) ** p)) ** (1 / p)
            assert weighted_lp_norm(f, SpaceSpec(p, w)) == pytest.approx(direct, rel=1e-12)


# ---------------------------------------------------------------------------
# interval integrals and ball norms

QUAD_WEIGHTS = [PowerOnePlus(0.7), PowerOnePlus(-1.3), PowerAbs(0.4), PowerAbs(-0.3), Exp(0.8), ExpAbs(1.2),
                SubExp(1.0, 0.5), SubExp(0.3, 0.9), SuperExp(1.5, 2.0), PhiExp(0.5), Constant(3.0)]


@pytest.mark.parametrize("w", QUAD_WEIGHTS, ids=str)
@pytest.mark.parametrize("s", [2.0, -2.0, 1.0, 0.5])
def test_interval_integrals_against_scipy(w, s):
    intervals = [(-3.0, -0.5), (-1.0, 2.0), (0.25, 4.0), (-0.1, 0.1), (5.0, 5.5)]
    if isinstance(w, PowerAbs) and s * w.gamma <= -1:
        pytest.skip("non-integrable at 0")
    a, b = np.array(intervals).T
    got = np.exp(log_weighted_integral(w, s, a, b))
    want = np.array([quad_power(w, s, lo, hi) for lo, hi in intervals])
    np.testing.assert_allclose(got, want, rtol=1e-8)


@pytest.mark.parametrize("w", [Constant(2.0), Exp(1.0), Exp(0.3), PowerOnePlus(1.0), PowerAbs(0.5), ExpAbs(1.0)],
                         ids=str)
def test_closed_forms_match_adaptive_kernel(w):
    a = np.array([-4.0, -1.0, 0.5, -0.2, 10.0])
    b = np.array([-2.0, 3.0, 0.75, 0.1, 30.0])
    for s in (1.0, 2.0, -2.0):
        if isinstance(w, PowerAbs) and s * w.gamma <= -1:
            continue
        closed = log_weighted_integral(w, s, a, b)
        quad = log_weighted_integral(w, s, a, b, method="quad")
        np.testing.assert_allclose(np.exp(closed - quad), 1.0, rtol=1e-8)


def test_cantor_integrals_are_exact():
    w = CantorFlat(5)
    G = w.set
    # int_0^1 w = |G| + 2 (1 - |G|)
    val = math.exp(log_weighted_integral(w, 1.0, np.array(0.0), np.array(1.0)))
    assert val == pytest.approx(float(G.measure) + 2 * (1 - float(G.measure)), rel=1e-14)
    w = CantorSeq(5, BSequence())
    # on [2m, 2m+1]: b_m^s |G| + (1 - |G|)
    for m in (1, 3):
        val = math.exp(log_weighted_integral(w, 2.0, np.array(2.0 * m), np.array(2.0 * m + 1)))
        assert val == pytest.approx((1 / (m + 1)) ** 2 * float(G.measure) + 1 - float(G.measure), rel=1e-13)
        neg = math.exp(log_weighted_integral(w, 2.0, np.array(-2.0 * m - 1), np.array(-2.0 * m)))
        assert neg == pytest.approx(val, rel=1e-13)


def test_quadrature_error_reports_achieved_tolerance():
    with pytest.raises(QuadratureError) as info:
        log_weighted_integral(SubExp(1, 0.5), 2.0, np.array(0.0), np.array(100.0), method="quad", tol=1e-30)
    assert info.value.achieved > info.value.requested == 1e-30


def test_ball_norm_examples():
    assert ball_indicator_norm(SpaceSpec(2), 7.3, 2) == pytest.approx(2.0, rel=1e-15)
    assert ball_indicator_norm(SpaceSpec(1, Exp(1)), 0, 1) == pytest.approx(math.e - 1 / math.e, rel=1e-14)
    assert ball_indicator_norm(SpaceSpec(math.inf), 3, 5) == 1.0
    assert ball_indicator_norm(SpaceSpec(math.inf, Exp(1)), 0, 2) == pytest.approx(math.exp(2))
    with pytest.raises(ValueError):
        ball_indicator_norm(SpaceSpec(2), 0, 0)


@pytest.mark.parametrize("w", QUAD_WEIGHTS[:8], ids=str)
def test_ball_norms_against_scipy(w):
    for p in (1.0, 2.0, 3.0):
        for y, R in ((0.0, 1.0), (2.5, 0.7), (-4.0, 3.0)):
            if isinstance(w, PowerAbs) and p * w.gamma <= -1:
                continue
            assert ball_indicator_norm(SpaceSpec(p, w), y, R) == pytest.approx(ball_norm_quad(w, p, y, R), rel=1e-8)


def test_ess_sup_of_cantor_weights():
    # G has empty interior at infinite depth, but depth-d intervals have length 2^-d
    w = CantorFlat(4)
    assert ball_indicator_norm(SpaceSpec(math.inf, w), 0.5, 0.01) == 2.0
    assert ball_indicator_norm(SpaceSpec(math.inf, w), 0.01, 0.005) == 1.0
    w = CantorSeq(4)
    assert ball_indicator_norm(SpaceSpec(math.inf, w), 2.01, 0.005) == pytest.approx(0.5)
    assert ball_indicator_norm(SpaceSpec(math.inf, w), 2.5, 1.0) == 1.0


# ---------------------------------------------------------------------------
# doubling


def test_doubling_ratio_examples():
    assert doubling_ratio(SpaceSpec(2), 2, 3.0, 1.7) == pytest.approx(math.sqrt(2), rel=1e-14)
    want = (math.exp(10) - math.exp(-10)) / (math.exp(5) - math.exp(-5))
    assert doubling_ratio(SpaceSpec(1, Exp(1)), 2, 0, 5) == pytest.approx(want, rel=1e-12)
    assert doubling_ratio(SpaceSpec(2, SubExp(1, 0.5)), 1 + 1e-9, 4.0, 2.0) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        doubling_ratio(SpaceSpec(2), 1.0, 0, 1)


def test_doubling_estimate_examples():
    rep = doubling_constant_estimate(SpaceSpec(2), 2, (1, 2, 3), (0, 5))
    assert rep.liminf_estimate == pytest.approx(math.sqrt(2), rel=1e-14)
    rep = doubling_constant_estimate(SpaceSpec(2, SubExp(1, 0.5)), 2, (5, 10, 20, 40), (0,))
    assert math.isfinite(rep.liminf_estimate) and rep.liminf_estimate <= 10
    rep = doubling_constant_estimate(SpaceSpec(2, Exp(1)), 2, (5, 10, 20), range(-20, 21))
    assert np.all(np.diff(rep.per_R_inf) > 0)
    assert list(rep.rows())[0]["R"] == 5.0


def test_doubling_estimate_validation():
    with pytest.raises(ValueError):
        doubling_constant_estimate(SpaceSpec(2), 2, (), (0,))
    with pytest.raises(ValueError):
        doubling_constant_estimate(SpaceSpec(2), 2, (2, 1), (0,))
    with pytest.raises(ValueError):
        doubling_constant_estimate(SpaceSpec(2), 0.5, (1,), (0,))


def test_doubling_report_invariants():
    for w in (Exp(0.5), SubExp(1, 0.5), PowerOnePlus(-0.5), CantorSeq(6), ExpAbs(1)):
        rep = doubling_constant_estimate(SpaceSpec(2, w), 1.5, (1, 2, 4, 8), np.linspace(-10, 10, 21))
        assert np.all(rep.ratios >= 1 - 1e-12)
        assert np.all(rep.per_R_inf[:, None] <= rep.ratios)
        assert rep.liminf_estimate == pytest.approx(min(rep.per_R_inf[2:]))


def test_doubling_estimate_is_schedule_order_deterministic():
    space = SpaceSpec(2, SubExp(1, 0.5))
    a = doubling_constant_estimate(space, 2, (1, 2, 4), (-3, 0, 3))
    b = doubling_constant_estimate(space, 2, (1, 2, 4), (-3, 0, 3))
    assert np.array_equal(a.ratios, b.ratios)


_weights = st.sampled_from([Constant(1), Exp(1), ExpAbs(0.5), SubExp(1, 0.5), PowerOnePlus(1.0), PowerOnePlus(-2),
                            PowerAbs(0.3), SuperExp(1.5, 1.5), PhiExp(0.5), CantorFlat(5), CantorSeq(5)])


@settings(max_examples=250, deadline=None)
@given(_weights, st.sampled_from([1.0, 2.0, 3.0, math.inf]), st.floats(-10, 10), st.floats(0.01, 8),
       st.floats(1.0, 3.0))
def test_ball_norm_monotone_in_R(w, p, y, R, factor):
    space = SpaceSpec(p, w)
    assert ball_indicator_norm(space, y, R * factor) >= ball_indicator_norm(space, y, R) * (1 - 1e-12)


@settings(max_examples=150, deadline=None)
@given(_weights, st.sampled_from([1.0, 2.0, 4.0]), st.floats(-10, 10), st.floats(0.05, 5), st.floats(1.01, 3),
       st.floats(1.01, 3))
def test_tau_monotonicity(w, p, y, R, t1, t2):
    t1, t2 = sorted((t1, t2))
    space = SpaceSpec(p, w)
    assert doubling_ratio(space, t1, y, R) <= doubling_ratio(space, t2, y, R) * (1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(0.01, 100), st.sampled_from([1.0, 2.0, 7.0]))
def test_translation_invariance_unweighted(y1, y2, R, p):
    # endpoints y +- R round differently for different y
    assert ball_indicator_norm(SpaceSpec(p), y1, R) == pytest.approx(ball_indicator_norm(SpaceSpec(p), y2, R),
                                                                     rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(1.0, 4.0), st.floats(1.01, 6), st.lists(st.floats(0.1, 50), min_size=1, max_size=5, unique=True))
def test_unweighted_doubling_estimate_is_tau_power(p, tau, radii):
    rep = doubling_constant_estimate(SpaceSpec(p), tau, sorted(radii), (0.0, 3.0))
    assert rep.liminf_estimate == pytest.approx(tau ** (1 / p), rel=1e-10)


# ---------------------------------------------------------------------------
# witness sequence


def test_witness_first_radius_and_bound():
    rep = weak_doubling_witness(SpaceSpec(2, SubExp(1, 0.5)), 2.0)
    assert rep.points[0].R == pytest.approx(1.0)
    assert rep.bound == pytest.approx(math.e ** 3)
    assert all(pt.y - 2.0 * pt.R > 0 for pt in rep.points)
    assert rep.max_ratio <= rep.bound
    rep4 = weak_doubling_witness(SpaceSpec(2, SubExp(4, 0.5)), 2.0)
    assert rep4.points[0].R == pytest.approx(0.5)


def test_witness_beats_centered_balls():
    rep = weak_doubling_witness(SpaceSpec(2, SubExp(1, 0.5)), 2.0, range(1, 21))
    centered = np.array(rep.centered_ratios)
    ratios = np.array([pt.ratio for pt in rep.points])
    assert np.all(centered > ratios)
    assert np.all(np.diff(centered) > 0)


def test_witness_rejects_other_weights():
    with pytest.raises(TypeError):
        weak_doubling_witness(SpaceSpec(2, Exp(1)), 2.0)
    with pytest.raises(ValueError):
        weak_doubling_witness(SpaceSpec(2, SubExp(1, 1.0)), 2.0)
    with pytest.raises(ValueError):
        weak_doubling_witness(SpaceSpec(2, SubExp(1, 0.5)), 1.0)


# ---------------------------------------------------------------------------
# Muckenhoupt constants


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_ap_of_constant_is_one(p):
    assert ap_constant(SpaceSpec(p), 6).value == pytest.approx(1.0, abs=1e-14)
    assert ax_constant(SpaceSpec(p), 6).value == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("gamma", [-0.3, 0.2, 0.45])
def test_power_ap_matches_endpoint_interval_formula(gamma):
    # on [0, b] the two averages give 1 / sqrt((1 + 2 gamma)(1 - 2 gamma)) for p = 2
    res = ap_constant(SpaceSpec(2, PowerAbs(gamma)), 8)
    assert res.value == pytest.approx(1 / math.sqrt(1 - 4 * gamma ** 2), rel=1e-9)
    assert res.argmax[0] == 0.0 or res.argmax[1] == 0.0


def test_ap_single_interval_against_scipy():
    for w in (PowerOnePlus(0.5), SubExp(1, 0.5), ExpAbs(0.5), PowerAbs(0.2)):
        for a, b in ((-1.0, 2.0), (0.5, 3.0), (-4.0, -1.0)):
            fam = (np.array([a]), np.array([b]))
            for p in (1.5, 2.0, 4.0):
                assert ap_constant(SpaceSpec(p, w), family=fam).value == pytest.approx(
                    ap_interval_quad(w, p, a, b), rel=1e-8)


def test_ap_divergence_and_range():
    for g in (0.6, -0.6):
        res = ap_constant(SpaceSpec(2, PowerAbs(g)), 6)
        assert res.divergent and res.value == math.inf
    with pytest.raises(ValueError):
        ap_constant(SpaceSpec(1))
    with pytest.raises(ValueError):
        ap_constant(SpaceSpec(math.inf))


def test_ax_equals_ap():
    for w in (PowerAbs(0.2), PowerOnePlus(0.4), SubExp(0.5, 0.5)):
        for p in (1.5, 2.0, 3.0):
            ap, ax = ap_constant(SpaceSpec(p, w), 6), ax_constant(SpaceSpec(p, w), 6)
            assert ax.value == pytest.approx(ap.value, rel=1e-10)


def test_ax_of_exponential_grows_with_K():
    vals = [ax_constant(SpaceSpec(2, Exp(1)), K).value for K in (2, 3, 4, 5)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_ap_convergence_and_family():
    res = ap_convergence(SpaceSpec(2, PowerAbs(0.2)), (6, 7, 8))
    assert [r.K for r in res] == [6, 7, 8]
    vals = [r.value for r in res]
    assert max(vals) - min(vals) <= 0.01 * vals[0]
    a, b = dyadic_family(3)
    centers = (a + b) / 2
    assert np.all(np.abs(centers) <= 8) and set(np.round(b - a, 12)) == {2.0 ** k for k in range(-3, 4)}


@settings(max_examples=40, deadline=None)
@given(_weights, st.floats(1.2, 5.0))
def test_ap_at_least_one(w, p):
    assume(not isinstance(w, (SuperExp, PowerAbs)))
    fam = (np.array([-3.0, 0.5, 2.0, -0.25]), np.array([-1.0, 1.5, 9.0, 0.25]))
    assert ap_constant(SpaceSpec(p, w), family=fam).value >= 1 - 1e-12


# ---------------------------------------------------------------------------
# triviality ratio


def test_superexp_lofstrom_closed_form():
    w = SuperExp(2, 2)
    eps = 1 / 3
    vals = [lofstrom_ratio(w, 1.0, eps, k) for k in range(1, 11)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    for k, v in zip(range(1, 11), vals):
        xk = k + 1
        assert math.log(v) == pytest.approx((xk - eps) ** 2 - (xk - 1 + eps) ** 2, rel=1e-12)
    # the exponent is (1 - 2 eps)(2 x_k - 1): linear in k
    assert math.log(vals[-1]) == pytest.approx(7.0, rel=1e-12)


def test_lofstrom_constant_and_exponential():
    assert all(lofstrom_ratio(Constant(), 2.0, 0.5, k) == 1.0 for k in range(1, 6))
    vals = [lofstrom_ratio(Exp(1), 1.0, 1 / 3, k) for k in range(1, 8)]
    assert vals == pytest.approx([math.exp(1 / 3)] * 7, rel=1e-12)
    assert lofstrom_ratio(SuperExp(2, 2), -1.0, 0.25, 5) == pytest.approx(lofstrom_ratio(SuperExp(2, 2), 1.0, 0.25, 5))


def test_lofstrom_preconditions():
    with pytest.raises(ValueError):
        lofstrom_ratio(Exp(1), 0.0, 0.1, 1)
    with pytest.raises(ValueError):
        lofstrom_ratio(Exp(1), 1.0, 0.5, 1)
    with pytest.raises(ValueError):
        lofstrom_ratio(Exp(1), 1.0, 0.1, 0)
