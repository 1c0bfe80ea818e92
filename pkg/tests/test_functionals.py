import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special
from scipy.optimize import minimize_scalar

from coulomb_sobolev.exponents import ParamSet, ParameterError, quotient_exponents
from coulomb_sobolev.functionals import (
    GridEnergies, ball_bound_ratio, coulomb_energy, evaluate, lp_norm, lp_power, morrey_norm,
    optimal_scale, quotient, rubin_ratio, ruiz_exterior, ruiz_interior, seminorm_form,
    seminorm_sq, weak_ni_ratio, weighted_moment)
from coulomb_sobolev.kernels import midpoint_defect_sum
from coulomb_sobolev.radial import (BumpParams, RadialGridFunction, bump_on_adapted_grid, eta,
                                    grid_from_nodes, make_grid, superposition)

BASE = BumpParams(1.0, 2.0, 1.5)


@pytest.fixture(scope="module")
def base_bump():
    return bump_on_adapted_grid(BASE, 3, nodes_across=256)


# ------------------------------------------------- Fourier-side oracles (d = 3)

def _profile(r):
    return float(eta((r - BASE.R) / BASE.S))


def _hankel(k):
    """Unitary 3-d Fourier transform of the radial bump."""
    val = integrate.quad(lambda r: _profile(r) * r * math.sin(k * r) / k, 0.5, 3.5, limit=200)[0]
    return (2 * math.pi) ** -1.5 * 4 * math.pi * val


ANGULAR = 2 * 4 * math.pi * 2 * math.pi  # 2^(d-2) w_{d-1} w_{d-2} at d = 3


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_gagliardo_seminorm_matches_fourier_side(base_bump, s):
    d = 3
    c_ds = s * 4 ** s * special.gamma((d + 2 * s) / 2) / (math.pi ** (d / 2) * special.gamma(1 - s))
    four = 2 / c_ds * integrate.quad(lambda k: k ** (2 * s) * _hankel(k) ** 2 * 4 * math.pi * k * k,
                                     0, 80, limit=400)[0]
    assert ANGULAR * seminorm_sq(base_bump, s) == pytest.approx(four, rel=3e-5)


def test_dirichlet_energy_matches_fourier_side(base_bump):
    four = integrate.quad(lambda k: k * k * _hankel(k) ** 2 * 4 * math.pi * k * k, 0, 80, limit=400)[0]
    coarse = seminorm_sq(base_bump, 1)
    fine = seminorm_sq(bump_on_adapted_grid(BASE, 3, nodes_across=512), 1)
    assert coarse == pytest.approx(four, rel=1e-4)
    # the P1 energy error is O(h^2); one Richardson step removes it
    assert (4 * fine - coarse) / 3 == pytest.approx(four, rel=1e-7)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_coulomb_matches_fourier_side(base_bump, alpha):
    d = 3
    riesz_ft = math.pi ** (d / 2) * 2 ** alpha * special.gamma(alpha / 2) / special.gamma((d - alpha) / 2)
    four = integrate.quad(lambda k: _hankel(k) ** 2 * riesz_ft * k ** (-alpha) * 4 * math.pi * k * k,
                          0, 80, limit=400)[0]
    assert ANGULAR * coulomb_energy(base_bump, 1, alpha) == pytest.approx(four, rel=3e-5)


# ------------------------------------------------------- convergence orders

def _order(fn, levels=(128, 256, 512)):
    v = np.array([fn(bump_on_adapted_grid(BASE, 3, nodes_across=n)) for n in levels])
    diff = np.abs(np.diff(v))
    return math.log2(diff[0] / diff[1])


@pytest.mark.parametrize("name,fn", [
    ("lp", lambda f: lp_power(f, 3)),
    ("dirichlet", lambda f: seminorm_sq(f, 1)),
    ("coulomb-0.5", lambda f: coulomb_energy(f, 2, 0.5)),
    ("coulomb-1", lambda f: coulomb_energy(f, 2, 1.0)),
    ("coulomb-2", lambda f: coulomb_energy(f, 2, 2.0)),
    ("gagliardo-0.25", lambda f: seminorm_sq(f, 0.25)),
    ("gagliardo-0.75", lambda f: seminorm_sq(f, 0.75)),
])
def test_second_order_convergence(name, fn):
    assert _order(fn) > 1.9


def test_second_order_convergence_half_order_seminorm():
    # log corrections at s = 1/2 make the approach to order two slower
    assert _order(lambda f: seminorm_sq(f, 0.5), (256, 512, 1024)) > 1.85


def test_coulomb_self_convergence_under_doubling():
    a = coulomb_energy(bump_on_adapted_grid(BASE, 3, nodes_across=64), 2, 1.5)
    b = coulomb_energy(bump_on_adapted_grid(BASE, 3, nodes_across=128), 2, 1.5)
    assert abs(a / b - 1) < 5e-3


def test_midpoint_defect_sum_brute_force():
    import mpmath as mp
    mp.mp.dps = 30
    for power, start in [(-0.5, 1), (0.5, 4), (0.9, 1)]:
        q = mp.mpf(power) + 2
        term = lambda k: mp.mpf(k) ** power - ((k + 1) ** q - 2 * mp.mpf(k) ** q + abs(k - 1) ** q) / (q * (q - 1))
        N = 3000
        head = mp.fsum(term(k) for k in range(start, N))
        tail = -2 / (q * (q - 1)) * mp.fsum(mp.binomial(q, n) * mp.zeta(n - q, N) for n in range(4, 40, 2))
        assert midpoint_defect_sum(power, start) == pytest.approx(float(head + tail), rel=1e-10)
    log_ref = mp.nsum(lambda k: -2 * mp.log(k) + 2 * mp.quad(lambda t: (1 - abs(t)) * mp.log(k + t), [-1, 0, 1]),
                      [1, mp.inf])
    assert midpoint_defect_sum(0.0, 1, log=True) == pytest.approx(float(log_ref), rel=1e-9)


# ------------------------------------------------------------ homogeneity

@given(st.floats(0.1, 10.0), st.floats(0.2, 5.0))
def test_exact_homogeneity_and_dilation(c, t):
    f = bump_on_adapted_grid(BumpParams(1.0, 2.0, 1.0), 3, nodes_across=32)
    d, p, q, s, al = 3, 3.0, 2.0, 0.4, 1.5
    g = f.scaled(c)
    assert lp_norm(g, p) == pytest.approx(c * lp_norm(f, p), rel=1e-12)
    assert seminorm_sq(g, s) == pytest.approx(c * c * seminorm_sq(f, s), rel=1e-12)
    assert coulomb_energy(g, q, al) == pytest.approx(c ** (2 * q) * coulomb_energy(f, q, al), rel=1e-12)
    # dilated(t) is u(r / t): the laws read with t -> 1/t
    h = f.dilated(t)
    assert lp_norm(h, p) == pytest.approx(t ** (d / p) * lp_norm(f, p), rel=1e-10)
    assert seminorm_sq(h, s) == pytest.approx(t ** (d - 2 * s) * seminorm_sq(f, s), rel=1e-10)
    assert seminorm_sq(h, 1) == pytest.approx(t ** (d - 2) * seminorm_sq(f, 1), rel=1e-10)
    assert coulomb_energy(h, q, al) == pytest.approx(t ** (d + al) * coulomb_energy(f, q, al), rel=1e-10)


@given(st.floats(0.1, 10.0), st.floats(0.2, 5.0))
def test_quotient_invariance(c, t):
    f = superposition([BumpParams(1.0, 2.0, 1.0), BumpParams(0.5, 6.0, 2.0)], 3, nodes_across=32)
    P = ParamSet(3, F(1, 2), F(3, 2), 2, F(7, 2))
    base = quotient(f, P)
    assert quotient(f.scaled(c), P) == pytest.approx(base, rel=1e-10)
    assert quotient(f.dilated(t), P) == pytest.approx(base, rel=1e-10)


def test_report_consistency(base_bump):
    P = ParamSet(3, 1, 2, 2, 4)
    rep = evaluate(base_bump, P)
    b, g = (float(x) for x in quotient_exponents(P))
    assert rep.quotient == pytest.approx(rep.lp_norm / (rep.seminorm_sq ** (b / 2) * rep.coulomb ** g), rel=1e-12)
    assert set(rep.to_dict()) == {"lp_norm", "seminorm_sq", "coulomb", "quotient", "params", "grid", "degenerate"}


# ------------------------------------------------------------- values

def test_plateau_lp_norm():
    nodes = np.linspace(0, 4, 4001)
    g = grid_from_nodes(nodes, 3)
    vals = np.where((nodes >= 1) & (nodes <= 2), 2.0, 0.0)
    f = RadialGridFunction(g, vals)
    h = nodes[1]
    expected = 2.0 * (4 * math.pi * (8 - 1) / 3) ** (1 / 3)
    assert lp_norm(f, 3) == pytest.approx(expected, rel=2 * h)


def test_bump_mass_law_against_quadrature():
    f = bump_on_adapted_grid(BumpParams(1.0, 10.0, 1.0), 3, nodes_across=128)
    eta_sq = integrate.quad(lambda t: (1 - t * t) ** 8, -1, 1)[0]
    ratio = lp_power(f, 2) / (4 * math.pi * 1.0 * 10.0 ** 2 * eta_sq)
    assert abs(ratio - 1) < 3 * (1.0 / 10.0) ** 2


def test_mass_ratio_stable_over_aspect_sweep():
    ratios = []
    for R_over_S in (10, 100, 1000):
        f = bump_on_adapted_grid(BumpParams(1.0, float(R_over_S), 1.0), 3)
        ratios.append(lp_power(f, 3) / (R_over_S ** 2 * 1.0))
    assert max(ratios) / min(ratios) < 1.1


def test_coulomb_bump_law_band():
    vals = []
    for R_over_S in (10, 100, 1000):
        f = bump_on_adapted_grid(BumpParams(1.0, float(R_over_S), 1.0), 3)
        vals.append(coulomb_energy(f, 2, 2.0) / (R_over_S ** (3 + 2 - 2) * 1.0))
    assert max(vals) / min(vals) < 2


def test_zero_function_conventions():
    g = make_grid(5.0, 64, d=3)
    z = RadialGridFunction(g, np.zeros(g.n))
    assert lp_norm(z, 3) == 0 and seminorm_sq(z, 0.5) == 0 and coulomb_energy(z, 2, 1) == 0
    r = ball_bound_ratio(z, 2, 1.0, 2.0)
    assert r == 0 and r.degenerate
    Q = quotient(z, ParamSet(3, 1, 2, 2, 4))
    assert Q == 0 and Q.degenerate


def test_full_support_rejected():
    g = make_grid(5.0, 64, d=3)
    with pytest.raises(ParameterError, match="not compactly supported"):
        seminorm_sq(RadialGridFunction(g, np.ones(g.n)), 0.5)


def test_seminorm_order_range():
    f = bump_on_adapted_grid(BASE, 3)
    with pytest.raises(ParameterError, match="exponents-only"):
        seminorm_sq(f, 1.5)


def _form_gap(n, s):
    g = make_grid(30.0, n, "geometric", r_min=1e-2, d=3)
    vals = eta((g.nodes - 3.0) / 2.0)
    return vals @ seminorm_form(g, s) @ vals / seminorm_sq(RadialGridFunction(g, vals), s) - 1


def test_grid_form_matches_functionals():
    g = make_grid(30.0, 300, "geometric", r_min=1e-2, d=3)
    vals = eta((g.nodes - 3.0) / 2.0)
    f = RadialGridFunction(g, vals)
    assert vals @ seminorm_form(g, 1) @ vals == pytest.approx(seminorm_sq(f, 1), rel=1e-12)
    E = GridEnergies(g, ParamSet(3, F(3, 4), F(1, 2), 2, F(15, 4)))
    assert E.coulomb(vals) == pytest.approx(coulomb_energy(f, 2, 0.5), rel=1e-10)
    assert E.seminorm_sq(vals) == pytest.approx(vals @ seminorm_form(g, 0.75) @ vals, rel=1e-12)


@pytest.mark.parametrize("s", [0.3, 0.75])
def test_grid_form_converges_to_functional_at_second_order(s):
    gaps = [abs(_form_gap(n, s)) for n in (300, 600)]
    assert gaps[0] < 1e-3
    assert math.log2(gaps[0] / gaps[1]) > 1.8


# ------------------------------------------------- weighted ratios

def test_ball_bound_decays_beyond_support():
    f = bump_on_adapted_grid(BumpParams(1, 2.0, 1.0), 3)
    a, b = ball_bound_ratio(f, 2, 1.5, 10.0), ball_bound_ratio(f, 2, 1.5, 100.0)
    assert b == pytest.approx(a * 10 ** -(3 - 1.5), rel=1e-10)


def test_ruiz_exterior_vanishes_outside_support():
    f = bump_on_adapted_grid(BumpParams(1, 2.0, 1.0), 3)
    assert ruiz_exterior(f, 2, 1.5, 0.1, 3.5) == 0


def test_ruiz_ratio_exact_scaling():
    # with q = (d + alpha) / 2 both sides carry the same dilation exponent
    f = superposition([BumpParams(1, 2.0, 1.0), BumpParams(1, 6.0, 1.0)], 3, nodes_across=32)
    q, al = 2.25, 1.5
    for t in (0.3, 2.0, 7.0):
        for R in (1.0, 4.0):
            for fn in (ruiz_exterior, ruiz_interior):
                assert fn(f.dilated(t), q, al, 0.3, R * t) == pytest.approx(fn(f, q, al, 0.3, R), rel=1e-10)


def test_ruiz_sup_over_radius_sweep_is_stable():
    f = superposition([BumpParams(1, 2.0, 1.0), BumpParams(0.3, 40.0, 5.0)], 3)
    q, al = 2.25, 1.5
    D = coulomb_energy(f, q, al)
    for fn in (ruiz_exterior, ruiz_interior):
        narrow = max(fn(f, q, al, 0.2, R, coulomb=D) for R in np.geomspace(0.1, 100, 61))
        wide = max(fn(f, q, al, 0.2, R, coulomb=D) for R in np.geomspace(1e-3, 1e3, 121))
        assert np.isfinite(wide) and wide == pytest.approx(narrow, rel=0.02)


def test_morrey_plateau_closed_form():
    nodes = np.linspace(0, 4, 8001)
    f = RadialGridFunction(grid_from_nodes(nodes, 3), np.where(nodes <= 1, 1.0, 0.0))
    # R^gamma * average over B_R: R^gamma for R <= 1, R^(gamma - 3) beyond, peaked at R = 1
    assert morrey_norm(f, 1, 0.5) == pytest.approx(1.0, rel=2e-3)
    assert morrey_norm(f, 1, 4.0) == pytest.approx(4.0, rel=1e-3)


def test_morrey_dilation_covariance():
    f = bump_on_adapted_grid(BumpParams(1, 2.0, 1.0), 3)
    for t in (0.25, 3.0):
        assert morrey_norm(f.dilated(t), s=0.5) == pytest.approx(t ** 1.0 * morrey_norm(f, s=0.5), rel=1e-10)


def test_weighted_moment_region_split():
    f = superposition([BumpParams(1, 2.0, 1.0), BumpParams(1, 6.0, 1.0)], 3)
    total = weighted_moment(f, 2, -0.5)
    for R in (1.5, 4.0, 6.3):
        inside = weighted_moment(f, 2, -0.5, R, "inside")
        outside = weighted_moment(f, 2, -0.5, R, "outside")
        assert inside + outside == pytest.approx(total, rel=1e-12)


def test_rubin_and_weak_ni_scale_free():
    f = superposition([BumpParams(1, 2.0, 1.0), BumpParams(1, 6.0, 1.0)], 3, nodes_across=32)
    s, r = 0.25, 2.2
    beta = s - 3 * (0.5 - 1 / r)
    a = rubin_ratio(f, s, r, beta)
    assert rubin_ratio(f.dilated(3.0).scaled(2.0), s, r, beta) == pytest.approx(a, rel=1e-10)
    w = weak_ni_ratio(f, s, 3.0, 4.0)
    assert weak_ni_ratio(f.dilated(2.0), s, 3.0, 8.0) == pytest.approx(w, rel=1e-10)


# ------------------------------------------------------------- scaling

def test_optimal_scale_symmetric_case():
    res = optimal_scale(2.0, 2.0, ParamSet(3, 1, 2, 2, 4), a=1.5, b=-1.5)
    assert res.lambda_star == pytest.approx(1.0, rel=1e-14) and res.diagnosis == "minimizer"


@given(st.floats(0.01, 100), st.floats(0.01, 100), st.floats(0.1, 3), st.floats(-3, -0.1))
def test_optimal_scale_against_golden_section(A, B, a, b):
    res = optimal_scale(A, B, ParamSet(3, 1, 2, 2, 4), a=a, b=b)
    obj = lambda x: math.exp(a * x) * A + math.exp(b * x) * B
    x0 = math.log(res.lambda_star)
    found = minimize_scalar(obj, bracket=(x0 - 1, x0 + 1), method="golden", tol=1e-12)
    assert res.value == pytest.approx(found.fun, rel=1e-8)
    assert abs(found.x - x0) < 1e-4 * max(1, abs(x0))


def test_optimal_scale_endpoint_and_monotone():
    res = optimal_scale(1.0, 1.0, ParamSet(3, 1, 2, 5, 6))
    assert res.lambda_star is None and res.diagnosis == "scale-free endpoint"
    res = optimal_scale(1.0, 1.0, ParamSet(3, 1, 2, 2, 4), a=1.0, b=2.0)
    assert res.diagnosis.startswith("monotone")
    with pytest.raises(ParameterError):
        optimal_scale(0.0, 1.0, ParamSet(3, 1, 2, 2, 4))
