import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from coulomb_sobolev.exponents import ParameterError
from coulomb_sobolev.kernels import (
    KernelMatrix, KernelSpec, assemble, diagonal_averages, gagliardo_kernel, kernel_bound_check,
    kernel_quad, kernel_values, riesz_kernel)
from coulomb_sobolev.radial import make_grid

mp.mp.dps = 25


def angular_integral(spec, r, rho):
    """Oracle: the defining z-integral evaluated in mpmath, split at the peak."""
    a, e = mp.mpf(spec.a), mp.mpf(spec.e)
    r, rho = mp.mpf(r), mp.mpf(rho)
    P, B = (r + rho) ** 2, 4 * r * rho
    width = (r - rho) ** 2 / B
    pts = [0] + [1 - k * width for k in (1000, 100, 10, 1) if 1 - k * width > 0] + [1]
    def f(z):
        if z <= 0 or z >= 1:  # integrable endpoint singularity at d = 2
            return mp.mpf(0)
        return z ** (a - 1) * (1 - z) ** (a - 1) / (P - B * z) ** e

    return mp.quad(f, pts)


def hypergeometric(spec, r, rho):
    a, e = mp.mpf(spec.a), mp.mpf(spec.e)
    r, rho = mp.mpf(r), mp.mpf(rho)
    return abs(r - rho) ** (-2 * e) * mp.beta(a, a) * mp.hyp2f1(e, a, 2 * a, -4 * r * rho / (r - rho) ** 2)


def d3_closed(e, r, rho):
    """Elementary antiderivative of the d = 3 angular integral."""
    r, rho = mp.mpf(r), mp.mpf(rho)
    if r == rho:
        return mp.mpf(0)
    if e == 1:
        return mp.log((r + rho) ** 2 / (r - rho) ** 2) / (4 * r * rho)
    return ((r + rho) ** (2 - 2 * e) - abs(r - rho) ** (2 - 2 * e)) / (4 * r * rho * (1 - e))


SPECS = ([KernelSpec.riesz(d, al) for d in (2, 3, 4, 5) for al in (0.5, 1.0, 1.5, d - 0.5)]
         + [KernelSpec.gagliardo(d, s) for d in (2, 3, 4) for s in (0.25, 0.5, 0.75)])
PAIRS = [(1, 1.0001), (1, 1.01), (1, 1.3), (1, 2), (1, 10), (1e-3, 1), (3, 2.999)]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.kind}-d{s.d}-{s.param}")
def test_kernel_values_against_mpmath(spec):
    for r, rho in PAIRS:
        ref = hypergeometric(spec, r, rho)
        assert float(kernel_values(spec, r, rho)) == pytest.approx(float(ref), rel=5e-14)


@pytest.mark.parametrize("spec", [KernelSpec.riesz(3, 0.5), KernelSpec.riesz(4, 2.0),
                                  KernelSpec.gagliardo(2, 0.25), KernelSpec.gagliardo(3, 0.75)])
def test_two_oracles_and_quadrature_agree(spec):
    for r, rho in [(1, 1.01), (1, 3), (0.2, 5)]:
        direct = angular_integral(spec, r, rho)
        assert float(hypergeometric(spec, r, rho)) == pytest.approx(float(direct), rel=1e-12)
        assert kernel_quad(spec, r, rho) == pytest.approx(float(direct), rel=1e-9)


def test_newton_kernel_is_inverse_max():
    spec = KernelSpec.riesz(3, 2)
    r = np.array([0.1, 1.0, 2.5, 7.0])
    rho = np.array([3.0, 0.2, 2.5000001, 1e-6])
    assert np.allclose(kernel_values(spec, r, rho), 1 / np.maximum(r, rho), rtol=1e-12)
    assert riesz_kernel(spec, 2.0, 2.0) == pytest.approx(0.5, rel=1e-14)


def test_origin_value():
    spec = KernelSpec.riesz(4, 1.5)
    assert float(kernel_values(spec, 0.0, 2.0)) == pytest.approx(
        2.0 ** (-2 * spec.e) * float(mp.beta(spec.a, spec.a)), rel=1e-14)


@given(st.floats(0.05, 20), st.floats(0.05, 20), st.floats(0.1, 10))
def test_symmetry_and_homogeneity(r, rho, t):
    if abs(r - rho) < 1e-6 * r:
        return
    for spec in (KernelSpec.riesz(3, 1.5), KernelSpec.riesz(2, 0.5), KernelSpec.gagliardo(4, 0.3)):
        k = float(kernel_values(spec, r, rho))
        assert float(kernel_values(spec, rho, r)) == pytest.approx(k, rel=1e-13)
        assert float(kernel_values(spec, t * r, t * rho)) == pytest.approx(
            t ** spec.homogeneity * k, rel=1e-11)


@pytest.mark.parametrize("d,alpha,power", [(3, 0.5, -0.5), (3, 1.0, 0.0), (4, 0.75, -0.25)])
def test_diagonal_singularity_shape(d, alpha, power):
    spec = KernelSpec.riesz(d, alpha)
    h = np.array([1e-4, 1e-5, 1e-6])
    k = kernel_values(spec, 1.0, 1.0 + h)
    if power == 0:
        slope = (k[1] - k[0]) / math.log(10)
        assert slope == pytest.approx(2 ** (1 - d) * 2, rel=1e-3)
    else:
        # differences remove the bounded part of the kernel
        dk = np.abs(np.diff(kernel_values(spec, 1.0, 1.0 + np.array([1e-4, 1e-5, 1e-6, 1e-7]))))
        slopes = np.diff(np.log(dk)) / math.log(0.1)
        assert slopes[-1] == pytest.approx(power, abs=1e-3)


def test_finite_diagonal_for_alpha_above_one():
    spec = KernelSpec.riesz(3, 1.5)
    near = float(kernel_values(spec, 1.0, 1.0 + 1e-9))
    assert riesz_kernel(spec, 1.0, 1.0) == pytest.approx(near, rel=1e-4)
    with pytest.raises(ParameterError, match="on-diagonal"):
        riesz_kernel(KernelSpec.riesz(3, 1.0), 1.0, 1.0)


def test_spec_validation():
    with pytest.raises(ParameterError, match="0<s<1"):
        KernelSpec.gagliardo(3, 1.0)
    with pytest.raises(ParameterError, match="0 < alpha < d"):
        KernelSpec.riesz(3, 3.0)
    with pytest.raises(ParameterError):
        gagliardo_kernel(KernelSpec.riesz(3, 1.0), 1, 2)


def _cell_average_oracle(spec, c0, c1):
    e = mp.mpf(spec.e)
    g = (lambda x, y: d3_closed(e, x, y) * ((x - y) ** 2 if spec.kind == "gagliardo" else 1))
    c0, c1 = mp.mpf(c0), mp.mpf(c1)
    return mp.quad(lambda x: mp.quad(lambda y: g(x, y), [c0, x, c1]), [c0, c1]) / (c1 - c0) ** 2


@pytest.mark.parametrize("spec", [KernelSpec.riesz(3, 0.5), KernelSpec.riesz(3, 1.0),
                                  KernelSpec.riesz(3, 1.5), KernelSpec.gagliardo(3, 0.25),
                                  KernelSpec.gagliardo(3, 0.8)], ids=lambda s: f"{s.kind}-{s.param}")
def test_diagonal_cell_averages_against_mpmath(spec):
    mp.mp.dps = 20
    h = 0.01
    nodes = np.array([0.0, 1 - h, 1.0, 1 + h])
    ours = diagonal_averages(spec, nodes, np.array([2]))[0]
    ref = _cell_average_oracle(spec, 1 - h / 2, 1 + h / 2)
    assert ours == pytest.approx(float(ref), rel=1e-8)


def test_diagonal_average_error_shrinks_with_cell_width():
    mp.mp.dps = 20
    spec = KernelSpec.riesz(3, 0.5)
    errs = []
    for h in (0.2, 0.05):
        nodes = np.array([0.0, 1 - h, 1.0, 1 + h])
        ref = float(_cell_average_oracle(spec, 1 - h / 2, 1 + h / 2))
        errs.append(abs(diagonal_averages(spec, nodes, np.array([2]))[0] / ref - 1))
    assert errs[0] < 2e-5 and errs[1] < errs[0] / 8


def test_assembly_symmetric_positive_and_threads_identical():
    g = make_grid(5.0, 80, d=3)
    spec = KernelSpec.riesz(3, 1.5)
    M1 = assemble(spec, g)
    M2 = assemble(spec, g, threads=3)
    assert np.array_equal(M1.entries, M2.entries)
    assert np.allclose(M1.entries, M1.entries.T, rtol=1e-13, atol=0)
    W = np.diag(g.weights)
    # Riesz kernels with 0 < alpha < d are positive definite
    assert np.linalg.eigvalsh(W @ M1.entries @ W).min() > -1e-12


def test_binary_roundtrip_and_magic():
    g = make_grid(3.0, 40, d=3)
    M = assemble(KernelSpec.gagliardo(3, 0.4), g)
    back = KernelMatrix.from_bytes(M.to_bytes())
    assert np.array_equal(back.entries, M.entries) and back.spec == M.spec
    with pytest.raises(ParameterError, match="magic"):
        KernelMatrix.from_bytes(b"XXXXX" + M.to_bytes()[5:])


def test_matrix_cap_reports_excess():
    g = make_grid(3.0, 50, d=3)
    with pytest.raises(ParameterError, match="reduce the grid by 10 nodes"):
        assemble(KernelSpec.riesz(3, 1.0), g, n_cap=40)


def test_excluded_policy_rules():
    g = make_grid(3.0, 40, d=3)
    M = assemble(KernelSpec.riesz(3, 1.0), g, diagonal_policy="excluded")
    assert np.all(np.diag(M.entries) == 0)
    with pytest.raises(ParameterError, match="cell_averaged"):
        assemble(KernelSpec.gagliardo(3, 0.5), g, diagonal_policy="excluded")


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 2.5])
def test_bound_check_finite_and_stable(alpha):
    g = make_grid(100.0, 400, "geometric", r_min=1e-2, d=3)
    rep = kernel_bound_check(assemble(KernelSpec.riesz(3, alpha), g))
    assert rep.finite and rep.stable and rep.relative_shift < 0.05
    if alpha == 2.0:
        # K = 1/max(r, rho) <= (r rho)^(-1/2) with equality on the diagonal
        assert rep.M_star == pytest.approx(1.0, abs=0.02)
