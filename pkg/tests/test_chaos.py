import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from levy_spde import ColorationKernel, GreenOperator, LevyMeasure
from levy_spde.chaos import (
    _second_order_kernel,
    a_integral,
    a_integral_swapped,
    d_const,
    factorial_certificate,
    first_chaos_identity,
    gaussian_equivalence,
    geometric_certificate,
    heat_shift_closed,
    j1_quadrature,
    jn_bound,
    jn_estimate,
    k_shifted,
    k_sup,
    second_moment_interval,
    series_certificate,
    simplex_k_integral,
)
from levy_spde.errors import Unsupported
from levy_spde.measure import symmetric_pm1
from levy_spde.streams import block_generator


def heat(d, alpha=1.0):
    return GreenOperator("heat", d), ColorationKernel("heat", alpha, d)


@given(st.floats(0.0, 40.0))
def test_wave_constant_dominates_symbol(r):
    for t in (0.3, 1.0, 3.0):
        s2 = (t * np.sinc(t * r / np.pi)) ** 2
        assert s2 <= d_const(t) / (1.0 + r * r) * (1 + 1e-12)


@given(st.integers(1, 3), st.floats(0.2, 3.0), st.floats(0.3, 3.0), st.floats(0.0, 3.0))
def test_shifted_integral_closed_form(d, t, alpha, s):
    op, k = heat(d, alpha)
    eta = np.zeros(d)
    eta[0] = s
    assert k_shifted(op, k, t, eta) == pytest.approx(heat_shift_closed(t, alpha, d, eta), rel=1e-9)


def test_shifted_integral_bessel_maximised_at_zero():
    op, k = GreenOperator("heat", 2), ColorationKernel("bessel", 1.0, 2)
    base = k_sup(op, k, 1.0)
    for s in (0.3, 1.0, 3.0):
        assert k_shifted(op, k, 1.0, [s, 0.0]) <= base


@pytest.mark.parametrize("d", [1, 2, 3])
def test_a_integral_two_orders_of_integration(d):
    op, k = heat(d)
    assert a_integral(op, k, 1.5) == pytest.approx(a_integral_swapped(op, k, 1.5), rel=1e-9)


def test_wave_a_certificate_above_fubini_value():
    op, k = GreenOperator("wave", 2), ColorationKernel("heat", 1.0, 2)
    assert a_integral_swapped(op, k, 1.0) <= a_integral(op, k, 1.0)


def _closed_k(t, d, alpha=1.0):
    return heat_shift_closed(t, alpha, d, 0.0)


@pytest.mark.parametrize("d", [1, 2])
def test_simplex_integral_against_nested_quadrature(d):
    op, k = heat(d)
    t = 1.0
    K = lambda s: _closed_k(s, d)
    A = lambda u: integrate.quad(K, 0.0, u, epsabs=0, epsrel=1e-12)[0]
    i1 = A(t)
    i2 = integrate.quad(lambda s: K(s) * A(t - s), 0.0, t, epsabs=0, epsrel=1e-11)[0]
    i3 = integrate.quad(
        lambda s: K(s) * integrate.quad(lambda u: K(u) * A(t - s - u), 0.0, t - s, epsabs=0, epsrel=1e-11)[0],
        0.0, t, epsabs=0, epsrel=1e-10,
    )[0]
    assert simplex_k_integral(op, k, t, 1) == pytest.approx(i1, rel=1e-8)
    assert simplex_k_integral(op, k, t, 2) == pytest.approx(i2, rel=1e-7)
    assert simplex_k_integral(op, k, t, 3) == pytest.approx(i3, rel=1e-7)


def test_simplex_integral_riesz_kernel():
    # infinite mass, K(s) ~ s^{-alpha/2}: still integrable near zero
    op, k = GreenOperator("heat", 1), ColorationKernel("riesz", 0.5, 1)
    assert simplex_k_integral(op, k, 1.0, 1) == pytest.approx(a_integral(op, k, 1.0), rel=1e-8)
    assert 0 < jn_bound(op, k, 1.0, 3) < jn_bound(op, k, 1.0, 3, method="power") * 10


def test_jn_bound_methods():
    op, k = heat(1)
    assert jn_bound(op, k, 1.0, 5) == pytest.approx(a_integral(op, k, 1.0) ** 5)
    wop, wk = GreenOperator("wave", 2), ColorationKernel("heat", 1.0, 2)
    c = d_const(1.0) * wk.dalang_integral()
    for n in (1, 2, 3):
        assert jn_bound(wop, wk, 1.0, n) == pytest.approx(c**n / math.factorial(n), rel=1e-14)
    with pytest.raises(ValueError):
        jn_bound(op, k, 1.0, 0)


@pytest.mark.parametrize("op, k", [heat(1), heat(2), (GreenOperator("wave", 2), ColorationKernel("heat", 1.0, 2))])
def test_j1_monte_carlo_against_quadrature(op, k):
    est = jn_estimate(op, k, 1.0, 1, 40000, 3)
    assert abs(est.jn_value - j1_quadrature(op, k, 1.0)) < 4 * est.jn_se
    assert est.consistent()


def test_jn_estimate_restrictions_and_determinism():
    op, k = heat(1)
    with pytest.raises(Unsupported):
        jn_estimate(op, k, 1.0, 4, 100, 0)
    with pytest.raises(Unsupported):
        jn_estimate(GreenOperator("heat", 1), ColorationKernel("bessel", 1.0, 1), 1.0, 1, 100, 0)
    serial = jn_estimate(op, k, 1.0, 2, 30000, 8)
    with ThreadPoolExecutor(4) as pool:
        threaded = jn_estimate(op, k, 1.0, 2, 30000, 8, pool=pool)
    assert serial == threaded


@given(st.floats(0.01, 30.0), st.sampled_from([1e-4, 1e-8, 1e-12]))
def test_factorial_tail_bound_is_valid(x, tol):
    N, terms, tail = factorial_certificate(x, tol)
    assert tail < tol
    exact_tail = math.fsum(math.exp(n * math.log(x) - math.lgamma(n + 1)) for n in range(N + 1, N + 400))
    assert exact_tail <= tail * (1 + 1e-12)
    assert len(terms) == N


@given(st.floats(0.0, 0.99), st.sampled_from([1e-4, 1e-8]))
def test_geometric_tail(rho, tol):
    N, terms, tail = geometric_certificate(rho, tol)
    assert tail < tol
    assert geometric_certificate(1.0, tol) is None


def test_series_certificates():
    wave = series_certificate(GreenOperator("wave", 2), ColorationKernel("heat", 1.0, 2), 1.0, 1.0)
    assert wave.status == "certified" and wave.method == "factorial" and wave.tail_bound < 1e-8
    assert np.all(np.diff(wave.cumulative) >= 0)
    small = series_certificate(*heat(1), 0.5, 1.0)
    assert small.status == "certified"
    big = series_certificate(GreenOperator("heat", 1), ColorationKernel("riesz", 0.5, 1), 4.0, 3.0)
    assert big.status == "inconclusive" and big.tail_bound == math.inf
    forced = series_certificate(*heat(1), 4.0, 3.0, method="factorial")
    assert forced.method == "factorial" and forced.status == "certified"


def test_second_moment_interval_brackets_first_term():
    lo, hi, cert = second_moment_interval(*heat(1), 1.0, 1.0)
    assert 1.0 < lo <= hi < math.inf
    lo, hi, cert = second_moment_interval(GreenOperator("heat", 1), ColorationKernel("riesz", 0.5, 1), 4.0, 3.0)
    assert hi == math.inf


@pytest.mark.parametrize("op, k", [
    (GreenOperator("heat", 1), ColorationKernel("bessel", 3.0, 1)),
    (GreenOperator("wave", 1), ColorationKernel("heat", 1.0, 1)),
    (GreenOperator("wave", 2), ColorationKernel("bessel", 3.0, 2)),
    (GreenOperator("heat", 2), ColorationKernel("riesz", 1.0, 2)),
])
def test_first_chaos_identity_other_families(op, k):
    lhs, rhs = first_chaos_identity(op, k, 0.7, 2.0)
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_second_order_kernel_against_dblquad():
    op = GreenOperator("wave", 1)
    t = 1.3
    x1, x2 = np.array([[0.7]]), np.array([[-1.9]])
    sym = lambda s, r: s * np.sinc(s * r / np.pi)
    ref = integrate.dblquad(lambda t1, t2: sym(t - t2, abs(0.7 - 1.9)) * sym(t2 - t1, 0.7), 0, t, 0, lambda t2: t2)[0]
    assert _second_order_kernel(op, t, x1, x2)[0] == pytest.approx(ref, rel=1e-10)


def test_gaussian_equivalence_first_order_exact():
    for nu in (symmetric_pm1(), LevyMeasure.from_atoms([(-1.0, 0.3), (2.0, 0.7)])):
        res = gaussian_equivalence(*heat(1), 1.0, 1, nu)
        assert res.ratio == 1.0 and res.poisson_term == res.gaussian_term


def test_gaussian_equivalence_second_order():
    nu = LevyMeasure.from_atoms([(-1.0, 0.3), (2.0, 0.7)])
    res = gaussian_equivalence(GreenOperator("wave", 1), ColorationKernel("heat", 1.0, 1), 1.0, 2, nu, 30000, 4)
    assert abs(res.ratio - 1.0) < 3 * res.ratio_se
    with pytest.raises(Unsupported):
        gaussian_equivalence(*heat(1), 1.0, 3, nu)
