import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from levy_spde import quadrature as q
from levy_spde import streams
from levy_spde.errors import QuadratureFail


@given(st.integers(1, 6))
def test_sphere_area(d):
    # volume of the unit ball times d
    assert q.sphere_area(d) == pytest.approx(d * math.pi ** (d / 2) / math.gamma(d / 2 + 1))


@given(st.floats(1.2, 8.0))
def test_radial_integral_power_density_with_power_tail(b):
    # int_0^inf (1 + r^2)^{-b/2} dr = B(1/2, (b - 1)/2) / 2
    dens = q.RadialDensity(lambda r: (1 + r * r) ** (-0.5 * b), "power", decay=b)
    val = q.radial_integral(dens, 1, lambda r: 1.0, decay=0.0)
    exact = 2.0 / (2 * math.pi) * 0.5 * special.beta(0.5, 0.5 * (b - 1))
    assert val == pytest.approx(exact, rel=1e-9)


@given(st.floats(0.2, 5.0))
def test_radial_integral_oscillatory_tail(w):
    # int_0^inf cos(w r) / (1 + r^2) dr = pi e^{-w} / 2
    dens = q.RadialDensity(lambda r: 1.0 / (1 + r * r), "power", decay=2.0)
    tail = [q.Term(lambda r: 1.0, 0.0, "cos", w)]
    val = q.radial_integral(dens, 1, lambda r: math.cos(w * r), tail_terms=tail, freq=w)
    assert val == pytest.approx(2 / (2 * math.pi) * 0.5 * math.pi * math.exp(-w), rel=1e-8)


def test_radial_integral_singular_density():
    # Riesz-type r^{-1/2} e^{-r^2} in d = 1 against a Gamma function
    dens = q.RadialDensity(lambda r: r**-0.5, "power", decay=0.5, singular=0.5)
    val = q.radial_integral(dens, 1, lambda r: math.exp(-r * r), cutoff=12.0)
    assert val == pytest.approx(2 / (2 * math.pi) * 0.5 * math.gamma(0.25), rel=1e-9)


def test_radial_integral_rejects_slow_decay():
    dens = q.RadialDensity(lambda r: 1.0 / (1 + r), "power", decay=1.0)
    with pytest.raises(QuadratureFail):
        q.radial_integral(dens, 1, lambda r: 1.0, decay=0.0)


@given(st.integers(1, 12), st.integers(1, 5))
def test_gauss_legendre_exact_on_polynomials(n, panels):
    x, w = q.gauss_legendre(-1.0, 2.0, n, panels)
    k = 2 * n - 1
    assert float(np.sum(w * x**k)) == pytest.approx((2.0 ** (k + 1) - (-1.0) ** (k + 1)) / (k + 1), rel=1e-10, abs=1e-10)


def test_block_streams_independent_of_pool():
    fn = lambda rng, size: rng.standard_normal(size)
    serial = streams.run_trials(fn, 30000, 1, "k", block_size=4096)
    with ThreadPoolExecutor(8) as pool:
        threaded = streams.run_trials(fn, 30000, 1, "k", pool=pool, block_size=4096)
    assert np.array_equal(serial, threaded)
    assert serial.size == 30000
    other = streams.run_trials(fn, 30000, 1, "other", block_size=4096)
    assert not np.array_equal(serial, other)
    assert streams.run_trials(fn, 0, 1, "k").size == 0


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=50))
def test_fmean_order_independent(xs):
    assert streams.fmean(xs) == streams.fmean(list(reversed(xs)))


def test_estimates():
    rng = streams.block_generator(0, "est", 0)
    x = rng.standard_normal(200000)
    m4 = streams.moment_estimate(x, 4.0)
    assert m4.within(3.0, 4.0)
    n4 = streams.norm_estimate(x, 4.0)
    assert n4.within(3.0 ** 0.25, 4.0)
    r = streams.ratio_estimate(x * x, np.ones_like(x))
    assert r.within(1.0, 4.0)
