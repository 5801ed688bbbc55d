import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from levy_spde import ColorationKernel
from levy_spde.errors import ConfigError, DivergentIntegral, DomainError, GridTooCoarse, Unsupported
from levy_spde.kernels import bessel_potential, bessel_potential_closed, inner0, riesz_constant
from levy_spde.streams import block_generator


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 3.0])
def test_heat_total_mass_closed_vs_quadrature(d, alpha):
    k = ColorationKernel("heat", alpha, d)
    assert k.mu_integral(lambda r: 1.0) == pytest.approx(k.total_mass, rel=1e-10)


@pytest.mark.parametrize("d, alpha", [(1, 2.0), (1, 3.5), (2, 3.0), (3, 5.0)])
def test_bessel_total_mass_closed_vs_quadrature(d, alpha):
    k = ColorationKernel("bessel", alpha, d)
    assert k.mu_integral(lambda r: 1.0, decay=0.0) == pytest.approx(k.total_mass, rel=1e-8)


def test_infinite_mass_cases():
    assert ColorationKernel("riesz", 0.5, 1).total_mass == math.inf
    assert ColorationKernel("bessel", 1.0, 1).total_mass == math.inf
    with pytest.raises(Unsupported):
        ColorationKernel("bessel", 1.0, 1).sample_mu(block_generator(0, "k", 0), 10)


@pytest.mark.parametrize("k", [ColorationKernel("heat", 2.0, 2), ColorationKernel("bessel", 6.0, 2)])
def test_sample_mu_second_moment(k):
    # E|xi|^2 under mu / mu(R^d), computed by radial quadrature
    target = k.mu_integral(lambda r: r * r, decay=2.0) / k.total_mass
    xi = k.sample_mu(block_generator(5, "mu", 0), 400000)
    r2 = np.sum(xi * xi, axis=1)
    if k.family == "bessel":
        # xi = Z / sqrt(W) with W chi-square on alpha - d degrees of freedom
        assert target == pytest.approx(k.dim / (k.alpha - k.dim - 2.0), rel=1e-8)
    assert abs(r2.mean() - target) < 4 * r2.std() / math.sqrt(r2.size)


@given(st.floats(0.05, 0.95))
def test_riesz_constant_inverts_fourier_transform_d1(a):
    # int_R c |x|^{a-1} e^{-i x} dx = 2 c Gamma(a) cos(pi a / 2) must equal |1|^{-a}
    assert 2.0 * riesz_constant(1, a) * math.gamma(a) * math.cos(0.5 * math.pi * a) == pytest.approx(1.0, rel=1e-12)


@given(st.integers(1, 3), st.floats(0.2, 4.0), st.floats(0.05, 6.0))
def test_bessel_potential_two_routes(d, a, r):
    assert bessel_potential(d, a, r) == pytest.approx(bessel_potential_closed(d, a, r), rel=1e-9)


def test_heat_kappa_normalised():
    k = ColorationKernel("heat", 1.5, 1)
    x = np.linspace(-30, 30, 200001)
    assert np.trapezoid(k.kappa_eval(x), x) == pytest.approx(1.0, rel=1e-9)


def test_singular_kernels_raise_at_origin():
    with pytest.raises(DomainError):
        ColorationKernel("riesz", 0.5, 1).kappa_eval(0.0)
    with pytest.raises(DomainError):
        ColorationKernel("bessel", 1.0, 1).kappa_eval(0.0)
    with pytest.raises(DomainError):
        ColorationKernel("riesz", 0.5, 1).spectral_density(np.array([0.0, 1.0]))


@pytest.mark.parametrize("args", [("cauchy", 1.0, 1), ("heat", 0.0, 1), ("heat", 1.0, 0), ("riesz", 1.5, 1)])
def test_invalid_kernels(args):
    with pytest.raises(ConfigError):
        ColorationKernel(*args)


@given(st.sampled_from(["riesz", "bessel"]), st.integers(1, 3), st.floats(0.1, 3.9))
def test_cutoff_verdict_agrees_with_criterion(family, d, alpha):
    if family == "riesz":
        assume(alpha < d)
    crit = d - 2
    # keep away from the critical exponent, where the cutoff test cannot decide
    assume(abs(alpha - crit) > 0.1)
    k = ColorationKernel(family, alpha, d)
    assert k.cutoff_stable() == k.dalang_check()


def test_dalang_integral_refuses_divergent():
    k = ColorationKernel("bessel", 0.5, 3)
    assert not k.dalang_check()
    with pytest.raises(DivergentIntegral):
        k.dalang_integral()
    with pytest.raises(DivergentIntegral):
        k.dalang_integral(force=True)


def test_dalang_integral_heat_closed_form():
    # int (1 + r^2)^{-1} e^{-r^2/2} dr / (2 pi) = e^{1/2} erfc(1/sqrt 2) / 2 in one dimension
    from scipy.special import erfc
    k = ColorationKernel("heat", 1.0, 1)
    assert k.dalang_integral() == pytest.approx(0.5 * math.exp(0.5) * erfc(1 / math.sqrt(2)), rel=1e-10)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_inner0_gaussian_closed_form(alpha):
    k = ColorationKernel("heat", alpha, 1)
    dx = 0.02
    x = np.arange(-12, 12 + dx / 2, dx)
    phi = np.exp(-0.5 * x * x)
    # F phi = sqrt(2 pi) e^{-xi^2/2}
    expect = math.sqrt(math.pi / (1.0 + 0.5 * alpha))
    assert inner0(phi, phi, k, dx) == pytest.approx(expect, rel=1e-8)


def test_inner0_matches_real_space_route():
    # <phi, psi>_0 = int int phi(x) psi(y) f(x - y) with f = kappa * kappa, a heat kernel of variance alpha
    alpha = 1.0
    k = ColorationKernel("heat", alpha, 1)
    dx = 0.02
    x = np.arange(-10, 10 + dx / 2, dx)
    phi = np.exp(-0.5 * (x - 1.0) ** 2)
    psi = np.exp(-((x + 0.5) ** 2))
    f = np.exp(-0.5 * (x[:, None] - x[None, :]) ** 2 / alpha) / math.sqrt(2 * math.pi * alpha)
    real = float(phi @ f @ psi) * dx * dx
    assert inner0(phi, psi, k, dx) == pytest.approx(real, rel=1e-8)


def test_inner0_riesz_positive_and_grid_check():
    k = ColorationKernel("riesz", 0.5, 1)
    dx = 0.05
    x = np.arange(-10, 10 + dx / 2, dx)
    phi = np.exp(-0.5 * x * x)
    assert inner0(phi, phi, k, dx, check=False) > 0
    rough = np.where(np.abs(x) < 1, 1.0, 0.0)
    with pytest.raises(GridTooCoarse):
        inner0(rough, rough, ColorationKernel("bessel", 0.5, 1), 0.5, pad=2)
