"""Coloration kernels, their spectral measures and the Dalang integral.

A kernel of family Heat, Riesz or Bessel with parameter ``alpha`` is the
function ``kappa`` whose squared Fourier transform is

* Heat:   ``g(xi) = exp(-alpha |xi|^2 / 2)``,
* Riesz:  ``g(xi) = |xi|^{-alpha}``          (``0 < alpha < d``),
* Bessel: ``g(xi) = (1 + |xi|^2)^{-alpha/2}``,

and the spectral measure is ``mu(dxi) = (2 pi)^{-d} g(xi) dxi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, special

from . import quadrature as q
from .errors import ConfigError, DivergentIntegral, DomainError, GridTooCoarse, Unsupported

FAMILIES = ("heat", "riesz", "bessel")

# growth exponent above which the cutoff integral is declared divergent
DIVERGENCE_SLOPE = -0.05


@dataclass(frozen=True)
class ColorationKernel:
    """Spatial coloration kernel.

    Parameters
    ----------
    family : {"heat", "riesz", "bessel"}
    alpha : float
        Positive parameter; ``alpha < dim`` for the Riesz family.
    dim : int
        Spatial dimension.
    """

    family: str
    alpha: float
    dim: int = 1

    def __post_init__(self):
        fam = str(self.family).lower()
        object.__setattr__(self, "family", fam)
        if fam not in FAMILIES:
            raise ConfigError(f"unknown kernel family {self.family!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ConfigError("dimension must be a positive integer")
        object.__setattr__(self, "dim", int(self.dim))
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        if fam == "riesz" and not self.alpha < self.dim:
            raise ConfigError("the Riesz family needs alpha < dim")

    # spectral side

    def profile(self, r):
        """Radial spectral density ``g(r)``."""
        r = np.asarray(r, dtype=float)
        a = float(self.alpha)
        if self.family == "heat":
            out = np.exp(-0.5 * a * r * r)
        elif self.family == "riesz":
            with np.errstate(divide="ignore"):
                out = r ** (-a)
        else:
            out = (1.0 + r * r) ** (-0.5 * a)
        return out if out.ndim else float(out)

    def amplitude(self, r):
        """``|F kappa|`` as a function of ``|xi|`` (square root of the density)."""
        return np.sqrt(self.profile(r))

    def spectral_density(self, xi):
        """``g(xi) = |F kappa(xi)|^2``."""
        r = radius(xi, self.dim)
        if self.family == "riesz" and np.any(r == 0):
            raise DomainError("Riesz spectral density is singular at the origin")
        return self.profile(r)

    @cached_property
    def radial(self) -> q.RadialDensity:
        a = float(self.alpha)
        prof = lambda r: float(self.profile(r))
        if self.family == "heat":
            return q.RadialDensity(prof, "gauss", gauss_rate=0.5 * a)
        if self.family == "riesz":
            return q.RadialDensity(lambda r: r ** (-a), "power", decay=a, singular=a)
        return q.RadialDensity(prof, "power", decay=a)

    def mu_integral(self, h, **kw) -> float:
        """``int h(|xi|) mu(dxi)``; keyword arguments go to :func:`quadrature.radial_integral`."""
        return q.radial_integral(self.radial, self.dim, h, **kw)

    @property
    def total_mass(self) -> float:
        """``mu(R^d)``; infinite unless Heat, or Bessel with ``alpha > d``."""
        d, a = self.dim, float(self.alpha)
        if self.family == "heat":
            return (2.0 * math.pi * a) ** (-d / 2.0)
        if self.family == "bessel" and a > d:
            return (2.0 * math.pi) ** (-d) * math.pi ** (d / 2.0) * math.gamma((a - d) / 2.0) / math.gamma(a / 2.0)
        return math.inf

    def sample_mu(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draws from ``mu / mu(R^d)``, shape ``(size, d)``."""
        d, a = self.dim, float(self.alpha)
        z = rng.standard_normal((size, d))
        if self.family == "heat":
            return z / math.sqrt(a)
        if self.family == "bessel" and a > d:
            w = rng.chisquare(a - d, size)
            return z / np.sqrt(w)[:, None]
        raise Unsupported("the spectral measure has infinite mass and cannot be normalised")

    # spatial side

    def kappa_eval(self, x):
        """Evaluate ``kappa`` at spatial points.

        For ``dim == 1`` ``x`` holds scalars; otherwise its last axis has
        length ``dim``.
        """
        r = radius(x, self.dim)
        d, a = self.dim, 0.5 * float(self.alpha)
        if self.family == "heat":
            out = (math.pi * self.alpha) ** (-d / 2.0) * np.exp(-r * r / self.alpha)
            return out if np.ndim(out) else float(out)
        if self.family == "riesz":
            if np.any(r == 0):
                raise DomainError("Riesz kernel is singular at the origin")
            out = riesz_constant(d, a) * r ** (-(d - a))
            return out if np.ndim(out) else float(out)
        if np.any(r == 0) and d - a >= 0:
            raise DomainError("Bessel kernel is singular at the origin")
        vec = np.vectorize(lambda s: bessel_potential(d, a, s), otypes=[float])
        out = vec(r)
        return out if np.ndim(out) else float(out)

    # Dalang condition

    def dalang_check(self) -> bool:
        d, a = self.dim, float(self.alpha)
        if self.family == "heat":
            return True
        if self.family == "riesz":
            return d - 2 < a < d
        return a > d - 2

    def cutoff_growth(self) -> float:
        """Growth exponent of ``int_0^R (1 + r^2)^{-1} dmu`` in ``R`` beyond ``R = 1e3``."""
        if self.family == "heat":
            return -math.inf
        return q.cutoff_growth_exponent(self.radial, self.dim, lambda r: 1.0 / (1.0 + r * r))

    def cutoff_stable(self) -> bool:
        """Operational convergence verdict for the Dalang integral."""
        return self.cutoff_growth() <= DIVERGENCE_SLOPE

    def dalang_integral(self, force: bool = False) -> float:
        """``C_mu = int (1 + |xi|^2)^{-1} mu(dxi)``.

        When the analytic criterion fails the integral is refused, unless
        ``force`` is set, in which case the cutoff-growth test decides.
        """
        if force:
            if not self.cutoff_stable():
                raise DivergentIntegral(f"{self}: cutoff integral keeps growing")
        elif not self.dalang_check():
            raise DivergentIntegral(f"{self}: Dalang condition fails")
        return self.mu_integral(lambda r: 1.0 / (1.0 + r * r), decay=-2.0)

    def require_dalang(self) -> None:
        if not self.dalang_check():
            raise DivergentIntegral(f"{self}: Dalang condition fails")


def radius(x, dim: int):
    """Euclidean norm of points, scalars allowed in one dimension."""
    x = np.asarray(x, dtype=float)
    if dim == 1:
        if x.ndim and x.shape[-1:] == (1,):
            x = x[..., 0]
        r = np.abs(x)
    else:
        if x.shape[-1:] != (dim,):
            raise ValueError(f"points must have a last axis of length {dim}")
        r = np.sqrt(np.sum(x * x, axis=-1))
    return r if r.ndim else float(r)


def riesz_constant(d: int, a: float) -> float:
    """Normalising constant of the Riesz potential of order ``a``."""
    return math.pi ** (-d / 2.0) * 2.0 ** (-a) * math.gamma((d - a) / 2.0) / math.gamma(a / 2.0)


def bessel_potential(d: int, a: float, r: float) -> float:
    """Bessel potential of order ``a`` in ``R^d`` at distance ``r``.

    Adaptive quadrature of the subordination integral over ``w`` written in
    ``s = log w``, split at the maximum of the integrand.
    """
    if r == 0.0:
        if a <= d:
            raise DomainError("Bessel kernel is singular at the origin")
        return math.gamma((a - d) / 2.0) / (math.gamma(a / 2.0) * (4.0 * math.pi) ** (d / 2.0))
    c = 0.5 * (a - d)
    peak = math.log(0.5 * c + math.sqrt(0.25 * c * c + 0.25 * r * r))
    lg = -math.lgamma(a / 2.0) - 0.5 * d * math.log(4.0 * math.pi)

    def lf(s):
        return c * s - math.exp(s) - 0.25 * r * r * math.exp(-s)

    top = lf(peak)

    def f(s):
        if abs(s) > 700.0:
            return 0.0
        return math.exp(lf(s) - top)

    opts = dict(epsabs=0.0, epsrel=1e-12, limit=500)
    left = integrate.quad(f, -np.inf, peak, **opts)[0]
    right = integrate.quad(f, peak, np.inf, **opts)[0]
    return math.exp(lg + top) * (left + right)


def bessel_potential_closed(d: int, a: float, r: float) -> float:
    """Closed form through the modified Bessel function ``K``; used for checks."""
    nu = 0.5 * (a - d)
    return (
        (4.0 * math.pi) ** (-d / 2.0)
        / math.gamma(a / 2.0)
        * 2.0
        * (0.5 * r) ** nu
        * special.kv(nu, r)
    )


def inner0(phi, psi, kernel: ColorationKernel, dx: float, pad: int = 8, check: bool = True) -> float:
    """``<phi, psi>_0 = (2 pi)^{-d} int F phi conj(F psi) g dxi`` from grid samples.

    ``phi`` and ``psi`` are arrays of equal shape, sampled on a uniform grid of
    spacing ``dx`` along each of the ``kernel.dim`` axes, and assumed to vanish
    outside it. The Fourier transforms come from a zero-padded FFT and the
    frequency integral is a Riemann sum on the FFT lattice. For the Riesz
    family the cell containing ``xi = 0`` is integrated exactly over the ball
    of equal volume.

    Raises
    ------
    GridTooCoarse
        If halving the sampling resolution moves the result by more than
        ``1e-4`` relative.
    """
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if phi.shape != psi.shape or phi.ndim != kernel.dim:
        raise ValueError("phi and psi must be arrays of the same shape with one axis per dimension")
    full = _inner0_grid(phi, psi, kernel, dx, pad)
    if check:
        sl = tuple(slice(None, None, 2) for _ in range(phi.ndim))
        half = _inner0_grid(phi[sl], psi[sl], kernel, 2.0 * dx, 2 * pad)
        scale = max(abs(full), math.sqrt(abs(_inner0_grid(phi, phi, kernel, dx, pad) * _inner0_grid(psi, psi, kernel, dx, pad))))
        if scale > 0 and abs(full - half) > 1e-4 * scale:
            raise GridTooCoarse(f"inner product changes by {abs(full - half) / scale:.2e} under resolution halving")
    return full


def _inner0_grid(phi, psi, kernel, dx, pad) -> float:
    d = kernel.dim
    shape = tuple(pad * n for n in phi.shape)
    axes_ix = tuple(range(d))
    fphi = np.fft.fftn(phi, s=shape, axes=axes_ix)
    fpsi = np.fft.fftn(psi, s=shape, axes=axes_ix)
    axes = [2.0 * np.pi * np.fft.fftfreq(n, d=dx) for n in shape]
    mesh = np.meshgrid(*axes, indexing="ij")
    r = np.sqrt(sum(m * m for m in mesh))
    dxi = np.prod([2.0 * np.pi / (n * dx) for n in shape])
    cross = np.real(fphi * np.conj(fpsi)) * dx ** (2 * d)
    origin = (0,) * d
    if kernel.family == "riesz":
        g = np.zeros_like(r)
        nz = r > 0
        g[nz] = kernel.profile(r[nz])
        rho = (dxi / (math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0))) ** (1.0 / d)
        cell = q.sphere_area(d) * rho ** (d - kernel.alpha) / (d - kernel.alpha)
        total = math.fsum((cross * g).ravel().tolist()) * dxi + cross[origin] * cell
    else:
        g = kernel.profile(r)
        total = math.fsum((cross * g).ravel().tolist()) * dxi
    return (2.0 * math.pi) ** (-d) * total
