"""Radial spectral quadrature.

Every second-moment quantity in the package has the form

    (2 pi)^{-d} * omega_d * int_0^inf r^{d-1} g(r) h(r) dr

with ``g`` the radial spectral density of a coloration kernel and ``h`` a
radial weight built from Green-function symbols. The integrand is split at
``r = 1``:

* on ``[0, 1]`` the Riesz singularity ``r^{-alpha}`` is removed by the
  substitution ``r = u^{1/(d - alpha)}``;
* on ``[1, inf)`` power-law integrands are mapped to ``(0, 1]`` by
  ``r = u^{-1/b}`` with ``b`` chosen from the decay exponent, oscillatory
  terms ``amp(r) cos(w r)`` / ``amp(r) sin(w r)`` go to QUADPACK's Fourier
  integrator, and Gaussian-decaying integrands are integrated on a finite
  range cut into short pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import QuadratureFail

EPSABS = 1e-14
EPSREL = 1e-12
LIMIT = 400


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True)
class Term:
    """One additive piece ``amp(r) * osc(w r)`` of a radial weight.

    Parameters
    ----------
    amp : callable
        Vectorised-or-scalar amplitude in ``r``.
    decay : float
        Exponent ``e`` with ``amp(r) ~ r^e`` as ``r -> inf`` (ignored when the
        spectral density is Gaussian).
    kind : {"none", "cos", "sin"}
    freq : float
        Angular frequency ``w`` of the oscillating factor.
    """

    amp: Callable[[float], float]
    decay: float
    kind: str = "none"
    freq: float = 0.0

    def __call__(self, r: float) -> float:
        a = self.amp(r)
        if self.kind == "cos":
            return a * math.cos(self.freq * r)
        if self.kind == "sin":
            return a * math.sin(self.freq * r)
        return a


def _quad(f, a, b, **kw) -> float:
    val, err = integrate.quad(f, a, b, epsabs=EPSABS, epsrel=EPSREL, limit=LIMIT, full_output=1, **kw)[:2]
    if not math.isfinite(val):
        raise QuadratureFail(f"non-finite quadrature on [{a}, {b}]")
    if err > max(1e-7 * abs(val), 1e-11):
        raise QuadratureFail(f"quadrature error {err:.3g} on [{a}, {b}] for value {val:.6g}")
    return val


def _pieces(a: float, b: float, width: float) -> np.ndarray:
    n = max(1, int(math.ceil((b - a) / width)))
    return np.linspace(a, b, n + 1)


def integrate_finite(f, a: float, b: float, freq: float = 0.0) -> float:
    """Adaptive integral of ``f`` on ``[a, b]``.

    Oscillatory integrands are cut into pieces spanning a few periods;
    smooth ones on long ranges into geometrically growing pieces.
    """
    if b <= a:
        return 0.0
    if freq > 0:
        width = min(max(8.0 * math.pi / freq, 1e-3), 4.0)
        edges = _pieces(a, b, width)
    elif a > 0 and b / a > 4.0:
        edges = np.geomspace(a, b, int(math.ceil(math.log2(b / a))) + 1)
    elif b - a > 8.0:
        edges = _pieces(a, b, 4.0)
    else:
        edges = np.array([a, b])
    return math.fsum(_quad(f, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))


def _power_tail(f, e: float) -> float:
    """``int_1^inf f(r) dr`` for ``f(r) ~ r^e`` with ``e < -1``."""
    b = -(e + 1.0)
    if b <= 0:
        raise QuadratureFail("tail integrand does not decay fast enough")

    def g(u):
        if u <= 0.0:
            return 0.0
        r = u ** (-1.0 / b)
        if not math.isfinite(r):
            return 0.0
        return f(r) * r / (b * u)

    return _quad(g, 0.0, 1.0)


def _oscillatory_tail(f_amp, kind: str, freq: float) -> float:
    """``int_1^inf f_amp(r) trig(freq r) dr`` using the Fourier-integral rule."""
    val, err = integrate.quad(
        lambda s: f_amp(s + 1.0),
        0.0,
        np.inf,
        weight=kind,
        wvar=freq,
        limlst=200,
        epsabs=1e-15,
        full_output=1,
    )[:2]
    return val, err


def _trig_shift_tail(f_amp, kind: str, freq: float) -> float:
    # trig(freq * (s + 1)) expanded by the addition formulas
    c, s = math.cos(freq), math.sin(freq)
    ic, ec = _oscillatory_tail(f_amp, "cos", freq)
    is_, es = _oscillatory_tail(f_amp, "sin", freq)
    if kind == "cos":
        val = c * ic - s * is_
    else:
        val = s * ic + c * is_
    err = ec + es
    if err > max(1e-9 * abs(val), 1e-12):
        raise QuadratureFail(f"oscillatory tail error {err:.3g}")
    return val


@dataclass(frozen=True)
class RadialDensity:
    """Radial spectral profile ``g(r)`` with its behaviour at the ends.

    ``kind`` is ``"gauss"`` for ``exp(-c r^2)``, ``"power"`` when
    ``g(r) ~ r^{-decay}`` at infinity, and ``singular`` is the exponent
    ``s`` with ``g(r) = r^{-s}`` exactly (Riesz), else ``None``.
    """

    profile: Callable[[float], float]
    kind: str
    decay: float = 0.0
    gauss_rate: float = 0.0
    singular: float | None = None

    def cutoff(self) -> float:
        """Radius beyond which a Gaussian profile is below ``1e-34`` of its peak."""
        return math.sqrt(78.0 / self.gauss_rate)


def radial_integral(
    dens: RadialDensity,
    d: int,
    h: Callable[[float], float],
    decay: float | None = None,
    tail_terms: Sequence[Term] | None = None,
    cutoff: float | None = None,
    freq: float = 0.0,
) -> float:
    """``(2 pi)^{-d} omega_d int_0^inf r^{d-1} g(r) h(r) dr``.

    Parameters
    ----------
    dens : RadialDensity
    d : int
    h : callable
        Radial weight, written in a form that is accurate near ``r = 0``.
    decay : float, optional
        ``h(r) ~ r^decay`` at infinity, for non-oscillating ``h``.
    tail_terms : sequence of Term, optional
        Decomposition of ``h`` on ``[1, inf)`` into power-law and trigonometric
        pieces, used with power-law densities.
    cutoff : float, optional
        Radius beyond which ``h`` is negligible (Gaussian-type weights).
    freq : float
        Largest angular frequency present in ``h``.
    """
    pref = (2.0 * math.pi) ** (-d) * sphere_area(d)

    def full(r):
        return r ** (d - 1) * dens.profile(r) * h(r)

    if dens.singular is not None:
        k = d - dens.singular
        if k <= 0:
            raise QuadratureFail("spectral singularity at the origin is not integrable")
        # r = u^{1/k} turns r^{d-1-s} dr into du / k
        head = integrate_finite(lambda u: h(u ** (1.0 / k)) / k, 0.0, 1.0, freq)
    else:
        head = integrate_finite(full, 0.0, 1.0, freq)

    if dens.kind == "gauss" or cutoff is not None:
        top = min(dens.cutoff() if dens.kind == "gauss" else math.inf, math.inf if cutoff is None else cutoff)
        tail = integrate_finite(full, 1.0, top, freq)
    else:
        if tail_terms is None:
            if decay is None:
                raise ValueError("power-law densities need the decay of h or a tail decomposition")
            tail_terms = [Term(h, decay)]
        parts = []
        for t in tail_terms:
            base = lambda r, t=t: r ** (d - 1) * dens.profile(r) * t.amp(r)
            if t.kind == "none" or (t.freq == 0.0 and t.kind == "cos"):
                parts.append(_power_tail(base, (d - 1) - dens.decay + t.decay))
            elif t.freq != 0.0:
                parts.append(_trig_shift_tail(base, t.kind, t.freq))
        tail = math.fsum(parts)
    return pref * (head + tail)


def power_increment(dens: RadialDensity, d: int, h, a: float) -> float:
    """``int_a^{2a} r^{d-1} g(r) h(r) dr`` (no normalisation)."""
    return _quad(lambda r: r ** (d - 1) * dens.profile(r) * h(r), a, 2.0 * a)


def cutoff_growth_exponent(dens: RadialDensity, d: int, h, r0: float = 1e3) -> float:
    """Empirical growth exponent of the cutoff integral beyond ``r0``.

    With ``D_k`` the contribution of ``[2^k r0, 2^{k+1} r0]`` the exponent is
    ``log2(D_2 / D_1)``; a non-negative value means the integral keeps growing
    without bound. Returns ``-inf`` when the increments vanish.
    """
    d1 = power_increment(dens, d, h, 2.0 * r0)
    d2 = power_increment(dens, d, h, 4.0 * r0)
    if d1 <= 0.0 or d2 <= 0.0:
        return -math.inf
    return math.log2(d2 / d1)


def gauss_legendre(a: float, b: float, n: int, panels: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def simpson(y: np.ndarray, x: np.ndarray) -> float:
    return float(integrate.simpson(y, x=x))
