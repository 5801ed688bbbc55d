"""Chaos-side quantities of the multiplicative equation.

With ``|F G_t|^2`` the squared symbol of the heat or wave operator and ``mu``
the spectral measure of the coloration kernel:

* ``K(t) = sup_eta int |F G_t(xi + eta)|^2 mu(dxi)`` and ``A_T = int_0^T K``;
* ``J_n(t)``, the integral over ordered times ``0 < t_1 < ... < t_n < t`` and
  ``mu^n`` of ``prod_j |F G_{t_{j+1} - t_j}(xi_1 + ... + xi_j)|^2`` with
  ``t_{n+1} = t``;
* certified bounds for the series ``sum_n m_2^n t^n J_n(t)``;
* the first chaos term and the Poisson/Gaussian second-moment equivalence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from . import quadrature as q
from . import streams
from .errors import ConfigError, Unsupported
from .kernels import ColorationKernel
from .measure import LevyMeasure
from .operators import GreenOperator, jp_spectral_l2

MC_MAX_ORDER = 3


def _check(op: GreenOperator, kernel: ColorationKernel) -> None:
    if op.dim != kernel.dim:
        raise ConfigError("operator and kernel dimensions differ")
    kernel.require_dalang()


def d_const(t: float) -> float:
    """``D_t = 2 max(t^2, 1)``, so that ``sin^2(t r) / r^2 <= D_t / (1 + r^2)``."""
    return 2.0 * max(t * t, 1.0)


def sq_symbol(op: GreenOperator, s, r):
    """``|F G_s|^2`` at radius ``r`` (vectorised in both arguments)."""
    s = np.asarray(s, dtype=float)
    r = np.asarray(r, dtype=float)
    if op.family == "heat":
        return np.exp(-s * r * r)
    return (s * np.sinc(s * r / np.pi)) ** 2


# K(t) and A_T


def k_sup(op: GreenOperator, kernel: ColorationKernel, t: float) -> float:
    """``K(t)``: exact for the heat operator, the certified bound ``D_t C_mu`` for the wave operator."""
    _check(op, kernel)
    if op.family == "heat":
        if t == 0:
            return kernel.total_mass
        return jp_spectral_l2(op, kernel, t)
    return d_const(t) * kernel.dalang_integral()


def k_shifted(op: GreenOperator, kernel: ColorationKernel, t: float, eta) -> float:
    """``int exp(-t |xi + eta|^2) mu(dxi)`` for the heat operator.

    The angular average of ``exp(-2 t r s cos(theta))`` over the sphere is
    ``Gamma(d/2) (x/2)^{-nu} I_nu(x)`` with ``x = 2 t r s`` and ``nu = d/2 - 1``,
    which leaves a one-dimensional radial integral.
    """
    _check(op, kernel)
    if op.family != "heat":
        raise Unsupported("shifted spectral integrals are implemented for the heat operator")
    if not t > 0:
        raise ValueError("t must be positive")
    d = op.dim
    s = float(np.linalg.norm(np.atleast_1d(np.asarray(eta, dtype=float))))
    if s == 0.0:
        return k_sup(op, kernel, t)
    nu = 0.5 * d - 1.0
    lg = math.lgamma(0.5 * d)

    def h(r):
        x = 2.0 * t * r * s
        base = math.exp(-t * (r - s) ** 2)
        if x < 1e-8:
            return base * math.exp(-x) * (1.0 + x * x / (4.0 * (nu + 1.0)))
        return base * math.exp(lg - nu * math.log(0.5 * x)) * float(special.ive(nu, x))

    cutoff = s + 1.0 + math.sqrt(78.0 / t)
    return kernel.mu_integral(h, cutoff=cutoff, freq=2.0 * math.pi * math.sqrt(t))


def heat_shift_closed(t: float, alpha: float, d: int, eta) -> float:
    """Closed form of :func:`k_shifted` for Heat-kernel coloration."""
    s2 = float(np.sum(np.square(np.atleast_1d(np.asarray(eta, dtype=float)))))
    a = t + 0.5 * alpha
    return (2.0 * math.pi) ** (-d) * (math.pi / a) ** (0.5 * d) * math.exp(-s2 * t * 0.5 * alpha / a)


def a_integral(op: GreenOperator, kernel: ColorationKernel, T: float) -> float:
    """``A_T = int_0^T K(t) dt``.

    Heat: adaptive quadrature of ``K`` in time. Wave: the certificate
    ``T D_T C_mu``; see :func:`a_integral_swapped` for the ``eta = 0`` lower
    reference.
    """
    _check(op, kernel)
    if T == 0:
        return 0.0
    if op.family == "wave":
        return T * d_const(T) * kernel.dalang_integral()
    val, _ = integrate.quad(lambda s: k_sup(op, kernel, s) if s > 0 else kernel.total_mass, 0.0, T,
                            epsabs=0.0, epsrel=1e-10, limit=200)
    return val


def a_integral_swapped(op: GreenOperator, kernel: ColorationKernel, T: float) -> float:
    """``int mu(dxi) int_0^T |F G_t(xi)|^2 dt`` with the time integral in closed form.

    Equals ``A_T`` for the heat operator and bounds it from below for the wave
    operator.
    """
    _check(op, kernel)
    if T == 0:
        return 0.0
    return kernel.mu_integral(**op.time_sq_symbol_weight(T))


# simplex integrals of K


class _PowerTable:
    """Positive function on ``(0, t]`` tabulated as a cubic spline in log-log
    coordinates, continued as a power law below the first node."""

    def __init__(self, s: np.ndarray, v: np.ndarray):
        self.s0 = float(s[0])
        ls, lv = np.log(s), np.log(v)
        self.spline = CubicSpline(ls, lv)
        self.slope = float((lv[1] - lv[0]) / (ls[1] - ls[0]))
        self.v0 = float(v[0])

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        pos = s > 0
        small = pos & (s < self.s0)
        big = pos & ~small
        out[big] = np.exp(self.spline(np.log(s[big])))
        out[small] = self.v0 * (s[small] / self.s0) ** self.slope
        return out

    def head(self, eps: float) -> float:
        """``int_0^eps`` of the power-law continuation (``eps <= s0``)."""
        e = self.slope + 1.0
        if e <= 0:
            raise Unsupported("tabulated function is not integrable at zero")
        return self.v0 * self.s0 * (eps / self.s0) ** e / e


_DECADES = 12
_TABLE_POINTS = 400


def _graded_rule(levels: int = 24, order: int = 8):
    """Gauss-Legendre nodes on ``[eps, 1 - eps]``, ``eps = 2^-levels``, with
    panels graded geometrically towards both ends."""
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 ** np.arange(levels, 0, -1)
    edges = np.concatenate([half, 1.0 - half[::-1][1:]])
    a, b = edges[:-1], edges[1:]
    nodes = (0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * x[None, :]).ravel()
    weights = (0.5 * (b - a)[:, None] * w[None, :]).ravel()
    return nodes, weights, float(edges[0])


@lru_cache(maxsize=64)
def _k_table(op: GreenOperator, kernel: ColorationKernel, t: float) -> _PowerTable:
    s = t * np.geomspace(10.0 ** (-_DECADES), 1.0, _TABLE_POINTS)
    v = np.array([k_sup(op, kernel, float(x)) for x in s])
    return _PowerTable(s, v)


def _convolve(ktab: _PowerTable, prev, u: np.ndarray) -> np.ndarray:
    """``int_0^u K(s) prev(u - s) ds`` for every entry of ``u``."""
    v, w, eps = _graded_rule()
    s = u[:, None] * v[None, :]
    vals = ktab(s) * (np.ones_like(s) if prev is None else prev(u[:, None] - s))
    out = u * (vals * w[None, :]).sum(axis=1)
    # the short pieces next to s = 0 and s = u
    tail_prev = np.ones_like(u) if prev is None else prev(u * (1.0 - 0.5 * eps))
    head = np.array([ktab.head(eps * x) for x in u]) * tail_prev
    near = ktab(u * (1.0 - 0.5 * eps))
    end = near * eps * u if prev is None else near * np.array([prev.head(eps * x) for x in u])
    return out + head + end


def simplex_k_integral(op: GreenOperator, kernel: ColorationKernel, t: float, n: int) -> float:
    """``int_{T_n(t)} K(t - t_n) K(t_n - t_{n-1}) ... K(t_2 - t_1) dt``.

    In gap variables this is ``I_n(t)`` with ``I_0 = 1`` and
    ``I_n(u) = int_0^u K(s) I_{n-1}(u - s) ds``; each ``I_k`` is tabulated in
    log-log coordinates on ``(0, t]``.
    """
    _check(op, kernel)
    if n < 1:
        raise ValueError("n must be at least 1")
    if t == 0:
        return 0.0
    ktab = _k_table(op, kernel, float(t))
    grid = t * np.geomspace(10.0 ** (-_DECADES), 1.0, _TABLE_POINTS)
    prev = None
    for level in range(1, n + 1):
        vals = _convolve(ktab, prev, grid)
        if level == n:
            return float(vals[-1])
        prev = _PowerTable(grid, vals)
    raise AssertionError


def jn_bound(op: GreenOperator, kernel: ColorationKernel, t: float, n: int, method: str = "auto") -> float:
    """Certified upper bound for ``J_n(t)``.

    Wave: ``(D_t C_mu)^n t^n / n!``. Heat: the simplex integral of products of
    ``K`` for ``n <= 3`` (``method="simplex"``) and ``A_t^n`` otherwise or when
    ``method="power"``.
    """
    _check(op, kernel)
    if n < 1:
        raise ValueError("n must be at least 1")
    if op.family == "wave":
        return (d_const(t) * kernel.dalang_integral() * t) ** n / math.factorial(n)
    if method == "auto":
        method = "simplex" if n <= MC_MAX_ORDER else "power"
    if method == "simplex":
        return simplex_k_integral(op, kernel, t, n)
    if method == "power":
        return a_integral(op, kernel, t) ** n
    raise ValueError(f"unknown method {method!r}")


def j1_quadrature(op: GreenOperator, kernel: ColorationKernel, t: float) -> float:
    """``J_1(t) = int_0^t int |F G_{t-s}|^2 dmu ds`` by radial quadrature."""
    return a_integral_swapped(op, kernel, t)


# Monte Carlo for J_n


@dataclass(frozen=True)
class ChaosTermEstimate:
    """Estimate of ``J_n(t)`` with its certified bound; ``term = m_2^n t^n J_n``."""

    n: int
    t: float
    jn_value: float
    jn_se: float
    jn_bound: float
    term: float

    def consistent(self, k: float = 3.0) -> bool:
        return self.jn_value >= 0.0 and self.jn_value <= self.jn_bound + k * self.jn_se


def _jn_block(op, kernel, t, n):
    def block(rng, size):
        times = np.sort(rng.random((size, n)) * t, axis=1)
        gaps = np.diff(np.concatenate([times, np.full((size, 1), t)], axis=1), axis=1)
        acc = np.zeros((size, kernel.dim))
        prod = np.ones(size)
        for j in range(n):
            acc = acc + kernel.sample_mu(rng, size)
            prod *= sq_symbol(op, gaps[:, j], np.sqrt(np.sum(acc * acc, axis=1)))
        return prod

    return block


def jn_estimate(
    op: GreenOperator,
    kernel: ColorationKernel,
    t: float,
    n: int,
    samples: int,
    seed: int,
    m2: float = 1.0,
    pool=None,
    bound: float | None = None,
) -> ChaosTermEstimate:
    """Monte Carlo estimate of ``J_n(t)`` for spectral measures of finite mass.

    Times are uniform on ``[0, t]^n`` and sorted, so the mean of the product
    times ``t^n / n!`` integrates over the ordered simplex; frequencies are
    drawn from ``mu / mu(R^d)`` and the mass enters as ``mu(R^d)^n``.
    """
    _check(op, kernel)
    if not 1 <= n <= MC_MAX_ORDER:
        raise Unsupported(f"Monte Carlo is available for 1 <= n <= {MC_MAX_ORDER}")
    mass = kernel.total_mass
    if not math.isfinite(mass):
        raise Unsupported("the spectral measure has infinite mass; only bounds are available")
    vals = streams.run_trials(_jn_block(op, kernel, t, n), samples, seed, f"jn/{op.family}/{n}", pool)
    est = streams.mean_estimate(vals)
    scale = mass**n * t**n / math.factorial(n)
    b = jn_bound(op, kernel, t, n) if bound is None else bound
    value = scale * est.value
    return ChaosTermEstimate(n, t, value, scale * est.se, b, m2**n * t**n * value)


# convergence certificate for sum m_2^n t^n J_n(t)


@dataclass(frozen=True)
class SeriesCertificate:
    """Partial sum of term bounds up to ``N`` and a bound for the rest.

    ``status`` is ``"certified"`` when ``tail_bound < tail_tol``, otherwise
    ``"inconclusive"`` (``N`` is then the number of reported terms and the
    tail bound is infinite).
    """

    N: int
    partial_sum: float
    tail_bound: float
    status: str
    method: str
    terms: tuple = field(default=(), repr=False)

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.terms)


def geometric_certificate(rho: float, tail_tol: float, n_max: int = 100000):
    """Smallest ``N`` with ``rho^{N+1} / (1 - rho) < tail_tol`` for ``0 <= rho < 1``."""
    if not 0.0 <= rho < 1.0:
        return None
    terms = []
    for N in range(1, n_max + 1):
        terms.append(rho**N)
        tail = rho ** (N + 1) / (1.0 - rho)
        if tail < tail_tol:
            return N, tuple(terms), tail
    return None


def factorial_certificate(x: float, tail_tol: float, n_max: int = 100000):
    """Smallest ``N`` with ``sum_{n > N} x^n / n! < tail_tol``.

    The remainder is bounded by ``x^{N+1} / (N+1)! / (1 - x / (N+2))`` once
    ``N + 2 > x``. Terms are computed in log space.
    """
    if x < 0:
        raise ValueError("x must be non-negative")
    terms = []
    for N in range(1, n_max + 1):
        terms.append(0.0 if x == 0 else math.exp(N * math.log(x) - math.lgamma(N + 1)))
        if x == 0:
            return N, tuple(terms), 0.0
        if N + 2 > x:
            nxt = math.exp((N + 1) * math.log(x) - math.lgamma(N + 2))
            tail = nxt / (1.0 - x / (N + 2))
            if tail < tail_tol:
                return N, tuple(terms), tail
    return None


def series_certificate(
    op: GreenOperator,
    kernel: ColorationKernel,
    t: float,
    m2: float,
    tail_tol: float = 1e-8,
    method: str = "auto",
    report_terms: int = 10,
) -> SeriesCertificate:
    """Certify convergence of ``sum_{n >= 1} m_2^n t^n J_n(t)``.

    Wave: ``m_2^n t^n J_n <= x^n / n!`` with ``x = m_2 D_t C_mu t^2``.
    Heat, geometric: ``m_2^n t^n J_n <= rho^n`` with ``rho = m_2 t A_t``,
    usable when ``rho < 1``. Heat, factorial: ``K <= mu(R^d)`` gives
    ``x = m_2 mu(R^d) t^2`` when the spectral measure is finite. ``"auto"``
    tries the geometric bound and then the factorial one; when neither
    applies the result is inconclusive.
    """
    _check(op, kernel)
    if not m2 >= 0:
        raise ValueError("m2 must be non-negative")
    if op.family == "wave":
        x = m2 * d_const(t) * kernel.dalang_integral() * t * t
        N, terms, tail = factorial_certificate(x, tail_tol)
        return SeriesCertificate(N, math.fsum(terms), tail, "certified", "factorial", terms)
    rho = m2 * t * a_integral(op, kernel, t)
    tries = {"auto": ("geometric", "factorial"), "geometric": ("geometric",), "factorial": ("factorial",)}
    if method not in tries:
        raise ValueError(f"unknown method {method!r}")
    for m in tries[method]:
        if m == "geometric":
            res = geometric_certificate(rho, tail_tol)
        elif math.isfinite(kernel.total_mass):
            res = factorial_certificate(m2 * kernel.total_mass * t * t, tail_tol)
        else:
            res = None
        if res is not None:
            N, terms, tail = res
            return SeriesCertificate(N, math.fsum(terms), tail, "certified", m, terms)
    terms = tuple(rho**n for n in range(1, report_terms + 1))
    return SeriesCertificate(report_terms, math.fsum(terms), math.inf, "inconclusive", "geometric", terms)


def second_moment_interval(
    op: GreenOperator, kernel: ColorationKernel, t: float, m2: float, tail_tol: float = 1e-8
) -> tuple[float, float, SeriesCertificate]:
    """Bracket for ``E|u(t,x)|^2``: ``1 +`` the first chaos term below, ``1 +`` all term bounds above.

    The upper end is infinite when the certificate is inconclusive.
    """
    first = m2 * first_chaos_lhs(op, kernel, t)
    cert = series_certificate(op, kernel, t, m2, tail_tol)
    upper = 1.0 + cert.partial_sum + cert.tail_bound if cert.status == "certified" else math.inf
    return 1.0 + first, upper, cert


# first chaos term


def first_chaos_lhs(op: GreenOperator, kernel: ColorationKernel, t: float) -> float:
    """``int |H_t|^2 dmu`` with ``H_t`` in closed form and adaptive radial quadrature."""
    _check(op, kernel)
    if t == 0:
        return 0.0
    return kernel.mu_integral(**op.sq_h_weight(t))


def _time_integral(op: GreenOperator, t: float, r: np.ndarray) -> np.ndarray:
    """``int_0^t F G_u(r) du`` by composite Gauss-Legendre, vectorised in ``r``."""
    x, w = np.polynomial.legendre.leggauss(12)
    if op.family == "heat":
        # geometric panels towards u = 0 resolve the layer of width 1 / r^2
        edges = np.array([0.0] + [t * 0.5**k for k in range(60, -1, -1)])
    else:
        rmax = float(np.max(r)) if r.size else 0.0
        edges = np.linspace(0.0, t, int(math.ceil(t * rmax / 2.0)) + 2)
    a, b = edges[:-1], edges[1:]
    u = (0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * x[None, :]).ravel()
    wu = (0.5 * (b - a)[:, None] * w[None, :]).ravel()
    if op.family == "heat":
        vals = np.exp(-0.5 * np.outer(r * r, u))
    else:
        vals = u[None, :] * np.sinc(np.outer(r, u) / np.pi)
    return vals @ wu


def _radial_rule(kernel: ColorationKernel, t: float, op: GreenOperator):
    """Fixed composite rule on ``[0, R]`` with the truncation point and the
    asymptotic constant of ``|H_t|^2 r^4``."""
    x, w = np.polynomial.legendre.leggauss(10)
    d = kernel.dim
    c_inf = 4.0 if op.family == "heat" else 1.5
    if kernel.family == "heat":
        R = math.sqrt(78.0 / (0.5 * kernel.alpha))
    else:
        # g(r) <= r^{-alpha}: choose R with the mean tail below 1e-13
        e = 4.0 + kernel.alpha - d
        R = min(max((1e-13 * e / c_inf) ** (-1.0 / e), 20.0), 2000.0)
    inner = [0.0] + [0.5**k for k in range(40, -1, -1)]
    step = 0.25 if op.family == "heat" else min(0.25, 1.0 / max(t, 1e-12))
    outer = list(np.arange(1.0 + step, R, step)) + [R]
    edges = np.unique(np.array(inner + outer))
    a, b = edges[:-1], edges[1:]
    nodes = (0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * x[None, :]).ravel()
    weights = (0.5 * (b - a)[:, None] * w[None, :]).ravel()
    return nodes, weights, R, c_inf


def first_chaos_rhs(op: GreenOperator, kernel: ColorationKernel, t: float) -> float:
    """``int |int_0^t F G_u du|^2 dmu`` from the chaos-side kernel.

    The time integral of the symbol is done by Gauss-Legendre (no closed form
    for ``H_t``) and the frequency integral by a fixed composite rule; power
    law spectral densities add the mean tail beyond the truncation radius.
    """
    _check(op, kernel)
    if t == 0:
        return 0.0
    d = kernel.dim
    r, w, R, c_inf = _radial_rule(kernel, t, op)
    total = []
    for lo in range(0, r.size, 2048):
        rr = r[lo:lo + 2048]
        h = _time_integral(op, t, rr)
        total.append(np.sum(w[lo:lo + 2048] * rr ** (d - 1) * kernel.profile(rr) * h * h))
    val = math.fsum(total)
    if kernel.family != "heat":
        tail, _ = integrate.quad(lambda s: c_inf * s ** (d - 5) * kernel.profile(s), R, np.inf, epsrel=1e-10)
        val += tail
    return (2.0 * math.pi) ** (-d) * q.sphere_area(d) * val


def first_chaos_identity(op: GreenOperator, kernel: ColorationKernel, t: float, m2: float = 1.0) -> tuple[float, float]:
    """``(m_2 int |H_t|^2 dmu, ||f_1^*||^2)`` computed by independent routines."""
    return m2 * first_chaos_lhs(op, kernel, t), m2 * first_chaos_rhs(op, kernel, t)


# Poisson versus Gaussian chaos norms


@dataclass(frozen=True)
class EquivalenceResult:
    """Poisson chaos norm, ``m_2^n`` times the Gaussian one, and their ratio."""

    n: int
    poisson_term: float
    gaussian_term: float
    ratio: float
    ratio_se: float


def _second_order_kernel(op: GreenOperator, t: float, x1: np.ndarray, x2: np.ndarray, order: int = 20) -> np.ndarray:
    """``int_{0<t_1<t_2<t} F G_{t-t_2}(|x1 + x2|) F G_{t_2-t_1}(|x1|) dt`` per sample row.

    Duffy map ``t_1 = t_2 v`` and tensor Gauss-Legendre on ``[0, t] x [0, 1]``.
    """
    g, gw = np.polynomial.legendre.leggauss(order)
    u = 0.5 * t * (g + 1.0)
    uw = 0.5 * t * gw
    v = 0.5 * (g + 1.0)
    vw = 0.5 * gw
    r1 = np.sqrt(np.sum(x1 * x1, axis=1))
    r12 = np.sqrt(np.sum((x1 + x2) ** 2, axis=1))

    def sym(s, r):
        if op.family == "heat":
            return np.exp(-0.5 * s * r * r)
        return s * np.sinc(s * r / np.pi)

    out = np.zeros(x1.shape[0])
    for t2, w2 in zip(u, uw):
        outer = sym(t - t2, r12)
        gap = t2 * (1.0 - v)
        inner = sym(gap[None, :], r1[:, None]) @ vw * t2
        out += w2 * outer * inner
    return out


def gaussian_equivalence(
    op: GreenOperator,
    kernel: ColorationKernel,
    t: float,
    n: int,
    nu: LevyMeasure,
    samples: int = 100000,
    seed: int = 0,
    pool=None,
) -> EquivalenceResult:
    """Compare ``n! ||f~_n^*||^2`` with ``m_2^n n! ||f~_n||^2`` for ``n <= 2``.

    ``n = 1`` is deterministic: both sides share the spectral integral and
    differ only in how the jump moment enters. ``n = 2`` draws
    ``(xi_1, z_1, xi_2, z_2)`` once; the Poisson path weights the symmetrised
    spectral kernel by the sampled ``z_1^2 z_2^2``, the Gaussian path by
    ``m_2^2``.
    """
    _check(op, kernel)
    m2 = nu.moment(2.0)
    if n == 1:
        base = first_chaos_lhs(op, kernel, t)
        jump = nu.integral(lambda z: z * z)
        poisson = jump * base
        gaussian = m2 * base
        return EquivalenceResult(1, poisson, gaussian, poisson / gaussian, 0.0)
    if n != 2:
        raise Unsupported("the equivalence check covers n = 1 and n = 2")
    mass = kernel.total_mass
    if not math.isfinite(mass):
        raise Unsupported("the spectral measure has infinite mass")
    nu_mass = nu.total_mass

    def block(rng, size):
        x1 = kernel.sample_mu(rng, size)
        x2 = kernel.sample_mu(rng, size)
        z = nu.sample(rng, 2 * size).reshape(size, 2)
        f12 = _second_order_kernel(op, t, x1, x2)
        f21 = _second_order_kernel(op, t, x2, x1)
        sym = 0.25 * (f12 + f21) ** 2
        return np.stack([nu_mass**2 * (z[:, 0] * z[:, 1]) ** 2 * sym, m2 * m2 * sym], axis=1)

    data = streams.run_trials(block, samples, seed, f"equivalence/{op.family}", pool)
    scale = 2.0 * mass * mass
    rat = streams.ratio_estimate(data[:, 0], data[:, 1])
    poisson = scale * streams.fmean(data[:, 0])
    gaussian = scale * streams.fmean(data[:, 1])
    return EquivalenceResult(2, poisson, gaussian, rat.value, rat.se)
