"""Fundamental solutions of the heat and wave operators.

Heat: ``d/dt - Delta/2``, with ``F G_t(xi) = exp(-t |xi|^2 / 2)``.
Wave: ``d^2/dt^2 - Delta``, with ``F G_t(xi) = sin(t |xi|) / |xi|``.

Besides symbols and their time integrals ``H_t`` the module provides the
``L^q`` norms of ``G_t``, the quantity ``J_p(t) = ||G_t * kappa||_{L^p}^2``,
its upper bounds, the power-law exponents of those bounds and the range of
moment orders ``p`` for which the moment envelope of the linear equation is
finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np

from . import quadrature as q
from .errors import ConfigError, GridTooCoarse, Unsupported
from .kernels import ColorationKernel, radius

OPERATORS = ("heat", "wave")


@dataclass(frozen=True)
class GreenOperator:
    """Heat or wave operator in ``dim`` space dimensions."""

    family: str
    dim: int = 1

    def __post_init__(self):
        fam = str(self.family).lower()
        object.__setattr__(self, "family", fam)
        if fam not in OPERATORS:
            raise ConfigError(f"unknown operator {self.family!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ConfigError("dimension must be a positive integer")
        object.__setattr__(self, "dim", int(self.dim))

    # symbols as functions of r = |xi|

    def symbol(self, t: float, r):
        """``F G_t`` as a function of ``r = |xi|``."""
        r = np.asarray(r, dtype=float)
        if self.family == "heat":
            out = np.exp(-0.5 * t * r * r)
        else:
            out = t * np.sinc(t * r / np.pi)
        return out if out.ndim else float(out)

    def h_symbol(self, t: float, r):
        """``H_t = int_0^t F G_{t-s} ds`` as a function of ``r = |xi|``."""
        r = np.asarray(r, dtype=float)
        if self.family == "heat":
            x = 0.5 * t * r * r
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(x > 0, -t * np.expm1(-x) / x, t)
        else:
            out = 0.5 * t * t * np.sinc(0.5 * t * r / np.pi) ** 2
        return out if out.ndim else float(out)

    # radial weights for spectral integrals

    def sq_symbol_weight(self, t: float) -> dict:
        """Arguments of :func:`quadrature.radial_integral` for ``|F G_t|^2``."""
        if self.family == "heat":
            if t == 0:
                return dict(h=lambda r: 1.0, decay=0.0)
            return dict(h=lambda r: math.exp(-t * r * r), cutoff=1.0 + math.sqrt(78.0 / t))
        h = lambda r: (t * float(np.sinc(t * r / np.pi))) ** 2
        if t == 0:
            return dict(h=h, decay=0.0)
        tail = [
            q.Term(lambda r: 0.5 / (r * r), -2.0),
            q.Term(lambda r: -0.5 / (r * r), -2.0, "cos", 2.0 * t),
        ]
        return dict(h=h, tail_terms=tail, freq=2.0 * t)

    def sq_h_weight(self, t: float) -> dict:
        """Arguments of :func:`quadrature.radial_integral` for ``|H_t|^2``."""
        if self.family == "heat":
            return dict(h=lambda r: float(self.h_symbol(t, r)) ** 2, decay=-4.0)
        h = lambda r: float(self.h_symbol(t, r)) ** 2
        if t == 0:
            return dict(h=h, decay=-4.0)
        tail = [
            q.Term(lambda r: 1.5 / r**4, -4.0),
            q.Term(lambda r: -2.0 / r**4, -4.0, "cos", t),
            q.Term(lambda r: 0.5 / r**4, -4.0, "cos", 2.0 * t),
        ]
        return dict(h=h, tail_terms=tail, freq=2.0 * t)

    def sq_symbol_diff_weight(self, t: float, h: float) -> dict:
        """Weight for ``|F G_{t+h} - F G_t|^2``."""
        u = t + h
        if self.family == "heat":
            f = lambda r: math.exp(-t * r * r) * math.expm1(-0.5 * h * r * r) ** 2
            return dict(h=f, cutoff=1.0 + math.sqrt(78.0 / max(t, 1e-12)) if t > 0 else None, decay=0.0)
        f = lambda r: (2.0 * math.cos(0.5 * (u + t) * r) * 0.5 * h * float(np.sinc(0.5 * h * r / np.pi))) ** 2
        tail = _trig_tail(
            lambda r: 1.0 / (r * r), -2.0,
            [(1.0, "cos", 0.0), (-0.5, "cos", 2 * u), (-0.5, "cos", 2 * t), (-1.0, "cos", h), (1.0, "cos", u + t)],
        )
        return dict(h=f, tail_terms=tail, freq=2.0 * u)

    def sq_h_diff_weight(self, t: float, s: float) -> dict:
        """Weight for ``|H_t - H_s|^2``."""
        if self.family == "heat":
            f = lambda r: (float(self.h_symbol(t, r)) - float(self.h_symbol(s, r))) ** 2
            return dict(h=f, decay=-4.0)

        def f(r):
            # cos(sr) - cos(tr) = 2 sin((t+s)r/2) sin((t-s)r/2)
            a = 0.5 * (t + s) * float(np.sinc(0.5 * (t + s) * r / np.pi))
            b = 0.5 * (t - s) * float(np.sinc(0.5 * (t - s) * r / np.pi))
            return (2.0 * a * b) ** 2

        tail = _trig_tail(
            lambda r: r**-4, -4.0,
            [(1.0, "cos", 0.0), (0.5, "cos", 2 * s), (0.5, "cos", 2 * t), (-1.0, "cos", t - s), (-1.0, "cos", t + s)],
        )
        return dict(h=f, tail_terms=tail, freq=2.0 * max(t, s))

    def time_sq_symbol_weight(self, t: float) -> dict:
        """Weight for ``int_0^t |F G_s|^2 ds``."""
        if self.family == "heat":
            f = lambda r: -t * math.expm1(-t * r * r) / (t * r * r) if t * r * r > 0 else t
            return dict(h=f, decay=-2.0)

        def f(r):
            x = 2.0 * t * r
            if x < 1e-2:
                # 2 t^3 (x - sin x) / x^3 by its series
                xs = x * x
                return t**3 / 3.0 * (1.0 - xs / 20.0 * (1.0 - xs / 42.0 * (1.0 - xs / 72.0)))
            return (x - math.sin(x)) / (4.0 * r**3)

        tail = [q.Term(lambda r: 0.5 * t / (r * r), -2.0), q.Term(lambda r: -0.25 / r**3, -3.0, "sin", 2.0 * t)]
        return dict(h=f, tail_terms=tail, freq=2.0 * t)

    # spatial side

    def green_eval(self, t: float, x):
        """``G_t(x)``; the wave kernel is a function only for ``dim <= 2``."""
        if not t > 0:
            raise ValueError("t must be positive")
        d = self.dim
        r = np.asarray(radius(x, d), dtype=float)
        if self.family == "heat":
            out = (2.0 * math.pi * t) ** (-d / 2.0) * np.exp(-r * r / (2.0 * t))
        elif d == 1:
            out = np.where(r < t, 0.5, 0.0)
        elif d == 2:
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(r < t, 1.0 / (2.0 * math.pi * np.sqrt(np.maximum(t * t - r * r, 0.0))), 0.0)
            out = np.where(r == t, np.inf, out)
        else:
            raise Unsupported("the wave kernel is not a function for dim >= 3")
        return out if out.ndim else float(out)

    def green_lq_norm(self, t: float, qq: float) -> float:
        """``||G_t||_{L^q}``; returns ``math.inf`` where the norm is infinite."""
        if not t > 0 or not qq > 0:
            raise ValueError("t and q must be positive")
        d = self.dim
        if self.family == "heat":
            return heat_lq_constant(d, qq) ** (1.0 / qq) * t ** (0.5 * d * (1.0 / qq - 1.0))
        if d == 1:
            return (2.0 ** (1.0 - qq) * t) ** (1.0 / qq)
        if d == 2:
            if qq >= 2:
                return math.inf
            return ((2.0 * math.pi) ** (1.0 - qq) * t ** (2.0 - qq) / (2.0 - qq)) ** (1.0 / qq)
        raise Unsupported("the wave kernel is not a function for dim >= 3")


def _trig_tail(amp, decay, comps) -> list:
    """Terms ``coef * amp(r) * trig(freq r)`` with frequencies made non-negative."""
    out = []
    for coef, kind, freq in comps:
        sign = 1.0
        if freq < 0:
            freq = -freq
            sign = -1.0 if kind == "sin" else 1.0
        if freq == 0.0:
            if kind == "sin":
                continue
            kind = "none"
        c = coef * sign
        out.append(q.Term(lambda r, c=c: c * amp(r), decay, kind, freq))
    return out


def heat_lq_constant(d: int, qq: float) -> float:
    """``c_q`` with ``int G_t^q = c_q t^{d(1-q)/2}`` for the heat kernel."""
    return (2.0 * math.pi) ** (0.5 * d * (1.0 - qq)) * qq ** (-0.5 * d)


def _check_dims(op: GreenOperator, kernel: ColorationKernel) -> None:
    if op.dim != kernel.dim:
        raise ConfigError("operator and kernel dimensions differ")


# module-level functional interface


def fourier_g(op: GreenOperator, t: float, xi):
    return op.symbol(t, radius(xi, op.dim))


def h_transform(op: GreenOperator, t: float, xi):
    return op.h_symbol(t, radius(xi, op.dim))


def green_eval(op: GreenOperator, t: float, x):
    return op.green_eval(t, x)


def green_lq_norm(op: GreenOperator, t: float, qq: float) -> float:
    return op.green_lq_norm(t, qq)


# J_p(t)


def jp_spectral_l2(op: GreenOperator, kernel: ColorationKernel, t: float) -> float:
    """``J_2(t) = int |F G_t|^2 dmu`` by radial quadrature."""
    _check_dims(op, kernel)
    return kernel.mu_integral(**op.sq_symbol_weight(t))


def _conv_grid(op, kernel, t, half_width, n):
    dx = 2.0 * half_width / n
    xi = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    r = np.abs(xi)
    amp = np.empty_like(r)
    nz = r > 0
    amp[nz] = kernel.amplitude(r[nz])
    if kernel.family == "riesz":
        amp[~nz] = 0.0
    else:
        amp[~nz] = kernel.amplitude(0.0)
    spec = op.symbol(t, r) * amp
    # the lattice transform of the samples is dx * fft; invert accordingly
    f = np.real(np.fft.ifft(spec)) / dx
    return f, dx


def _grid_lp_sq(f, dx, p) -> float:
    return (math.fsum((np.abs(f) ** p).tolist()) * dx) ** (2.0 / p)


def jp_norm(op: GreenOperator, kernel: ColorationKernel, t: float, p: float, tol: float = 1e-3) -> float:
    """``J_p(t) = ||G_t * kappa||_{L^p}^2``.

    Heat operator with heat-kernel coloration uses the closed form
    ``G_t * kappa = H_{d, t + alpha/2}``. Otherwise, in one dimension, the
    convolution is synthesised on a grid by inverse FFT of
    ``F G_t * sqrt(g)``. The extent covers the decay of the kernel and the
    resolution is doubled until two successive values agree to ``1e-6``.

    Raises
    ------
    GridTooCoarse
        If the last doubling still moves the value by more than ``tol``.
    Unsupported
        For Riesz coloration or ``dim > 1`` outside the closed form.
    """
    _check_dims(op, kernel)
    if not p >= 1:
        raise ValueError("p must be at least 1")
    d = op.dim
    if op.family == "heat" and kernel.family == "heat":
        s = t + 0.5 * kernel.alpha
        return (heat_lq_constant(d, p) ** (1.0 / p) * s ** (0.5 * d * (1.0 / p - 1.0))) ** 2
    if d != 1:
        raise Unsupported("grid evaluation of J_p is restricted to dim = 1")
    if kernel.family == "riesz":
        raise Unsupported("Riesz coloration has no grid representation of G_t * kappa")
    if t == 0:
        raise Unsupported("G_0 * kappa = kappa may be singular; J_p(0) is not evaluated on a grid")
    a = float(kernel.alpha)
    half = 12.0 * math.sqrt(t + a) + (t if op.family == "wave" else 0.0) + 40.0
    n = 1 << 14
    prev = None
    for _ in range(6):
        f, dx = _conv_grid(op, kernel, t, half, n)
        val = _grid_lp_sq(f, dx, p)
        if prev is not None:
            rel = abs(val - prev) / abs(val)
            if rel < 1e-6:
                return val
        prev = val
        n *= 2
    if rel > tol:
        raise GridTooCoarse(f"J_p grid value unstable ({rel:.2e}) after refinement")
    return val


def jp_bound(op: GreenOperator, kernel: ColorationKernel, t: float, p: float) -> float:
    """Upper bound for ``J_p(t)`` with unit constant.

    Heat-kernel coloration: ``int |F G_t|^2 exp(-alpha |xi|^2 / 2) dxi``.
    Riesz: ``||G_t||_{L^q}^2`` with ``1/q = 1/p + alpha/(2d)``, for
    ``p > 2d/(2d - alpha)``.
    Bessel (integrable kernel): ``||G_t||_{L^p}^2``.
    """
    _check_dims(op, kernel)
    d, a = op.dim, float(kernel.alpha)
    if kernel.family == "heat":
        return (2.0 * math.pi) ** d * kernel.mu_integral(**op.sq_symbol_weight(t))
    if kernel.family == "riesz":
        if not p > 2.0 * d / (2.0 * d - a):
            raise Unsupported(f"the Riesz bound needs p > {2 * d / (2 * d - a):g}")
        qq = 1.0 / (1.0 / p + a / (2.0 * d))
        norm = op.green_lq_norm(t, qq)
    else:
        norm = op.green_lq_norm(t, p)
    if math.isinf(norm):
        raise Unsupported("G_t is not in the required L^q space")
    return norm**2


def jp_exponent(op: GreenOperator, kernel: ColorationKernel, p: float) -> float:
    """Exponent ``beta`` in the small-time estimate ``J_p(t) <= C t^beta``."""
    _check_dims(op, kernel)
    d, a = op.dim, kernel.alpha
    if op.family == "heat":
        if kernel.family == "heat":
            return 0
        if kernel.family == "riesz":
            return d * (Fraction(1) / p + a / (2 * d) - 1) if _exact(p, a) else d * (1.0 / p + a / (2.0 * d) - 1.0)
        return d * (Fraction(1) / p - 1) if _exact(p) else d * (1.0 / p - 1.0)
    if kernel.family == "heat":
        return 2
    if kernel.family == "riesz":
        if d == 1:
            return Fraction(2) / p + a if _exact(p, a) else 2.0 / p + a
        if d == 2:
            if not p < 4 / (2 - a):
                raise Unsupported("no wave estimate for p >= 4/(2 - alpha) in dim 2")
            return Fraction(4) / p + a - 2 if _exact(p, a) else 4.0 / p + a - 2.0
        raise Unsupported("no wave estimate with Riesz coloration for dim >= 3")
    if d == 1:
        return Fraction(2) / p if _exact(p) else 2.0 / p
    raise Unsupported("no wave estimate with integrable coloration for dim >= 2")


def _exact(*vals) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in vals)


# admissible moment orders


@dataclass(frozen=True)
class Interval:
    """Set ``{p : lo <= p < hi}`` (``hi = None`` for no upper limit), or empty.

    ``note`` explains an empty result.
    """

    lo: Real | None = 2
    hi: Real | None = None
    empty: bool = False
    note: str = ""

    @classmethod
    def none(cls, note: str) -> "Interval":
        return cls(lo=None, hi=None, empty=True, note=note)

    def __contains__(self, p) -> bool:
        if self.empty:
            return False
        return p >= self.lo and (self.hi is None or p < self.hi)

    def intersect(self, other: "Interval") -> "Interval":
        if self.empty or other.empty:
            return Interval.none(self.note or other.note)
        lo = max(self.lo, other.lo)
        his = [h for h in (self.hi, other.hi) if h is not None]
        hi = min(his) if his else None
        if hi is not None and hi <= lo:
            return Interval.none("no admissible p remains")
        return Interval(lo, hi)

    def is_subset(self, other: "Interval") -> bool:
        if self.empty:
            return True
        if other.empty:
            return False
        if self.lo < other.lo:
            return False
        if other.hi is None:
            return True
        return self.hi is not None and self.hi <= other.hi

    def __str__(self) -> str:
        if self.empty:
            return "empty" + (f" ({self.note})" if self.note else "")
        hi = "inf" if self.hi is None else str(self.hi)
        return f"[{self.lo}, {hi})"


def admissible_p_range(op: GreenOperator, kernel: ColorationKernel) -> Interval:
    """Orders ``p >= 2`` for which the time integral of ``J_2^{1/2} + J_p^{1/2}``
    built from the power-law bounds is finite.

    The answer is exact when ``alpha`` is an ``int`` or ``Fraction``.
    """
    _check_dims(op, kernel)
    d, a = op.dim, kernel.alpha
    if not kernel.dalang_check():
        return Interval.none("Dalang condition fails")
    fam = kernel.family
    if op.family == "heat":
        if fam == "heat":
            return Interval(2, None)
        if fam == "riesz":
            if a >= 2 * d - 4:
                return Interval(2, None)
            return Interval(2, _div(2 * d, 2 * d - a - 4))
        if d <= 2:
            return Interval(2, None)
        hi = _div(d, d - 2)
        if hi <= 2:
            return Interval.none("p(d - 2) < d leaves no p >= 2")
        return Interval(2, hi)
    if fam == "heat":
        return Interval(2, None)
    if fam == "riesz":
        if d == 1:
            return Interval(2, None)
        if d == 2:
            return Interval(2, _div(4, 2 - a))
        return Interval.none("no wave estimate with Riesz coloration for dim >= 3")
    if d == 1:
        return Interval(2, None)
    return Interval.none("no wave estimate with integrable coloration for dim >= 2")


def alt_admissible_range(op: GreenOperator, kernel: ColorationKernel) -> Interval:
    """Orders for the Hölder-type alternative envelope, where the time integral
    of ``J_2^{p/2} + J_p^{p/2}`` must be finite. A subset of
    :func:`admissible_p_range`."""
    main = admissible_p_range(op, kernel)
    if main.empty or op.family == "wave" or kernel.family == "heat":
        return main
    d, a = op.dim, kernel.alpha
    if kernel.family == "riesz":
        extra = Interval(2, _div(2 * d + 4, 2 * d - a))
    else:
        hi = 1 + _div(2, d)
        if hi <= 2:
            return Interval.none("p < 1 + 2/d leaves no p >= 2")
        extra = Interval(2, hi)
    return main.intersect(extra)


def _div(num, den):
    if _exact(num, den):
        return Fraction(num) / Fraction(den)
    return num / den
