"""Finite Lévy jump measures: moments and sampling of jump sizes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import ConfigError, Overflow

# names visible to density expressions given as text
_EXPR_NAMESPACE = {
    name: getattr(np, name)
    for name in ("exp", "log", "sqrt", "abs", "sin", "cos", "tanh", "cosh", "sinh", "pi", "e", "where", "sign")
}
_EXPR_NAMESPACE["__builtins__"] = {}


def compile_density(expr: str) -> Callable[[np.ndarray], np.ndarray]:
    """Turn a text expression in the variable ``z`` into a vectorised density."""
    try:
        code = compile(expr, "<density>", "eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse density {expr!r}: {exc}") from None
    for name in code.co_names:
        if name != "z" and name not in _EXPR_NAMESPACE:
            raise ConfigError(f"density {expr!r} uses unknown name {name!r}")

    def rho(z):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(eval(code, _EXPR_NAMESPACE, {"z": z}), z.shape).astype(float)

    return rho


@dataclass(frozen=True)
class LevyMeasure:
    """Jump measure with finite total mass.

    Either a finite sum of weighted atoms, or a density on the truncated
    support ``eps <= |z| <= zmax``. Build instances with :meth:`from_atoms`
    or :meth:`from_density`.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    density: Callable | None = None
    support: tuple[float, float] | None = None
    expr: str | None = None
    _table: tuple = field(default=(), repr=False, compare=False)

    # construction

    @classmethod
    def from_atoms(cls, atoms: Sequence[Sequence[float]]) -> "LevyMeasure":
        pairs = tuple((float(z), float(w)) for z, w in atoms)
        if not pairs:
            raise ConfigError("a Lévy measure needs at least one atom")
        for z, w in pairs:
            if z == 0.0 or not math.isfinite(z):
                raise ConfigError(f"atom location must be finite and non-zero, got {z}")
            if not (w > 0.0) or not math.isfinite(w):
                raise ConfigError(f"atom weight must be positive, got {w}")
        return cls(atoms=pairs)

    @classmethod
    def from_density(cls, density, support: Sequence[float], n_table: int = 20001) -> "LevyMeasure":
        """Density ``rho`` restricted to ``support[0] <= |z| <= support[1]``.

        ``density`` is a vectorised callable or a text expression in ``z``.
        The small-jump cutoff ``support[0]`` makes the measure finite; it is an
        approximation of any infinite-activity measure it is taken from.
        """
        expr = None
        if isinstance(density, str):
            expr = density
            density = compile_density(density)
        eps, zmax = float(support[0]), float(support[1])
        if not (0.0 < eps < zmax < math.inf):
            raise ConfigError(f"support must satisfy 0 < eps < M < inf, got {support}")
        grid = np.concatenate([-np.geomspace(zmax, eps, n_table), np.geomspace(eps, zmax, n_table)])
        vals = np.asarray(density(grid), dtype=float)
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ConfigError("density must be finite and non-negative on its support")
        obj = cls(density=density, support=(eps, zmax), expr=expr)
        # tabulated CDF per half-line for inverse-transform sampling
        halves = []
        for sgn in (-1.0, 1.0):
            z = sgn * np.geomspace(eps, zmax, n_table)
            r = np.asarray(density(z), dtype=float)
            seg = 0.5 * (r[1:] + r[:-1]) * np.abs(np.diff(z))
            cdf = np.concatenate([[0.0], np.cumsum(seg)])
            halves.append((z, cdf))
        object.__setattr__(obj, "_table", tuple(halves))
        if obj.total_mass <= 0.0:
            raise ConfigError("density has zero mass on its support")
        obj.moment(2.0)
        return obj

    @property
    def is_discrete(self) -> bool:
        return self.density is None

    # integrals

    def _integrate(self, f) -> float:
        eps, zmax = self.support
        total = 0.0
        for lo, hi in ((-zmax, -eps), (eps, zmax)):
            val, _ = integrate.quad(
                lambda z: float(f(z)) * float(self.density(np.array(z))), lo, hi, epsabs=1e-12, epsrel=1e-12, limit=500
            )
            total += val
        return total

    @property
    def total_mass(self) -> float:
        if self.is_discrete:
            return math.fsum(w for _, w in self.atoms)
        return self._integrate(lambda z: 1.0)

    @property
    def mean(self) -> float:
        if self.is_discrete:
            return math.fsum(z * w for z, w in self.atoms)
        return self._integrate(lambda z: z)

    def moment(self, p: float) -> float:
        """``m_p = int |z|^p nu(dz)``."""
        if not p > 0:
            raise ValueError("moment order must be positive")
        if self.is_discrete:
            val = math.fsum(w * abs(z) ** p for z, w in self.atoms)
        else:
            val = self._integrate(lambda z: abs(z) ** p)
        if not math.isfinite(val):
            raise Overflow(f"moment of order {p} is not finite")
        return val

    def integral(self, f) -> float:
        """``int f(z) nu(dz)`` for a scalar callable ``f`` (may be complex)."""
        if self.is_discrete:
            return sum(w * f(z) for z, w in self.atoms)
        re = self._integrate(lambda z: np.real(f(z)))
        im = self._integrate(lambda z: np.imag(f(z)))
        return complex(re, im) if im != 0.0 else re

    def scaled(self, c: float) -> "LevyMeasure":
        """The measure ``c * nu``."""
        if not c > 0:
            raise ValueError("scale must be positive")
        if self.is_discrete:
            return LevyMeasure.from_atoms([(z, c * w) for z, w in self.atoms])
        rho = self.density
        return LevyMeasure.from_density(lambda z: c * rho(z), self.support)

    # sampling

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``size`` iid draws from ``nu / nu(R_0)``."""
        if self.is_discrete:
            z = np.array([a for a, _ in self.atoms])
            w = np.array([b for _, b in self.atoms])
            cum = np.cumsum(w)
            u = rng.random(size) * cum[-1]
            idx = np.searchsorted(cum, u, side="right")
            return z[np.minimum(idx, len(z) - 1)]
        (zn, cn), (zp, cp) = self._table
        mn, mp = cn[-1], cp[-1]
        u = rng.random(size) * (mn + mp)
        out = np.empty(size)
        neg = u < mn
        out[neg] = np.interp(u[neg], cn, zn)
        out[~neg] = np.interp(u[~neg] - mn, cp, zp)
        return out


def moment(nu: LevyMeasure, p: float) -> float:
    """``m_p`` of ``nu``."""
    return nu.moment(p)


def sample_jump(nu: LevyMeasure, rng: np.random.Generator) -> float:
    """One draw from the normalised jump law."""
    return float(nu.sample(rng, 1)[0])


def symmetric_pm1() -> LevyMeasure:
    """``(delta_{-1} + delta_{1}) / 2``: centred with every ``m_p`` equal to one."""
    return LevyMeasure.from_atoms([(-1.0, 0.5), (1.0, 0.5)])
