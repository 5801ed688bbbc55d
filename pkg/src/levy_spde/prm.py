"""Poisson random measure on a box and compensated Lévy white-noise integrals.

On a box ``B`` and a finite jump measure ``nu`` the restricted Poisson
random measure is a compound-Poisson cloud: ``Lambda ~ Poisson(|B| nu(R_0))``
points, uniform locations, iid jumps from ``nu / nu(R_0)``. The white noise
integral of a test function is

    L(phi) = sum_i phi(x_i) z_i - mean(nu) * int_B phi(x) dx.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import quadrature as q
from . import streams
from .errors import SupportError
from .measure import LevyMeasure


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``prod_k [lo_k, hi_k]``."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    @classmethod
    def make(cls, lo, hi) -> "Box":
        lo = tuple(np.atleast_1d(np.asarray(lo, dtype=float)).tolist())
        hi = tuple(np.atleast_1d(np.asarray(hi, dtype=float)).tolist())
        if len(lo) != len(hi) or any(b <= a for a, b in zip(lo, hi)):
            raise ValueError("box needs lo < hi in every coordinate")
        return cls(lo, hi)

    @classmethod
    def interval(cls, a: float, b: float) -> "Box":
        return cls.make([a], [b])

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return math.prod(b - a for a, b in zip(self.lo, self.hi))

    def uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        lo, hi = np.array(self.lo), np.array(self.hi)
        return lo + (hi - lo) * rng.random((n, self.dim))

    def grow(self, factor: float) -> "Box":
        lo, hi = np.array(self.lo), np.array(self.hi)
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return Box.make(mid - factor * half, mid + factor * half)


@dataclass(frozen=True)
class PRMSample:
    """One realisation of the Poisson random measure restricted to a box."""

    box: Box
    x: np.ndarray
    z: np.ndarray
    intensity_mass: float
    nu_mean: float

    @property
    def count(self) -> int:
        return int(self.z.size)


def sample_prm(box: Box, nu: LevyMeasure, rng: np.random.Generator) -> PRMSample:
    """Compound-Poisson realisation of ``N`` on ``box x R_0``."""
    lam = box.volume * nu.total_mass
    n = int(rng.poisson(lam))
    x = box.uniform(rng, n)
    z = nu.sample(rng, n)
    return PRMSample(box, x, z, lam, nu.mean)


@dataclass(frozen=True)
class PRMBatch:
    """Independent realisations stored flat: ``trial[i]`` owns point ``i``."""

    box: Box
    size: int
    trial: np.ndarray
    x: np.ndarray
    z: np.ndarray
    intensity_mass: float
    nu_mean: float

    def sums(self, values: np.ndarray) -> np.ndarray:
        """Per-trial sums of point values, ``sum_i values_i z_i``."""
        return np.bincount(self.trial, weights=values * self.z, minlength=self.size)


def sample_prm_batch(box: Box, nu: LevyMeasure, rng: np.random.Generator, size: int) -> PRMBatch:
    """``size`` independent realisations drawn with vectorised calls."""
    lam = box.volume * nu.total_mass
    counts = rng.poisson(lam, size)
    total = int(counts.sum())
    x = box.uniform(rng, total)
    z = nu.sample(rng, total)
    trial = np.repeat(np.arange(size), counts)
    return PRMBatch(box, size, trial, x, z, lam, nu.mean)


# deterministic integrals of test functions over boxes


def _nodes(box: Box, n: int = 64, panels: int = 32):
    axes = [q.gauss_legendre(a, b, n, panels) for a, b in zip(box.lo, box.hi)]
    if box.dim == 1:
        return axes[0][0][:, None], axes[0][1]
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wts = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    w = np.prod(np.stack([g.ravel() for g in wts], axis=-1), axis=-1)
    return pts, w


def _eval(phi: Callable, pts: np.ndarray) -> np.ndarray:
    return np.asarray(phi(pts[:, 0] if pts.shape[1] == 1 else pts), dtype=float)


def box_integral(phi: Callable, box: Box, power: float | None = None, panels: int = 32) -> float:
    """``int_B phi`` or ``int_B |phi|^power`` by composite Gauss-Legendre."""
    if box.dim > 1:
        panels = max(4, panels // 4 ** (box.dim - 1))
    pts, w = _nodes(box, panels=panels)
    v = _eval(phi, pts)
    if power is not None:
        v = np.abs(v) ** power
    return math.fsum((v * w).tolist())


def check_support(phi: Callable, box: Box, tol: float = 1e-9) -> None:
    """Raise :class:`SupportError` if ``|phi|`` has mass in a shell around the box."""
    inside = box_integral(phi, box, power=1.0)
    outer = box.grow(3.0)
    total = box_integral(phi, outer, power=1.0, panels=96)
    shell = total - box_integral(phi, box, power=1.0, panels=96)
    if shell > tol * max(1.0, inside):
        raise SupportError(f"test function carries mass {shell:.3g} outside the box")


def l_integral(phi: Callable, sample: PRMSample | PRMBatch, check: bool = True):
    """Compensated integral ``L(phi)`` for one sample or a batch of samples."""
    if check:
        check_support(phi, sample.box)
    comp = 0.0 if sample.nu_mean == 0 else sample.nu_mean * box_integral(phi, sample.box)
    if isinstance(sample, PRMBatch):
        return sample.sums(_eval(phi, sample.x)) - comp
    if sample.count == 0:
        return -comp
    return math.fsum((_eval(phi, sample.x) * sample.z).tolist()) - comp


def simulate_l(phi: Callable, box: Box, nu: LevyMeasure, trials: int, seed: int, key: str, pool=None) -> np.ndarray:
    """``trials`` iid copies of ``L(phi)`` from counter-based streams."""
    check_support(phi, box)
    comp = 0.0 if nu.mean == 0 else nu.mean * box_integral(phi, box)

    def block(rng, size):
        batch = sample_prm_batch(box, nu, rng, size)
        return batch.sums(_eval(phi, batch.x)) - comp

    return streams.run_trials(block, trials, seed, key, pool)


def char_function(phi: Callable, nu: LevyMeasure, theta: float, box: Box) -> complex:
    """``E exp(i theta L(phi)) = exp( int_B int (e^{i theta phi z} - 1 - i theta phi z) nu(dz) dx )``."""
    if theta == 0:
        return 1.0 + 0.0j
    pts, w = _nodes(box, panels=32 if box.dim == 1 else 8)
    vals = _eval(phi, pts)

    def psi(z):
        u = theta * vals * z
        return math.fsum((w * (np.cos(u) - 1.0)).tolist()) + 1j * math.fsum((w * (np.sin(u) - u)).tolist())

    return complex(np.exp(nu.integral(psi)))


def lp_norm(phi: Callable, box: Box, p: float) -> float:
    return box_integral(phi, box, power=p) ** (1.0 / p)


def rosenthal_ratio(
    phi: Callable, box: Box, nu: LevyMeasure, p: float, trials: int, seed: int, key: str, pool=None
) -> streams.Estimate:
    """``||L(phi)||_p / (m_2^{1/2} ||phi||_2 + m_p^{1/p} ||phi||_p)`` by Monte Carlo."""
    if p < 2:
        raise ValueError("p must be at least 2")
    den = math.sqrt(nu.moment(2.0)) * lp_norm(phi, box, 2.0) + nu.moment(p) ** (1.0 / p) * lp_norm(phi, box, p)
    est = streams.norm_estimate(simulate_l(phi, box, nu, trials, seed, key, pool), p)
    return streams.Estimate(est.value / den, est.se / den, est.n)


# test family for the empirical Rosenthal constant

ROSENTHAL_SCALES = (0.25, 1.0, 4.0)


@dataclass(frozen=True)
class ProbeFunction:
    """Named test function with the box that contains its support."""

    name: str
    phi: Callable
    box: Box


def indicator(a: float, b: float) -> Callable:
    return lambda x: np.where((np.asarray(x) >= a) & (np.asarray(x) <= b), 1.0, 0.0)


def gaussian_bump(center: float, width: float, height: float = 1.0) -> Callable:
    return lambda x: height * np.exp(-0.5 * ((np.asarray(x) - center) / width) ** 2)


def oscillating_bump(width: float, freq: float = 3.0) -> Callable:
    return lambda x: np.cos(freq * np.asarray(x) / width) * np.exp(-0.5 * (np.asarray(x) / width) ** 2)


def rosenthal_family(scales: Sequence[float] = ROSENTHAL_SCALES) -> list[ProbeFunction]:
    """Indicators, Gaussian bumps and oscillating bumps at each scale (one dimension)."""
    fam = []
    for s in scales:
        fam.append(ProbeFunction(f"indicator[0,{s:g}]", indicator(0.0, s), Box.interval(0.0, s)))
        fam.append(ProbeFunction(f"gauss(width={s:g})", gaussian_bump(0.0, s), Box.interval(-9.0 * s, 9.0 * s)))
        fam.append(ProbeFunction(f"osc(width={s:g})", oscillating_bump(s), Box.interval(-9.0 * s, 9.0 * s)))
    return fam


def rosenthal_sup(nu: LevyMeasure, p: float, trials: int, seed: int, pool=None, family=None) -> tuple[float, list]:
    """Largest ``rosenthal_ratio`` over the test family, with per-function estimates."""
    family = rosenthal_family() if family is None else family
    rows = []
    for k, tf in enumerate(family):
        est = rosenthal_ratio(tf.phi, tf.box, nu, p, trials, seed, f"rosenthal/{p:g}/{k}", pool)
        rows.append((tf.name, est))
    return max(e.value for _, e in rows), rows


def random_bumps(n: int, seed: int) -> list[ProbeFunction]:
    """Gaussian bumps with random centre, width and height, reproducible from ``seed``."""
    rng = streams.block_generator(seed, "bumps", 0)
    out = []
    for k in range(n):
        c = rng.uniform(-2.0, 2.0)
        w = rng.uniform(0.2, 1.5)
        h = rng.uniform(0.5, 2.0)
        out.append(ProbeFunction(f"bump{k}", gaussian_bump(c, w, h), Box.interval(c - 9.0 * w, c + 9.0 * w)))
    return out
