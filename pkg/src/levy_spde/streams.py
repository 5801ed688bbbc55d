"""Counter-based random streams and Monte Carlo summaries.

Trials are grouped into fixed-size blocks. Block ``b`` of a computation tagged
``key`` draws from ``PCG64(SeedSequence([seed, crc32(key), b]))``, so the
numbers a trial sees depend only on the master seed, the tag and the trial
index, never on how blocks are distributed over workers.
"""

from __future__ import annotations

import logging
import math
import zlib
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

LOGGER = logging.getLogger(__name__)

BLOCK_SIZE = 8192


def _tag(key: str) -> int:
    return zlib.crc32(key.encode("utf-8"))


def block_generator(seed: int, key: str, block: int) -> np.random.Generator:
    """Generator for one block of trials."""
    ss = np.random.SeedSequence([int(seed), _tag(key), int(block)])
    return np.random.Generator(np.random.PCG64(ss))


def run_blocks(
    fn: Callable[[np.random.Generator, int], Any],
    n_trials: int,
    seed: int,
    key: str,
    pool=None,
    block_size: int = BLOCK_SIZE,
) -> list:
    """Evaluate ``fn(rng, size)`` on every block and return results in block order.

    ``pool`` is any object with an ordered ``map`` (e.g. a
    ``concurrent.futures`` executor). It is owned by the caller.
    """
    if n_trials < 0:
        raise ValueError("n_trials must be non-negative")
    n_blocks = -(-n_trials // block_size)
    sizes = [min(block_size, n_trials - b * block_size) for b in range(n_blocks)]

    def task(b: int):
        return fn(block_generator(seed, key, b), sizes[b])

    if pool is None:
        return [task(b) for b in range(n_blocks)]
    return list(pool.map(task, range(n_blocks)))


def run_trials(fn, n_trials, seed, key, pool=None, block_size=BLOCK_SIZE) -> np.ndarray:
    """Like :func:`run_blocks` but concatenates per-trial arrays along axis 0."""
    parts = run_blocks(fn, n_trials, seed, key, pool=pool, block_size=block_size)
    if not parts:
        return np.empty(0)
    return np.concatenate(parts, axis=0)


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float
    n: int

    def within(self, reference: float, k: float = 3.0) -> bool:
        return abs(self.value - reference) <= k * self.se


def fmean(x) -> float:
    """Exactly rounded mean; independent of summation order."""
    x = np.asarray(x, dtype=float).ravel()
    return math.fsum(x.tolist()) / x.size


def mean_estimate(x) -> Estimate:
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    m = fmean(x)
    sd = math.sqrt(math.fsum(((x - m) ** 2).tolist()) / (n - 1)) if n > 1 else math.inf
    return Estimate(m, sd / math.sqrt(n), n)


def _heavy_tail_check(a: np.ndarray, p: float) -> None:
    if a.size < 100:
        return
    k = max(1, a.size // 100)
    top = np.partition(a, a.size - k)[-k:]
    total = a.sum()
    if total > 0 and top.sum() > 0.5 * total:
        LOGGER.warning(
            "heavy tail: top 1%% of trials carry %.0f%% of the p=%g moment sum",
            100 * top.sum() / total,
            p,
        )


def moment_estimate(x, p: float) -> Estimate:
    """Estimate of ``E|X|^p`` with its CLT standard error."""
    a = np.abs(np.asarray(x, dtype=float).ravel()) ** p
    _heavy_tail_check(a, p)
    return mean_estimate(a)


def norm_estimate(x, p: float) -> Estimate:
    """Estimate of ``||X||_p = (E|X|^p)^(1/p)`` with a delete-one jackknife SE."""
    a = np.abs(np.asarray(x, dtype=float).ravel()) ** p
    _heavy_tail_check(a, p)
    n = a.size
    s = math.fsum(a.tolist())
    full = (s / n) ** (1.0 / p)
    loo = ((s - a) / (n - 1)) ** (1.0 / p)
    lbar = loo.mean()
    se = math.sqrt((n - 1) / n * float(((loo - lbar) ** 2).sum()))
    return Estimate(full, se, n)


def ratio_estimate(a, b) -> Estimate:
    """Estimate of ``E[a] / E[b]`` from paired samples (delta-method SE)."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n = a.size
    ma, mb = fmean(a), fmean(b)
    r = ma / mb
    resid = (a - r * b) / mb
    se = float(np.std(resid, ddof=1)) / math.sqrt(n)
    return Estimate(r, se, n)
