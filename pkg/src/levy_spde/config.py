"""Run configuration stored as TOML.

Every field has a default, so an empty file is a valid configuration. Keys
whose value is ``None`` are left out when writing, and missing keys take
their defaults when reading, which makes ``parse(serialize(c)) == c``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .kernels import ColorationKernel
from .measure import LevyMeasure
from .operators import GreenOperator

SCHEMA_VERSION = 1
DEFAULT_SEED = 20240611
WORKERS_ENV = "LEVY_SPDE_WORKERS"


@dataclass
class KernelConfig:
    family: str = "heat"
    alpha: float = 1.0
    dim: int = 1

    def build(self) -> ColorationKernel:
        return ColorationKernel(self.family, self.alpha, self.dim)


@dataclass
class LevyConfig:
    """Either ``atoms = [[z, w], ...]`` or ``density`` with ``support = [eps, M]``."""

    atoms: list | None = field(default_factory=lambda: [[-1.0, 0.5], [1.0, 0.5]])
    density: str | None = None
    support: list | None = None

    def build(self) -> LevyMeasure:
        if self.density is not None:
            if self.support is None:
                raise ConfigError("a density needs support = [eps, M]")
            return LevyMeasure.from_density(self.density, self.support)
        if not self.atoms:
            raise ConfigError("levy block needs atoms or a density")
        return LevyMeasure.from_atoms(self.atoms)


@dataclass
class ChaosConfig:
    orders: list = field(default_factory=lambda: [1, 2, 3])
    m2: float | None = None
    tail_tol: float = 1e-8
    samples: int = 100000


@dataclass
class RunConfig:
    """All inputs of a run; ``tolerances`` overrides check tolerances by id and
    ``bp_table`` fixes Rosenthal constants by moment order (keys are strings)."""

    schema_version: int = SCHEMA_VERSION
    operator: str = "heat"
    kernel: KernelConfig = field(default_factory=KernelConfig)
    levy: LevyConfig = field(default_factory=LevyConfig)
    chaos: ChaosConfig = field(default_factory=ChaosConfig)
    ts: list = field(default_factory=lambda: [0.5, 1.0])
    xs: list = field(default_factory=lambda: [0.0])
    ps: list = field(default_factory=lambda: [2.0, 4.0])
    box: float | None = None
    trials: int = 100000
    seed: int = DEFAULT_SEED
    workers: int = 1
    out: str = "levy_spde_out"
    format: str = "csv"
    tolerances: dict = field(default_factory=dict)
    bp_table: dict = field(default_factory=dict)

    def build_operator(self) -> GreenOperator:
        return GreenOperator(self.operator, self.kernel.dim)

    def validate(self) -> "RunConfig":
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema version {self.schema_version}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.trials < 0 or self.workers < 1:
            raise ConfigError("trials must be non-negative and workers positive")
        self.kernel.build()
        self.build_operator()
        self.levy.build()
        return self


_SECTIONS = {"kernel": KernelConfig, "levy": LevyConfig, "chaos": ChaosConfig}


def _strip_none(obj):
    if isinstance(obj, dict):
        return {k: _strip_none(v) for k, v in obj.items() if v is not None}
    return obj


def serialize(cfg: RunConfig) -> str:
    return tomli_w.dumps(_strip_none(dataclasses.asdict(cfg)))


def _build(cls, data: dict, where: str):
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(names)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    kw = {}
    for k, v in data.items():
        if k in _SECTIONS and cls is RunConfig:
            if not isinstance(v, dict):
                raise ConfigError(f"{k} must be a table")
            v = _build(_SECTIONS[k], v, k)
        kw[k] = v
    obj = cls(**kw)
    # a block that names a density drops the default atoms
    if cls is LevyConfig and "density" in data and "atoms" not in data:
        obj.atoms = None
    return obj


def parse(text: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from None
    return _build(RunConfig, data, "config")


def load(path: str | os.PathLike | None) -> RunConfig:
    if path is None:
        return RunConfig()
    return parse(Path(path).read_text())


def save(cfg: RunConfig, path: str | os.PathLike) -> None:
    Path(path).write_text(serialize(cfg))


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(serialize(cfg).encode("utf-8")).hexdigest()[:16]


def resolve_workers(flag: int | None, cfg: RunConfig) -> int:
    """``--workers`` flag, then ``LEVY_SPDE_WORKERS``, then the config value."""
    if flag is not None:
        return int(flag)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return cfg.workers
