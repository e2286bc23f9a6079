"""Run configuration: a small YAML document with four sections.

Example::

    grid:    {dim: 2, n: 64, length: 6.283185307179586}
    solver:  {nu: 1.0, dt: 1.0e-3, t_end: 0.5, scheme: imex1}
    initial: {name: taylor_green, parameters: {amplitude: 1.0}, seed: 0}
    outputs: {diagnostics: diag.csv, snapshot_every: 0, snapshot_prefix: snap}

Every field has a default; unknown keys and invalid values are rejected with
the dotted field name in the message.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .dynamics import SCHEMES, SolverConfig, State
from .grid import Grid
from .initial import make_initial, registered_initials

__all__ = ["ConfigError", "RunConfig", "load_config", "loads", "dumps", "save_config"]

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Configuration parse or validation failure; message names the field."""


@dataclass
class GridSection:
    dim: int = 2
    n: int = 32
    length: float = TWO_PI


@dataclass
class SolverSection:
    nu: float = 1.0
    dt: float = 1.0e-3
    t_end: float = 1.0
    scheme: str = "imex1"
    dealias_on: bool = True
    renormalize_every: int = 1
    diagnostics_every: int = 1
    cfl_limit: float = 0.5


@dataclass
class InitialSection:
    name: str = "taylor_green"
    parameters: dict = field(default_factory=dict)
    seed: int = 0


@dataclass
class OutputsSection:
    diagnostics: str = "diagnostics.csv"
    snapshot_every: int = 0
    snapshot_prefix: str = "snapshot"


@dataclass
class RunConfig:
    grid: GridSection = field(default_factory=GridSection)
    solver: SolverSection = field(default_factory=SolverSection)
    initial: InitialSection = field(default_factory=InitialSection)
    outputs: OutputsSection = field(default_factory=OutputsSection)

    def build_grid(self) -> Grid:
        return Grid(self.grid.dim, self.grid.n, self.grid.length)

    def build_solver(self) -> SolverConfig:
        s = self.solver
        return SolverConfig(
            nu=s.nu, dt=s.dt, t_end=s.t_end, scheme=s.scheme, dealias_on=s.dealias_on,
            renormalize_every=s.renormalize_every, diagnostics_every=s.diagnostics_every,
            cfl_limit=s.cfl_limit,
        )

    def build_state(self, grid: Grid | None = None) -> State:
        if grid is None:
            grid = self.build_grid()
        params = dict(self.initial.parameters)
        if self.initial.name == "random_smooth":
            params.setdefault("seed", self.initial.seed)
        return make_initial(self.initial.name, params, grid)


_SECTIONS = {
    "grid": GridSection,
    "solver": SolverSection,
    "initial": InitialSection,
    "outputs": OutputsSection,
}

_INT_FIELDS = {
    "grid.dim", "grid.n",
    "solver.renormalize_every", "solver.diagnostics_every",
    "initial.seed", "outputs.snapshot_every",
}
_FLOAT_FIELDS = {
    "grid.length", "solver.nu", "solver.dt", "solver.t_end", "solver.cfl_limit",
}


def _coerce(path: str, value, default):
    if path in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if path in _FLOAT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    if isinstance(default, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected a mapping, got {value!r}")
        return value
    return value


def _build_section(name: str, data: dict):
    cls = _SECTIONS[name]
    section = cls()
    known = set(section.__dataclass_fields__)
    for key, value in data.items():
        path = f"{name}.{key}"
        if key not in known:
            raise ConfigError(f"{path}: unknown field")
        setattr(section, key, _coerce(path, value, getattr(section, key)))
    return section


def _validate(cfg: RunConfig) -> None:
    g, s, ini, out = cfg.grid, cfg.solver, cfg.initial, cfg.outputs
    if g.dim not in (2, 3):
        raise ConfigError(f"grid.dim: must be 2 or 3, got {g.dim}")
    if g.n < 8 or g.n & (g.n - 1):
        raise ConfigError(f"grid.n: must be a power of two >= 8, got {g.n}")
    if not g.length > 0:
        raise ConfigError(f"grid.length: must be positive, got {g.length}")
    if not s.nu > 0:
        raise ConfigError(f"solver.nu: must be positive, got {s.nu}")
    if not s.dt > 0:
        raise ConfigError(f"solver.dt: must be positive, got {s.dt}")
    if not s.t_end >= 0:
        raise ConfigError(f"solver.t_end: must be non-negative, got {s.t_end}")
    if s.t_end > 0 and s.dt > s.t_end * (1 + 1e-12):
        raise ConfigError(f"solver.dt: {s.dt} exceeds solver.t_end {s.t_end}")
    if s.scheme not in SCHEMES:
        raise ConfigError(f"solver.scheme: must be one of {SCHEMES}, got {s.scheme!r}")
    if s.renormalize_every < 1:
        raise ConfigError(f"solver.renormalize_every: must be >= 1, got {s.renormalize_every}")
    if s.diagnostics_every < 1:
        raise ConfigError(f"solver.diagnostics_every: must be >= 1, got {s.diagnostics_every}")
    if ini.name not in registered_initials():
        raise ConfigError(
            f"initial.name: unknown {ini.name!r}; registered: {', '.join(registered_initials())}"
        )
    for path_field, value in (("outputs.diagnostics", out.diagnostics),
                              ("outputs.snapshot_prefix", out.snapshot_prefix)):
        parent = Path(value).resolve().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            raise ConfigError(f"{path_field}: directory {parent} is not writable")
    if out.snapshot_every < 0:
        raise ConfigError(f"outputs.snapshot_every: must be >= 0, got {out.snapshot_every}")


def loads(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"config parse error: {err}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config root: expected a mapping, got {type(data).__name__}")
    cfg = RunConfig()
    for key, value in data.items():
        if key not in _SECTIONS:
            raise ConfigError(f"{key}: unknown section")
        if not isinstance(value, dict):
            raise ConfigError(f"{key}: expected a mapping")
        setattr(cfg, key, _build_section(key, value))
    _validate(cfg)
    return cfg


def load_config(path) -> RunConfig:
    return loads(Path(path).read_text())


def dumps(cfg: RunConfig) -> str:
    return yaml.safe_dump(asdict(cfg), sort_keys=False)


def save_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(dumps(cfg))
