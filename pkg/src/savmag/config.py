"""Simulation manifests.

A manifest is an INI file; every option is addressed by a dotted key
``section.option`` (``grid.nx``, ``material.Ms``, ``run.dt`` ...) and can be
overridden with ``--set key=value`` on the command line.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .energy import MaterialParams
from .errors import ConfigError
from .mesh import Grid

SCHEMES = ("sav1", "sav2", "fep", "bep", "llg_midpoint", "llg_be", "llg_fe")

# dotted key -> (attribute, parser)
_KEYS = {
    "grid.nx": ("nx", int),
    "grid.ny": ("ny", int),
    "grid.nz": ("nz", int),
    "grid.lx": ("lx", float),
    "grid.ly": ("ly", float),
    "grid.lz": ("lz", float),
    "material.C_ex": ("C_ex", float),
    "material.K_u": ("K_u", float),
    "material.Ms": ("M_s", float),
    "material.mu0": ("mu0", float),
    "material.alpha": ("alpha", float),
    "material.gamma": ("gamma", float),
    "material.h_e": ("h_e", lambda s: tuple(float(v) for v in s.split(","))),
    "run.scheme": ("scheme", str),
    "run.dt": ("dt", float),
    "run.T": ("T", float),
    "run.initial": ("initial", str),
    "run.stride": ("stride", int),
    "run.steady_threshold": ("steady_threshold", float),
    "run.tolerance": ("tolerance", float),
    "run.max_iters": ("max_iters", int),
    "run.demag": ("demag", lambda s: s.strip().lower() in ("1", "true", "yes", "on")),
    "output.dir": ("output_dir", str),
    "output.name": ("name", str),
    "output.write": ("write", lambda s: s.strip().lower() in ("1", "true", "yes", "on")),
}


@dataclass(frozen=True)
class SimulationConfig:
    nx: int = 100
    ny: int = 50
    nz: int = 1
    lx: float = 2e-6
    ly: float = 1e-6
    lz: float = 2e-8
    C_ex: float = 1.3e-11
    K_u: float = 5.0e2
    M_s: float = 8.0e5
    mu0: float = 4e-7 * math.pi
    alpha: float = 0.1
    gamma: float = 2.211e5
    h_e: tuple = (0.0, 0.0, 0.0)
    scheme: str = "sav2"
    dt: float = 1e-13
    T: float = 4e-10
    initial: str = "diamond"
    stride: int = 100
    steady_threshold: float = 10.0
    tolerance: float = 1e-8
    max_iters: int = 500
    demag: bool = True
    output_dir: str = "out"
    name: str = ""
    write: bool = True
    source: str = field(default="", compare=False)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if not self.dt > 0:
            raise ConfigError("run.dt must be positive")
        if not self.T >= 0:
            raise ConfigError("run.T must be non-negative")
        if 0 < self.T < self.dt * (1 - 1e-9):
            raise ConfigError("run.T must be zero or at least one step")
        if self.stride < 1:
            raise ConfigError("run.stride must be >= 1")
        if min(self.nx, self.ny, self.nz) < 1 or min(self.lx, self.ly, self.lz) <= 0:
            raise ConfigError("grid counts and extents must be positive")

    @property
    def grid(self) -> Grid:
        return Grid.from_extent((self.nx, self.ny, self.nz), (self.lx, self.ly, self.lz))

    @property
    def material(self) -> MaterialParams:
        return MaterialParams(self.C_ex, self.K_u, self.M_s, self.mu0, self.alpha, self.gamma, self.h_e)

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.T / self.dt - 1e-9)) if self.T > 0 else 0

    @property
    def run_name(self) -> str:
        return self.name or f"{self.initial.split(':')[0]}_{self.scheme}_dt{self.dt:g}"

    def with_overrides(self, overrides) -> "SimulationConfig":
        """Apply ``{"run.dt": "1e-13", ...}`` style overrides."""
        changes = {}
        for key, raw in dict(overrides).items():
            if key not in _KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            attr, parse = _KEYS[key]
            try:
                changes[attr] = parse(raw) if isinstance(raw, str) else raw
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        return replace(self, **changes)

    def to_dotted(self) -> dict:
        out = {}
        for key, (attr, _) in _KEYS.items():
            v = getattr(self, attr)
            out[key] = ",".join(repr(x) for x in v) if isinstance(v, tuple) else v
        return out


def parse_overrides(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_config(path, overrides=None) -> SimulationConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    path = Path(path)
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path}")
    values = {}
    for section in parser.sections():
        for option, raw in parser.items(section):
            values[f"{section}.{option}"] = raw
    values.update(overrides or {})
    cfg = SimulationConfig().with_overrides(values)
    # relative file: initial states resolve against the manifest directory
    if cfg.initial.startswith("file:"):
        p = Path(cfg.initial[5:])
        if not p.is_absolute():
            cfg = replace(cfg, initial="file:" + str(path.parent / p))
    return replace(cfg, source=str(path))


__all__ = ["SCHEMES", "SimulationConfig", "load_config", "parse_overrides"]
