"""Gibbs free energy, effective field and the SAV modified energy.

All energies are in the units of the normalized functional, i.e. an integral
of a dimensionless density over the domain (cubic meters).  Divide by the
domain volume for a density; multiply the density by 2 to express it in units
of the stray-field constant ``K_d = mu0 Ms^2 / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, NegativeEnergy
from .mesh import Grid, inner_product_h, laplacian

NEGATIVE_ENERGY_TOL = 1e-8


@dataclass(frozen=True)
class MaterialParams:
    """Material constants; defaults are the muMag Standard Problem No. 1 values."""

    C_ex: float = 1.3e-11
    K_u: float = 5.0e2
    M_s: float = 8.0e5
    mu0: float = 4e-7 * math.pi
    alpha: float = 0.1
    gamma: float = 2.211e5
    h_e: tuple = field(default=(0.0, 0.0, 0.0))

    def __post_init__(self):
        for name in ("M_s", "mu0", "gamma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("C_ex", "K_u", "alpha"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")
        h_e = tuple(float(v) for v in self.h_e)
        if len(h_e) != 3:
            raise ValueError("h_e must be a 3-vector")
        object.__setattr__(self, "h_e", h_e)

    @property
    def C_e(self) -> float:
        """Exchange coefficient ``2 C_ex / (mu0 Ms^2)`` in m^2."""
        return 2.0 * self.C_ex / (self.mu0 * self.M_s**2)

    @property
    def C_an(self) -> float:
        return 2.0 * self.K_u / (self.mu0 * self.M_s**2)

    @property
    def eta(self) -> float:
        """Time rescaling ``alpha / (gamma Ms)`` in seconds."""
        return self.alpha / (self.gamma * self.M_s)

    @property
    def K_d(self) -> float:
        return 0.5 * self.mu0 * self.M_s**2

    @property
    def has_zeeman(self) -> bool:
        return any(v != 0.0 for v in self.h_e)


@dataclass(frozen=True)
class EnergyBreakdown:
    exchange: float
    anisotropy: float
    magnetostatic: float
    zeeman: float
    total: float
    modified_total: float
    normalized_total: float

    @property
    def energy_density_Kd(self) -> float:
        """Energy per volume in units of ``K_d``."""
        return 2.0 * self.normalized_total


def _check_pair(m, h_m):
    if np.shape(m) != np.shape(h_m):
        raise GridMismatch(f"m {np.shape(m)} and h_m {np.shape(h_m)} differ in shape")


def _zeeman_field(p: MaterialParams, m):
    return np.asarray(p.h_e, dtype=float).reshape((3,) + (1,) * (np.ndim(m) - 1))


def exchange_energy(m, grid: Grid, p: MaterialParams) -> float:
    return -0.5 * p.C_e * inner_product_h(laplacian(m, grid), m, grid)


def anisotropy_energy(m, grid: Grid, p: MaterialParams) -> float:
    return 0.5 * p.C_an * inner_product_h(m[1:], m[1:], grid)


def effective_field(m, h_m, grid: Grid, p: MaterialParams) -> np.ndarray:
    """``h_eff = C_e lap(m) - C_an (m2 e2 + m3 e3) + h_m + h_e``."""
    _check_pair(m, h_m)
    h = p.C_e * laplacian(m, grid) + h_m
    h[1:] -= p.C_an * m[1:]
    if p.has_zeeman:
        h += _zeeman_field(p, m)
    return h


def gibbs_energy(m, h_m, grid: Grid, p: MaterialParams, r: float | None = None) -> EnergyBreakdown:
    """Evaluate every term of the free energy.

    ``modified_total`` replaces the magnetostatic term by ``r**2``; with ``r``
    omitted it is taken consistent with ``h_m`` and equals ``total``.
    """
    _check_pair(m, h_m)
    ex = exchange_energy(m, grid, p)
    an = anisotropy_energy(m, grid, p)
    ms = -0.5 * inner_product_h(h_m, m, grid)
    ze = -inner_product_h(np.broadcast_to(_zeeman_field(p, m), m.shape), m, grid) if p.has_zeeman else 0.0
    total = ex + an + ms + ze
    r2 = ms if r is None else r * r
    return EnergyBreakdown(
        exchange=ex,
        anisotropy=an,
        magnetostatic=ms,
        zeeman=ze,
        total=total,
        modified_total=ex + an + r2 + ze,
        normalized_total=total / grid.domain_volume,
    )


def modified_energy(m, r: float, grid: Grid, p: MaterialParams) -> float:
    """Discrete modified energy: exchange + anisotropy + ``r**2``."""
    if r < 0:
        raise ValueError("auxiliary variable must be non-negative")
    return exchange_energy(m, grid, p) + anisotropy_energy(m, grid, p) + r * r


def aux_var_from_state(m, h_m, grid: Grid) -> float:
    """``r = sqrt(-1/2 (h_m, m)_h)``, clamping rounding-level negatives to zero."""
    _check_pair(m, h_m)
    e = -0.5 * inner_product_h(h_m, m, grid)
    if e / grid.domain_volume < -NEGATIVE_ENERGY_TOL:
        raise NegativeEnergy(f"magnetostatic energy density {e / grid.domain_volume:g} < 0")
    return math.sqrt(max(0.0, e))
