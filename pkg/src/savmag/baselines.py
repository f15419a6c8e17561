"""Reference schemes: Euler projection schemes for the flow and LLG integrators.

Flow schemes (FEP, BEP) take the physical step and rescale by ``eta``; LLG
schemes use the reduced time ``tau = gamma Ms t`` in which the equation reads
``m_t = -m x (h_eff - alpha m_t)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .demag import DemagKernel
from .energy import MaterialParams, effective_field
from .errors import NoConvergence, SingularCellSystem
from .mesh import project_unit
from .sav import SpectralOperatorA

SINGULAR_DET_TOL = 1e-14


@dataclass(frozen=True)
class IterativeSolveConfig:
    """Stopping rule for the nonlinear fixed-point solves.

    Convergence is declared when the max-abs per-cell change between sweeps
    drops below ``tolerance``.
    """

    tolerance: float = 1e-8
    max_iters: int = 500

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be a positive integer")


def max_abs(u) -> float:
    return float(np.max(np.abs(u)))


def _h_eff(m, kernel: DemagKernel, p: MaterialParams):
    return effective_field(m, kernel.apply(m), kernel.grid, p)


def fep_step(m, kernel: DemagKernel, p: MaterialParams, dt: float, h_m=None) -> np.ndarray:
    """Forward Euler projection: explicit step along ``h_eff`` then normalize.

    ``h_m`` may pass in the cached stray field of ``m``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    h = _h_eff(m, kernel, p) if h_m is None else effective_field(m, h_m, kernel.grid, p)
    m_star = m + (dt / p.eta) * h
    return project_unit(m_star)


def bep_predictor(m, kernel: DemagKernel, p: MaterialParams, A: SpectralOperatorA,
                  cfg: IterativeSolveConfig = IterativeSolveConfig()):
    """Solve ``m* = m + dt_eff h_eff(m*)`` with the local part implicit in ``A``.

    Each sweep lags only the stray field.  Returns ``(m*, iterations)``.
    """
    tau = A.dt_eff
    x = A.solve(m + tau * kernel.apply(m))
    for it in range(1, cfg.max_iters + 1):
        x_new = A.solve(m + tau * kernel.apply(x))
        diff = max_abs(x_new - x)
        x = x_new
        if diff < cfg.tolerance:
            return x, it
        if not np.isfinite(diff):
            break
    raise NoConvergence(f"BEP iteration did not reach {cfg.tolerance:g} in {cfg.max_iters} sweeps")


def bep_step(m, kernel: DemagKernel, p: MaterialParams, dt: float,
             cfg: IterativeSolveConfig = IterativeSolveConfig(), A: SpectralOperatorA | None = None) -> np.ndarray:
    """Backward Euler projection step."""
    if A is None:
        A = SpectralOperatorA(kernel.grid, p, dt)
    m_star, _ = bep_predictor(m, kernel, p, A, cfg)
    return project_unit(m_star)


def _cross(a, b):
    return np.cross(a, b, axis=0)


def solve_cell_systems(w, b) -> np.ndarray:
    """Solve ``x - w x x = b`` independently in every cell.

    The matrix ``I - [w]_x`` has determinant ``1 + |w|^2``; its inverse is
    applied in closed form.
    """
    ww = np.einsum("i...,i...->...", w, w)
    det = 1.0 + ww
    if np.any(np.abs(det) < SINGULAR_DET_TOL):
        raise SingularCellSystem("cell system is singular")
    wb = np.einsum("i...,i...->...", w, b)
    return (b + _cross(w, b) + wb * w) / det


def llg_time(dt: float, p: MaterialParams) -> float:
    return p.gamma * p.M_s * dt


def llg_forward_euler_step(m, kernel: DemagKernel, p: MaterialParams, dt: float, h_n=None) -> np.ndarray:
    """Fields and cross-product factor at ``m^n``; damping term implicit per cell."""
    tau = llg_time(dt, p)
    h = _h_eff(m, kernel, p) if h_n is None else h_n
    d = solve_cell_systems(p.alpha * m, -tau * _cross(m, h))
    return m + d


def llg_backward_euler_step(m, kernel: DemagKernel, p: MaterialParams, dt: float,
                            cfg: IterativeSolveConfig = IterativeSolveConfig()) -> np.ndarray:
    """Fully implicit Euler for LLG, solved by fixed-point sweeps; no renormalization."""
    tau = llg_time(dt, p)
    x = m.copy()
    for _ in range(cfg.max_iters):
        h = _h_eff(x, kernel, p)
        # with x and h lagged, the relation is linear in d = m^{n+1} - m^n
        d = solve_cell_systems(p.alpha * x, -tau * _cross(x, h))
        x_new = m + d
        diff = max_abs(x_new - x)
        x = x_new
        if diff < cfg.tolerance:
            return x
        if not np.isfinite(diff):
            break
    raise NoConvergence("LLG backward Euler iteration did not converge")


def llg_midpoint_step(m, kernel: DemagKernel, p: MaterialParams, dt: float,
                      cfg: IterativeSolveConfig = IterativeSolveConfig(), h_n=None) -> np.ndarray:
    """Implicit midpoint rule for LLG.

    With the averaged field ``hbar`` held fixed the relation is linear in
    ``d = m^{n+1} - m^n`` (because ``mbar x d = m^n x d``) and is solved exactly
    per cell, which keeps ``|m|`` constant to rounding.  Sweeps iterate only on
    ``hbar``.  ``h_n`` may pass in a cached ``h_eff(m)``.
    """
    tau = llg_time(dt, p)
    if h_n is None:
        h_n = _h_eff(m, kernel, p)
    hbar = h_n
    x = None
    for _ in range(cfg.max_iters):
        d = solve_cell_systems(0.5 * tau * hbar + p.alpha * m, -tau * _cross(m, hbar))
        x_new = m + d
        diff = np.inf if x is None else max_abs(x_new - x)
        x = x_new
        if diff < cfg.tolerance:
            return x
        if x is not None and not np.all(np.isfinite(x)):
            break
        hbar = 0.5 * (h_n + _h_eff(x, kernel, p))
    raise NoConvergence("LLG midpoint iteration did not converge")
