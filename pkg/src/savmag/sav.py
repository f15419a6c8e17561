"""Scalar auxiliary variable steppers for the constrained gradient flow.

One step solves two constant-coefficient systems ``A x = F`` and
``A y = h_m`` with a cosine transform, recovers ``(m*, h_m)`` from a scalar
equation, assembles the predictor ``m*`` and projects it onto the sphere.
SAV1 advances ``r`` with its own discrete equation; SAV2 resets it from the
magnetostatic energy of the projected state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft

from .demag import DemagKernel
from .energy import MaterialParams, aux_var_from_state, modified_energy
from .errors import DegenerateSav, GridMismatch, NegativeAux, SingularScalarSolve
from .mesh import Grid, check_field, inner_product_h, laplacian, project_unit

EPS_SAV = 1e-14
SCALAR_DENOM_TOL = 1e-14
NEGATIVE_AUX_TOL = 1e-10


@dataclass(frozen=True)
class SavState:
    m: np.ndarray
    r: float
    h_m: np.ndarray
    t: float = 0.0


def initial_state(m0, kernel: DemagKernel, t: float = 0.0) -> SavState:
    """Start a run: cache ``h_m`` and set ``r`` from its definition."""
    m0 = check_field(m0, kernel.grid)
    h_m = kernel.apply(m0)
    return SavState(m=m0, r=aux_var_from_state(m0, h_m, kernel.grid), h_m=h_m, t=t)


def neumann_eigenvalues(n: int, h: float) -> np.ndarray:
    """Eigenvalues of the mirror-ghost second difference in the DCT-II basis."""
    k = np.arange(n)
    return (2.0 * np.cos(np.pi * k / n) - 2.0) / (h * h)


class SpectralOperatorA:
    """``A = I + C_an dt_eff P_23 - C_e dt_eff lap_h``, diagonal in cosine modes.

    ``dt`` is the physical step; the flow is rescaled internally by ``eta``.
    """

    def __init__(self, grid: Grid, params: MaterialParams, dt: float):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.grid = grid
        self.params = params
        self.dt = float(dt)
        self.dt_eff = self.dt / params.eta
        nz, ny, nx = grid.shape
        lam = (
            neumann_eigenvalues(nz, grid.hz)[:, None, None]
            + neumann_eigenvalues(ny, grid.hy)[None, :, None]
            + neumann_eigenvalues(nx, grid.hx)[None, None, :]
        )
        self.eigenvalues = lam
        base = 1.0 - params.C_e * self.dt_eff * lam
        self.eigen_divisors = np.stack([base, base + params.C_an * self.dt_eff])
        if not np.all(self.eigen_divisors >= 1.0 - 1e-15):
            raise ArithmeticError("operator A lost positivity")
        self._div = self.eigen_divisors[[0, 1, 1]]
        self.axes = tuple(1 + k for k, n in enumerate(grid.shape) if n > 1)

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Real-space stencil form of ``A``."""
        p = self.params
        out = u - p.C_e * self.dt_eff * laplacian(u, self.grid)
        out[1:] += p.C_an * self.dt_eff * u[1:]
        return out

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if np.shape(rhs) != self.grid.vector_shape:
            raise GridMismatch(f"rhs of shape {np.shape(rhs)} does not match grid")
        if not self.axes:
            return np.asarray(rhs, dtype=float) / self._div
        coef = sfft.dctn(rhs, type=2, norm="ortho", axes=self.axes)
        coef /= self._div
        return sfft.idctn(coef, type=2, norm="ortho", axes=self.axes)


def build_operator(grid: Grid, params: MaterialParams, dt: float) -> SpectralOperatorA:
    return SpectralOperatorA(grid, params, dt)


def spectral_solve(A: SpectralOperatorA, rhs: np.ndarray) -> np.ndarray:
    return A.solve(rhs)


def _demag_scale(s: SavState, grid: Grid):
    hm_m = inner_product_h(s.h_m, s.m, grid)
    e = -0.5 * hm_m
    return hm_m, math.sqrt(max(e, 0.0)), e / grid.domain_volume < EPS_SAV


def sav_substep(s: SavState, A: SpectralOperatorA, p: MaterialParams, dt: float, strict: bool = False):
    """Compute the unprojected predictor ``m*`` and ``ip = (m*, h_m)_h``.

    When the stray-field energy density drops below ``EPS_SAV`` the auxiliary
    term is dropped and ``m* = A^{-1} m`` (or ``DegenerateSav`` is raised if
    ``strict``).
    """
    grid = A.grid
    if not math.isclose(dt, A.dt, rel_tol=1e-12):
        raise ValueError(f"dt={dt} does not match the operator (dt={A.dt})")
    hm_m, scale, degenerate = _demag_scale(s, grid)
    if degenerate:
        if strict:
            raise DegenerateSav("magnetostatic energy vanishes; SAV ratio undefined")
        m_star = A.solve(s.m)
        return m_star, inner_product_h(m_star, s.h_m, grid)
    tau = A.dt_eff
    F = s.m + (tau * (s.r / scale - 1.0)) * s.h_m
    x = A.solve(F)
    y = A.solve(s.h_m)
    denom = 1.0 - tau * inner_product_h(y, s.h_m, grid) / hm_m
    if abs(denom) < SCALAR_DENOM_TOL:
        raise SingularScalarSolve(f"scalar equation denominator {denom:g}")
    ip = inner_product_h(x, s.h_m, grid) / denom
    m_star = x + (tau * ip / hm_m) * y
    return m_star, ip


def _advance(s, A, kernel, p, dt, update_r, info):
    grid = A.grid
    if kernel.grid != grid:
        raise GridMismatch("kernel and operator live on different grids")
    m_star, ip = sav_substep(s, A, p, dt)
    m_new = project_unit(m_star)
    h_new = kernel.apply(m_new)
    r_new = update_r(s, m_new, h_new, grid)
    if info is not None:
        info["m_star"] = m_star
        info["ip"] = ip
    return SavState(m=m_new, r=r_new, h_m=h_new, t=s.t + dt)


def _sav1_r(s, m_new, h_new, grid):
    hm_m, scale, degenerate = _demag_scale(s, grid)
    if degenerate:
        return s.r
    r = s.r - inner_product_h(s.h_m, m_new - s.m, grid) / (2.0 * scale)
    if r < 0:
        # compare against the natural magnitude of r
        ref = max(math.sqrt(grid.domain_volume), s.r)
        if r < -NEGATIVE_AUX_TOL * ref:
            raise NegativeAux(f"auxiliary variable went negative: {r:g}")
        r = 0.0
    return r


def _sav2_r(s, m_new, h_new, grid):
    return aux_var_from_state(m_new, h_new, grid)


def sav1_step(s: SavState, A: SpectralOperatorA, kernel: DemagKernel, p: MaterialParams, dt: float, info=None) -> SavState:
    """One SAV1 step: ``r`` follows its discrete evolution equation with ``m^{n+1}``."""
    return _advance(s, A, kernel, p, dt, _sav1_r, info)


def sav2_step(s: SavState, A: SpectralOperatorA, kernel: DemagKernel, p: MaterialParams, dt: float, info=None) -> SavState:
    """One SAV2 step: ``r`` is reset to ``sqrt(E_m(m^{n+1}))``."""
    return _advance(s, A, kernel, p, dt, _sav2_r, info)


def intermediate_energies(s: SavState, m_star: np.ndarray, grid: Grid, p: MaterialParams):
    """Modified energies ``(g(m^n, r^n), g(m*, r*))`` around one predictor.

    ``r*`` is reconstructed from its linear update equation.  When the demag
    guard is active ``r*`` equals ``r^n``.
    """
    _, scale, degenerate = _demag_scale(s, grid)
    if degenerate:
        r_star = s.r
    else:
        r_star = s.r - inner_product_h(s.h_m, m_star - s.m, grid) / (2.0 * scale)
    g_n = modified_energy(s.m, s.r, grid, p)
    g_star = modified_energy(m_star, abs(r_star), grid, p)
    return g_n, g_star


def with_time(s: SavState, t: float) -> SavState:
    return replace(s, t=t)
