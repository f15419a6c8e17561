"""Cell-centered grids and the finite-difference operators shared by every scheme.

Fields are plain numpy arrays whose trailing three axes are ``(nz, ny, nx)``,
so x is the fastest-varying index.  A vector field has shape ``(3, nz, ny, nx)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateProjection, GridMismatch

EPS_PROJ = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian cell-centered mesh.

    Parameters
    ----------
    nx, ny, nz : int
        Cell counts along each axis.
    hx, hy, hz : float
        Cell edge lengths in meters.
    origin : tuple of float
        Position of the lower corner of the domain.
    """

    nx: int
    ny: int
    nz: int
    hx: float
    hy: float
    hz: float
    origin: tuple = field(default=(0.0, 0.0, 0.0))

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        for name in ("hx", "hy", "hz"):
            v = float(getattr(self, name))
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v!r}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        if len(self.origin) != 3:
            raise ValueError("origin must have three coordinates")

    @classmethod
    def from_extent(cls, n, extent, origin=(0.0, 0.0, 0.0)) -> "Grid":
        """Build a grid from cell counts ``(nx, ny, nz)`` and physical lengths."""
        nx, ny, nz = n
        lx, ly, lz = extent
        return cls(nx, ny, nz, lx / nx, ly / ny, lz / nz, origin)

    @property
    def shape(self) -> tuple:
        return (self.nz, self.ny, self.nx)

    @property
    def vector_shape(self) -> tuple:
        return (3, self.nz, self.ny, self.nx)

    @property
    def spacing(self) -> tuple:
        """Cell sizes in array-axis order ``(hz, hy, hx)``."""
        return (self.hz, self.hy, self.hx)

    @property
    def counts(self) -> tuple:
        return (self.nx, self.ny, self.nz)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def cell_volume(self) -> float:
        return self.hx * self.hy * self.hz

    @property
    def domain_volume(self) -> float:
        return self.n_cells * self.cell_volume

    @property
    def extent(self) -> tuple:
        return (self.nx * self.hx, self.ny * self.hy, self.nz * self.hz)

    def cell_centers(self):
        """Return ``(x, y, z)`` coordinate arrays, each of shape ``(nz, ny, nx)``."""
        x = self.origin[0] + (np.arange(self.nx) + 0.5) * self.hx
        y = self.origin[1] + (np.arange(self.ny) + 0.5) * self.hy
        z = self.origin[2] + (np.arange(self.nz) + 0.5) * self.hz
        zz, yy, xx = np.meshgrid(z, y, x, indexing="ij")
        return xx, yy, zz


def check_field(u, grid: Grid, vector: bool = True) -> np.ndarray:
    """Validate that ``u`` lives on ``grid`` and return it as a float array."""
    u = np.asarray(u, dtype=float)
    expected = grid.vector_shape if vector else grid.shape
    if u.shape != expected:
        raise GridMismatch(f"field of shape {u.shape} does not match grid {expected}")
    if not np.all(np.isfinite(u)):
        raise ValueError("field contains non-finite values")
    return u


def laplacian(u: np.ndarray, grid: Grid) -> np.ndarray:
    """Second-order Laplacian with homogeneous Neumann (mirror ghost) closure.

    Acts on the trailing three axes, so scalar ``(nz, ny, nx)`` and vector
    ``(3, nz, ny, nx)`` fields are both accepted.  Single-cell axes add nothing.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[-3:] != grid.shape:
        raise GridMismatch(f"field of shape {u.shape} does not match grid {grid.shape}")
    out = np.zeros_like(u)
    nd = u.ndim
    for k, h in enumerate(grid.spacing):
        axis = nd - 3 + k
        if u.shape[axis] == 1:
            continue
        # flux across interior faces; boundary faces carry zero flux
        d = np.diff(u, axis=axis) / (h * h)
        lo = [slice(None)] * nd
        hi = [slice(None)] * nd
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        out[tuple(lo)] += d
        out[tuple(hi)] -= d
    return out


def laplacian_vec(m: np.ndarray, grid: Grid) -> np.ndarray:
    return laplacian(check_field(m, grid), grid)


def inner_product_h(u: np.ndarray, v: np.ndarray, grid: Grid) -> float:
    """Cell-volume weighted discrete L2 inner product."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.shape[-3:] != grid.shape:
        raise GridMismatch(f"shapes {u.shape} and {v.shape} incompatible with grid {grid.shape}")
    return grid.cell_volume * float(np.vdot(u.ravel(), v.ravel()))


def norm_h(u: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(max(inner_product_h(u, u, grid), 0.0)))


def cell_norms(m: np.ndarray) -> np.ndarray:
    """Per-cell Euclidean length of a vector field."""
    return np.sqrt(np.einsum("i...,i...->...", m, m))


def project_unit(m_star: np.ndarray, eps: float = EPS_PROJ) -> np.ndarray:
    """Normalize every cell of ``m_star`` onto the unit sphere."""
    m_star = np.asarray(m_star, dtype=float)
    length = cell_norms(m_star)
    if not np.all(length >= eps):
        bad = int(np.count_nonzero(~(length >= eps)))
        raise DegenerateProjection(f"{bad} cell(s) with |m*| < {eps:g} (or non-finite)")
    return m_star / length


def max_norm_deviation(m: np.ndarray) -> float:
    return float(np.max(np.abs(cell_norms(m) - 1.0)))
