"""Cell-averaged demagnetization tensor and its FFT convolution.

The stray field of a piecewise-constant magnetization is ``h_m = -N * m``
where ``N`` is the Newell cell-pair averaged tensor.  Near pairs use the
closed-form Newell expressions; far pairs (where the sixth-order finite
difference of the Newell potentials cancels catastrophically) use a
tent-weighted Gauss quadrature of the point-dipole kernel, which converges
to the same cell-pair average.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.fft as sfft
from scipy.special import roots_jacobi

from .errors import GridMismatch, NegativeEnergy
from .mesh import Grid, check_field, inner_product_h

# separation (in largest cell edges) beyond which the quadrature path is used
FAR_FIELD_CUTOFF = 8.0
FAR_FIELD_ORDER = 4
DIRECT_SUM_MAX_CELLS = 4096
NEGATIVE_ENERGY_TOL = 1e-8

# (i, j) component pairs in storage order
COMPONENTS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
_EPS = 1e-18


def _newell_f(x, y, z):
    x, y, z = np.abs(x), np.abs(y), np.abs(z)
    x2, y2, z2 = x * x, y * y, z * z
    r = np.sqrt(x2 + y2 + z2)
    return (
        0.5 * y * (z2 - x2) * np.arcsinh(y / (np.sqrt(x2 + z2) + _EPS))
        + 0.5 * z * (y2 - x2) * np.arcsinh(z / (np.sqrt(x2 + y2) + _EPS))
        - x * y * z * np.arctan(y * z / (x * r + _EPS))
        + (2.0 * x2 - y2 - z2) * r / 6.0
    )


def _newell_g(x, y, z):
    z = np.abs(z)
    x2, y2, z2 = x * x, y * y, z * z
    r = np.sqrt(x2 + y2 + z2)
    return (
        x * y * z * np.arcsinh(z / (np.sqrt(x2 + y2) + _EPS))
        + y / 6.0 * (3.0 * z2 - y2) * np.arcsinh(x / (np.sqrt(y2 + z2) + _EPS))
        + x / 6.0 * (3.0 * z2 - x2) * np.arcsinh(y / (np.sqrt(x2 + z2) + _EPS))
        - z2 * z / 6.0 * np.arctan(x * y / (z * r + _EPS))
        - 0.5 * z * y2 * np.arctan(x * z / (y * r + _EPS))
        - 0.5 * z * x2 * np.arctan(y * z / (x * r + _EPS))
        - x * y * r / 3.0
    )


def _second_difference(func, X, Y, Z, hx, hy, hz):
    """Apply the (-1, 2, -1) stencil along all three axes to ``func``."""
    w = {-1: -1.0, 0: 2.0, 1: -1.0}
    acc = np.zeros(np.broadcast(X, Y, Z).shape)
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            for c in (-1, 0, 1):
                acc += w[a] * w[b] * w[c] * func(X + a * hx, Y + b * hy, Z + c * hz)
    return acc


def newell_tensor(X, Y, Z, hx, hy, hz) -> np.ndarray:
    """Exact Newell tensor for displacements ``(X, Y, Z)`` between box cells.

    Returns an array of shape ``(6,) + X.shape`` in ``COMPONENTS`` order.  The
    sign convention makes the self term of a cube ``diag(1/3, 1/3, 1/3)``.
    """
    X, Y, Z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (X, Y, Z)))
    # scale to O(1) numbers; N is scale-free
    s = max(hx, hy, hz)
    X, Y, Z, hx, hy, hz = X / s, Y / s, Z / s, hx / s, hy / s, hz / s
    pref = 1.0 / (4.0 * np.pi * hx * hy * hz)
    out = np.empty((6,) + X.shape)
    out[0] = pref * _second_difference(_newell_f, X, Y, Z, hx, hy, hz)
    out[1] = pref * _second_difference(lambda a, b, c: _newell_f(b, c, a), X, Y, Z, hx, hy, hz)
    out[2] = pref * _second_difference(lambda a, b, c: _newell_f(c, a, b), X, Y, Z, hx, hy, hz)
    out[3] = pref * _second_difference(_newell_g, X, Y, Z, hx, hy, hz)
    out[4] = pref * _second_difference(lambda a, b, c: _newell_g(a, c, b), X, Y, Z, hx, hy, hz)
    out[5] = pref * _second_difference(lambda a, b, c: _newell_g(b, c, a), X, Y, Z, hx, hy, hz)
    return out


def dipole_tensor(X, Y, Z, volume: float = 1.0) -> np.ndarray:
    """Point-dipole demag tensor ``V/(4 pi) (I/r^3 - 3 r r^T / r^5)``."""
    X, Y, Z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (X, Y, Z)))
    r2 = X * X + Y * Y + Z * Z
    r = np.sqrt(r2)
    inv3 = 1.0 / (r2 * r)
    inv5 = inv3 / r2
    c = volume / (4.0 * np.pi)
    R = (X, Y, Z)
    out = np.empty((6,) + X.shape)
    for k, (i, j) in enumerate(COMPONENTS):
        out[k] = c * ((inv3 if i == j else 0.0) - 3.0 * R[i] * R[j] * inv5)
    return out


def _tent_rule(order: int):
    """Quadrature nodes/weights on [-1, 1] for the weight ``1 - |t|``."""
    x, w = roots_jacobi(order, 1.0, 0.0)
    t = 0.5 * (x + 1.0)
    nodes = np.concatenate([-t[::-1], t])
    weights = np.concatenate([w[::-1], w]) / 4.0
    return nodes, weights


def averaged_dipole_tensor(X, Y, Z, hx, hy, hz, order: int = FAR_FIELD_ORDER) -> np.ndarray:
    """Cell-pair average of the dipole kernel by tent-weighted Gauss quadrature."""
    X, Y, Z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (X, Y, Z)))
    t, w = _tent_rule(order)
    out = np.zeros((6,) + X.shape)
    for tx, wx in zip(t, w):
        for ty, wy in zip(t, w):
            for tz, wz in zip(t, w):
                out += (wx * wy * wz) * dipole_tensor(X + tx * hx, Y + ty * hy, Z + tz * hz)
    return out * (hx * hy * hz)


def cell_tensor(X, Y, Z, hx, hy, hz) -> np.ndarray:
    """Cell-averaged tensor, switching to quadrature for well-separated pairs."""
    X, Y, Z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (X, Y, Z)))
    hmax = max(hx, hy, hz)
    far = np.sqrt(X * X + Y * Y + Z * Z) >= FAR_FIELD_CUTOFF * hmax
    out = np.empty((6,) + X.shape)
    if np.any(~far):
        out[:, ~far] = newell_tensor(X[~far], Y[~far], Z[~far], hx, hy, hz)
    if np.any(far):
        out[:, far] = averaged_dipole_tensor(X[far], Y[far], Z[far], hx, hy, hz)
    return out


def _padded_offsets(n: int) -> np.ndarray:
    """Integer displacement held by each slot of a circularly padded axis."""
    if n == 1:
        return np.zeros(1, dtype=int)
    idx = np.arange(2 * n)
    return np.where(idx < n, idx, idx - 2 * n)


class DemagKernel:
    """Demagnetization operator on a fixed grid.

    The six independent tensor components are placed on a zero-padded grid
    (twice the cell count on every non-singleton axis) and transformed once.
    The spectra are real because every component is even or odd in each
    axis, so only the real parts are stored.

    Parameters
    ----------
    grid : Grid
    enabled : bool
        ``False`` yields a kernel that returns a zero field; used to switch the
        stray field off in tests and demag-free runs.
    """

    def __init__(self, grid: Grid, enabled: bool = True):
        self.grid = grid
        self.enabled = enabled
        self.padded_shape = tuple(1 if n == 1 else 2 * n for n in grid.shape)
        self.fft_axes = tuple(1 + k for k, n in enumerate(grid.shape) if n > 1)
        self._active = ()
        self.tensor_spectra = None
        if enabled:
            self._build()

    def _build(self):
        g = self.grid
        kz, ky, kx = (_padded_offsets(n) for n in g.shape)
        Z, Y, X = np.meshgrid(kz * g.hz, ky * g.hy, kx * g.hx, indexing="ij")
        real_space = cell_tensor(X, Y, Z, g.hx, g.hy, g.hz)
        # slot n of a padded axis holds displacement -n, which never occurs
        for k, n in enumerate(g.shape):
            if n > 1:
                sl = [slice(None)] * 4
                sl[1 + k] = n
                real_space[tuple(sl)] = 0.0
        self.self_tensor = real_space[(slice(None), 0, 0, 0)].copy()
        self._real_space = real_space
        active = [c for c in range(6) if np.any(real_space[c] != 0.0)]
        self._active = tuple(active)
        if self.fft_axes:
            spectra = sfft.rfftn(real_space, axes=self.fft_axes)
            self.tensor_spectra = np.ascontiguousarray(spectra.real)
        else:
            self.tensor_spectra = real_space.copy()

    @cached_property
    def _rfft_shape(self):
        return tuple(self.padded_shape[a - 1] for a in self.fft_axes)

    def apply(self, m: np.ndarray) -> np.ndarray:
        """Return ``h_m = -N * m`` for a vector field ``m`` on this grid."""
        g = self.grid
        m = np.asarray(m, dtype=float)
        if m.shape != g.vector_shape:
            raise GridMismatch(f"field of shape {m.shape} does not match grid {g.vector_shape}")
        if not self.enabled:
            return np.zeros_like(m)
        if self.fft_axes:
            mk = sfft.rfftn(m, s=self._rfft_shape, axes=self.fft_axes)
        else:
            mk = m.astype(complex)
        S = self.tensor_spectra
        hk = np.zeros_like(mk)
        for c in self._active:
            i, j = COMPONENTS[c]
            hk[i] -= S[c] * mk[j]
            if i != j:
                hk[j] -= S[c] * mk[i]
        if self.fft_axes:
            h = sfft.irfftn(hk, s=self._rfft_shape, axes=self.fft_axes)
        else:
            h = hk.real
        nz, ny, nx = g.shape
        return np.ascontiguousarray(h[:, :nz, :ny, :nx])

    __call__ = apply

    def tensor_at(self, dx: int, dy: int, dz: int) -> np.ndarray:
        """Real-space tensor components for an integer cell displacement."""
        g = self.grid
        if abs(dx) >= g.nx or abs(dy) >= g.ny or abs(dz) >= g.nz:
            raise IndexError("displacement outside the grid")
        if not self.enabled:
            return np.zeros(6)
        iz = dz % self.padded_shape[0]
        iy = dy % self.padded_shape[1]
        ix = dx % self.padded_shape[2]
        return self._real_space[:, iz, iy, ix].copy()


def build_kernel(grid: Grid) -> DemagKernel:
    return DemagKernel(grid)


def apply_demag(kernel: DemagKernel, m: np.ndarray) -> np.ndarray:
    return kernel.apply(m)


def direct_demag(m: np.ndarray, grid: Grid) -> np.ndarray:
    """O(N^2) pairwise summation of ``-N(x_t - x_s) m_s``; a test oracle."""
    m = check_field(m, grid)
    if grid.n_cells > DIRECT_SUM_MAX_CELLS:
        raise ValueError(f"direct summation limited to {DIRECT_SUM_MAX_CELLS} cells")
    nz, ny, nx = grid.shape
    dz = np.arange(-(nz - 1), nz)
    dy = np.arange(-(ny - 1), ny)
    dx = np.arange(-(nx - 1), nx)
    Z, Y, X = np.meshgrid(dz * grid.hz, dy * grid.hy, dx * grid.hx, indexing="ij")
    T = cell_tensor(X, Y, Z, grid.hx, grid.hy, grid.hz)
    full = np.empty((3, 3) + T.shape[1:])
    for c, (i, j) in enumerate(COMPONENTS):
        full[i, j] = T[c]
        full[j, i] = T[c]
    h = np.zeros_like(m)
    for tz in range(nz):
        for ty in range(ny):
            for tx in range(nx):
                # displacement t - s for every source s, index offset by n-1
                block = full[:, :, tz + nz - 1 :: -1, ty + ny - 1 :: -1, tx + nx - 1 :: -1]
                block = block[:, :, :nz, :ny, :nx]
                h[:, tz, ty, tx] = -np.einsum("ijzyx,jzyx->i", block, m)
    return h


def magnetostatic_energy(h_m: np.ndarray, m: np.ndarray, grid: Grid) -> float:
    """Stray-field energy ``-1/2 (h_m, m)_h``.

    Raises ``NegativeEnergy`` when the energy density is below ``-1e-8``.
    """
    e = -0.5 * inner_product_h(h_m, m, grid)
    if e / grid.domain_volume < -NEGATIVE_ENERGY_TOL:
        raise NegativeEnergy(f"magnetostatic energy density {e / grid.domain_volume:g} < 0")
    return e
