"""Initial magnetizations of the 2 um x 1 um film benchmarks."""

from __future__ import annotations

import numpy as np

from .errors import UnknownPreset
from .mesh import Grid

_UM = 1e-6
# centers within this distance (um) of an interface count as on it; ties go left/lower
_TIE = 1e-9


def _centers_um(grid: Grid):
    x, y, _ = grid.cell_centers()
    return x / _UM, y / _UM


def diamond(grid: Grid) -> np.ndarray:
    x, y = _centers_um(grid)
    left, lower = x <= 1.0 + _TIE, y <= 0.5 + _TIE
    m = np.zeros(grid.vector_shape)
    m[0] = np.where(left == lower, -1.0, 1.0)
    return m


def single_cross_tie(grid: Grid) -> np.ndarray:
    _, y = _centers_um(grid)
    m = np.zeros(grid.vector_shape)
    m[0] = np.where(y <= 0.5 + _TIE, 1.0, -1.0)
    return m


def double_cross_tie(grid: Grid) -> np.ndarray:
    x, _ = _centers_um(grid)
    # stripes of width 0.5, 0.25, 0.25, 0.25, 0.25, 0.5 alternating +y / -y
    edges = np.array([0.5, 0.75, 1.0, 1.25, 1.5])
    stripe = np.searchsorted(edges, x - _TIE, side="left")
    m = np.zeros(grid.vector_shape)
    m[1] = np.where(stripe % 2 == 0, 1.0, -1.0)
    return m


def uniform(grid: Grid, direction) -> np.ndarray:
    v = np.asarray(direction, dtype=float)
    n = np.linalg.norm(v)
    if v.shape != (3,) or not n > 0:
        raise ValueError("uniform direction must be a non-zero 3-vector")
    return np.broadcast_to((v / n).reshape(3, 1, 1, 1), grid.vector_shape).copy()


PRESETS = {
    "diamond": diamond,
    "single_cross_tie": single_cross_tie,
    "sct": single_cross_tie,
    "double_cross_tie": double_cross_tie,
    "dct": double_cross_tie,
}


def preset_initial(name: str, grid: Grid) -> np.ndarray:
    """Named initial state evaluated at cell centers (ties go to the left/lower region)."""
    try:
        return PRESETS[name](grid)
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
