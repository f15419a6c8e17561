import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_unit
from savmag.demag import (
    DemagKernel,
    averaged_dipole_tensor,
    cell_tensor,
    direct_demag,
    dipole_tensor,
    magnetostatic_energy,
    newell_tensor,
)
from savmag.errors import GridMismatch, NegativeEnergy
from savmag.mesh import Grid, inner_product_h


def aharoni_nz(A, B, C):
    """Closed-form z demag factor of an A x B x C prism (Aharoni 1998)."""
    a, b, c = A / 2, B / 2, C / 2
    r = np.sqrt(a * a + b * b + c * c)
    ab, bc, ac = np.hypot(a, b), np.hypot(b, c), np.hypot(a, c)
    s = (
        (b * b - c * c) / (2 * b * c) * np.log((r - a) / (r + a))
        + (a * a - c * c) / (2 * a * c) * np.log((r - b) / (r + b))
        + b / (2 * c) * np.log((ab + a) / (ab - a))
        + a / (2 * c) * np.log((ab + b) / (ab - b))
        + c / (2 * a) * np.log((bc - b) / (bc + b))
        + c / (2 * b) * np.log((ac - a) / (ac + a))
        + 2 * np.arctan(a * b / (c * r))
        + (a**3 + b**3 - 2 * c**3) / (3 * a * b * c)
        + (a * a + b * b - 2 * c * c) / (3 * a * b * c) * r
        + c / (a * b) * (ac + bc)
        - (ab**3 + bc**3 + ac**3) / (3 * a * b * c)
    )
    return s / np.pi


def test_cube_self_term():
    N = newell_tensor(0.0, 0.0, 0.0, 1.0, 1.0, 1.0)
    np.testing.assert_allclose(N[:3], 1 / 3, rtol=1e-10)
    np.testing.assert_allclose(N[3:], 0.0, atol=1e-12)


@pytest.mark.parametrize("dims", [(1.0, 1.0, 1.0), (2.0, 1.0, 0.1), (1.0, 3.0, 0.5), (20.0, 20.0, 20.0)])
def test_self_term_matches_prism_factors(dims):
    a, b, c = dims
    N = newell_tensor(0.0, 0.0, 0.0, a, b, c)
    assert N[2] == pytest.approx(aharoni_nz(a, b, c), rel=1e-10)
    assert N[0] == pytest.approx(aharoni_nz(b, c, a), rel=1e-10)
    assert N[1] == pytest.approx(aharoni_nz(c, a, b), rel=1e-10)
    assert N[0] + N[1] + N[2] == pytest.approx(1.0, rel=1e-10)


def test_sp1_cell_self_term():
    N = newell_tensor(0.0, 0.0, 0.0, 2e-8, 2e-8, 2e-8)
    np.testing.assert_allclose(N[:3], 1 / 3, rtol=1e-10)


def test_near_field_matches_high_order_quadrature():
    # smooth integrand once the cells are disjoint; high-order Gauss converges
    h = (1.0, 0.7, 0.4)
    for R in [(3.0, 0.0, 0.0), (2.0, 2.1, 0.0), (3.0, -1.4, 0.8), (0.0, 0.0, 2.0)]:
        N = newell_tensor(*R, *h)
        Q = averaged_dipole_tensor(*R, *h, order=16)
        np.testing.assert_allclose(N, Q, rtol=1e-7, atol=1e-9 * np.max(np.abs(Q)))


def test_far_field_tends_to_dipole():
    h = 1.0
    for R in [(30.0, 0.0, 0.0), (17.0, 23.0, 5.0), (0.0, 0.0, 40.0)]:
        N = cell_tensor(np.array(R[0]), np.array(R[1]), np.array(R[2]), h, h, h)
        D = dipole_tensor(*R, volume=1.0)
        big = np.max(np.abs(D))
        np.testing.assert_allclose(N, D, atol=0.01 * big)


def test_cutoff_continuity():
    # both paths agree where the switch happens
    h = (2e-8, 2e-8, 2e-8)
    R = (8 * 2e-8, 0.0, 0.0)
    np.testing.assert_allclose(newell_tensor(*R, *h), averaged_dipole_tensor(*R, *h), rtol=1e-8, atol=1e-12)


def test_tensor_symmetry():
    h = (1.0, 0.5, 0.3)
    a = newell_tensor(1.0, 2.0, 0.6, *h)
    b = newell_tensor(-1.0, -2.0, -0.6, *h)
    np.testing.assert_allclose(a, b, rtol=1e-12)
    c = newell_tensor(-1.0, 2.0, 0.6, *h)
    # odd in x for xy and xz, even otherwise
    np.testing.assert_allclose(c[[0, 1, 2, 5]], a[[0, 1, 2, 5]], rtol=1e-12)
    np.testing.assert_allclose(c[[3, 4]], -a[[3, 4]], rtol=1e-12)


@pytest.mark.parametrize("n", [(8, 8, 4), (5, 3, 1), (1, 1, 6), (7, 1, 1), (12, 6, 2)])
def test_fft_matches_direct_sum(n, rng):
    g = Grid(*n, 1.0, 0.8, 0.5)
    k = DemagKernel(g)
    m = random_unit(g, rng)
    h = k.apply(m)
    ref = direct_demag(m, g)
    np.testing.assert_allclose(h, ref, atol=1e-12, rtol=0)


def test_uniform_single_cell(rng):
    g = Grid(1, 1, 1, 1.0, 1.0, 1.0)
    m = np.zeros(g.vector_shape)
    m[2] = 1.0
    h = DemagKernel(g).apply(m)
    np.testing.assert_allclose(h[:, 0, 0, 0], [0.0, 0.0, -1 / 3], atol=1e-12)
    assert magnetostatic_energy(h, m, g) == pytest.approx(1 / 6, rel=1e-10)


def test_linearity(rng):
    g = Grid(6, 5, 2, 1.0, 1.0, 1.0)
    k = DemagKernel(g)
    a, b = rng.normal(size=(2,) + g.vector_shape)
    np.testing.assert_allclose(k(2.0 * a - 0.5 * b), 2.0 * k(a) - 0.5 * k(b), atol=1e-12)


def test_self_adjoint(rng):
    g = Grid(6, 4, 3, 1.0, 0.5, 0.8)
    k = DemagKernel(g)
    a, b = rng.normal(size=(2,) + g.vector_shape)
    lhs = inner_product_h(k(a), b, g)
    rhs = inner_product_h(a, k(b), g)
    assert lhs == pytest.approx(rhs, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.tuples(st.integers(1, 6), st.integers(1, 5), st.integers(1, 3)), st.integers(0, 2**32 - 1))
def test_energy_nonnegative(n, seed):
    g = Grid(*n, 1.0, 0.7, 0.4)
    m = np.random.default_rng(seed).normal(size=g.vector_shape)
    h = DemagKernel(g).apply(m)
    assert -0.5 * inner_product_h(h, m, g) >= -1e-12 * g.domain_volume


def test_thin_film_out_of_plane(sp1_grid, sp1_kernel):
    m = np.zeros(sp1_grid.vector_shape)
    m[2] = 1.0
    h = sp1_kernel.apply(m)
    centre = h[:, 0, 25, 50]
    assert -1.0 < centre[2] < -0.9
    assert abs(centre[0]) < 1e-10 and abs(centre[1]) < 1e-10


def test_thin_film_in_plane_small(sp1_grid, sp1_kernel):
    m = np.zeros(sp1_grid.vector_shape)
    m[0] = 1.0
    h = sp1_kernel.apply(m)
    assert -0.05 < h[0, 0, 25, 50] < 0.0


def test_disabled_kernel():
    g = Grid(3, 2, 1, 1.0, 1.0, 1.0)
    k = DemagKernel(g, enabled=False)
    np.testing.assert_array_equal(k(np.ones(g.vector_shape)), 0.0)


def test_kernel_grid_mismatch():
    k = DemagKernel(Grid(3, 2, 1, 1.0, 1.0, 1.0))
    with pytest.raises(GridMismatch):
        k.apply(np.zeros((3, 1, 2, 4)))


def test_tensor_at():
    g = Grid(4, 3, 1, 1.0, 1.0, 1.0)
    k = DemagKernel(g)
    np.testing.assert_allclose(k.tensor_at(2, -1, 0), newell_tensor(2.0, -1.0, 0.0, 1.0, 1.0, 1.0), rtol=1e-12)
    with pytest.raises(IndexError):
        k.tensor_at(4, 0, 0)


def test_negative_energy_raises():
    g = Grid(1, 1, 1, 1.0, 1.0, 1.0)
    m = np.zeros(g.vector_shape)
    m[0] = 1.0
    with pytest.raises(NegativeEnergy):
        magnetostatic_energy(m, m, g)
