import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_unit
from savmag import baselines as bl
from savmag.demag import DemagKernel
from savmag.energy import MaterialParams, effective_field, gibbs_energy
from savmag.errors import NoConvergence
from savmag.mesh import Grid, project_unit
from savmag.sav import SpectralOperatorA

H = 2e-8


def setup(n=(6, 5, 1), seed=1):
    g = Grid(*n, H, H, H)
    p = MaterialParams()
    k = DemagKernel(g)
    return g, p, k, random_unit(g, np.random.default_rng(seed))


def h_eff(m, k, p):
    return effective_field(m, k(m), k.grid, p)


def test_iterative_config_validation():
    with pytest.raises(ValueError):
        bl.IterativeSolveConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        bl.IterativeSolveConfig(max_iters=0)


def test_stationary_uniform_state():
    g = Grid(4, 3, 1, H, H, H)
    p = MaterialParams()
    k = DemagKernel(g, enabled=False)
    m = np.zeros(g.vector_shape)
    m[0] = 1.0
    cfg = bl.IterativeSolveConfig()
    for out in (
        bl.fep_step(m, k, p, 1e-12),
        bl.bep_step(m, k, p, 1e-12, cfg),
        bl.llg_forward_euler_step(m, k, p, 1e-13),
        bl.llg_backward_euler_step(m, k, p, 1e-13, cfg),
        bl.llg_midpoint_step(m, k, p, 1e-13, cfg),
    ):
        np.testing.assert_allclose(out, m, atol=1e-15)


def test_fep_definition():
    g, p, k, m = setup()
    dt = 1e-13
    expect = project_unit(m + dt / p.eta * h_eff(m, k, p))
    np.testing.assert_allclose(bl.fep_step(m, k, p, dt), expect, rtol=1e-14)
    np.testing.assert_allclose(bl.fep_step(m, k, p, dt, h_m=k(m)), expect, rtol=1e-14)
    with pytest.raises(ValueError):
        bl.fep_step(m, k, p, -1.0)


def test_bep_residual_and_dissipation():
    g, p, k, m = setup()
    dt = 5e-13
    A = SpectralOperatorA(g, p, dt)
    cfg = bl.IterativeSolveConfig(tolerance=1e-10)
    m_star, its = bl.bep_predictor(m, k, p, A, cfg)
    assert its >= 1
    res = m_star - m - A.dt_eff * h_eff(m_star, k, p)
    # residual measured in the same units as the rhs (dt_eff * field)
    assert np.max(np.abs(A.solve(res))) < 10 * cfg.tolerance
    m1 = project_unit(m_star)
    assert gibbs_energy(m1, k(m1), g, p).total < gibbs_energy(m, k(m), g, p).total


def test_bep_no_convergence():
    g, p, k, m = setup()
    A = SpectralOperatorA(g, p, 1e-12)
    with pytest.raises(NoConvergence):
        bl.bep_predictor(m, k, p, A, bl.IterativeSolveConfig(tolerance=1e-300, max_iters=2))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_cell_system_matches_dense_solve(v):
    w = np.array(v[:3]).reshape(3, 1)
    b = np.array(v[3:]).reshape(3, 1)
    W = np.array([[0, -w[2, 0], w[1, 0]], [w[2, 0], 0, -w[0, 0]], [-w[1, 0], w[0, 0], 0]])
    ref = np.linalg.solve(np.eye(3) - W, b[:, 0])
    np.testing.assert_allclose(bl.solve_cell_systems(w, b)[:, 0], ref, rtol=1e-12, atol=1e-12)


def test_llg_forward_euler_matches_dense_oracle():
    g, p, k, m = setup((3, 2, 1))
    dt = 1e-13
    tau = p.gamma * p.M_s * dt
    h = h_eff(m, k, p)
    got = bl.llg_forward_euler_step(m, k, p, dt)
    for idx in np.ndindex(g.shape):
        mi = m[(slice(None),) + idx]
        hi = h[(slice(None),) + idx]
        M = np.array([[0, -mi[2], mi[1]], [mi[2], 0, -mi[0]], [-mi[1], mi[0], 0]])
        d = np.linalg.solve(np.eye(3) - p.alpha * M, -tau * np.cross(mi, hi))
        np.testing.assert_allclose(got[(slice(None),) + idx], mi + d, rtol=1e-12, atol=1e-14)


def test_llg_backward_euler_residual():
    g, p, k, m = setup()
    dt = 1e-14
    tau = p.gamma * p.M_s * dt
    cfg = bl.IterativeSolveConfig(tolerance=1e-13)
    x = bl.llg_backward_euler_step(m, k, p, dt, cfg)
    d = x - m
    res = d + tau * np.cross(x, h_eff(x, k, p), axis=0) - p.alpha * np.cross(x, d, axis=0)
    assert np.max(np.abs(res)) < 1e-11


def test_llg_midpoint_residual_and_norm():
    g, p, k, m = setup()
    dt = 1e-14
    tau = p.gamma * p.M_s * dt
    cfg = bl.IterativeSolveConfig(tolerance=1e-13)
    x = bl.llg_midpoint_step(m, k, p, dt, cfg)
    d = x - m
    mbar = 0.5 * (m + x)
    hbar = 0.5 * (h_eff(m, k, p) + h_eff(x, k, p))
    res = d + tau * np.cross(mbar, hbar, axis=0) - p.alpha * np.cross(mbar, d, axis=0)
    assert np.max(np.abs(res)) < 1e-11
    np.testing.assert_allclose(np.linalg.norm(x, axis=0), 1.0, atol=1e-14)


def test_llg_midpoint_norm_over_many_steps():
    g, p, k, m = setup((5, 4, 1), 7)
    cfg = bl.IterativeSolveConfig()
    e0 = gibbs_energy(m, k(m), g, p).total
    for _ in range(50):
        m = bl.llg_midpoint_step(m, k, p, 1e-14, cfg)
    assert np.max(np.abs(np.linalg.norm(m, axis=0) - 1.0)) < 1e-13
    assert gibbs_energy(m, k(m), g, p).total < e0


def test_llg_no_convergence():
    g, p, k, m = setup()
    cfg = bl.IterativeSolveConfig(tolerance=1e-300, max_iters=2)
    with pytest.raises(NoConvergence):
        bl.llg_midpoint_step(m, k, p, 1e-13, cfg)
    with pytest.raises(NoConvergence):
        bl.llg_backward_euler_step(m, k, p, 1e-13, cfg)
