"""Run orchestration: stepping, energy traces, diagnostics and outputs."""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import baselines as bl
from .config import SimulationConfig
from .demag import DemagKernel
from .energy import effective_field, gibbs_energy, modified_energy
from .io import ensure_dir, read_field_csv, read_ovf, write_field_csv, write_ovf, write_trace
from .mesh import Grid, check_field, max_norm_deviation, project_unit
from .presets import preset_initial, uniform
from .sav import SavState, SpectralOperatorA, initial_state, intermediate_energies, sav1_step, sav2_step

log = logging.getLogger(__name__)

DISSIPATION_TOL = 1e-12


@dataclass(frozen=True)
class EnergyTraceRow:
    step: int
    time: float
    exchange: float
    anisotropy: float
    magnetostatic: float
    zeeman: float
    r2: float
    total: float
    modified_total: float
    normalized_total: float
    max_norm_deviation: float
    step_wall_time: float


@dataclass
class RunResult:
    final: np.ndarray
    trace: list
    summary: dict
    state: SavState = field(repr=False, default=None)


def initial_magnetization(spec: str, grid: Grid) -> np.ndarray:
    """Resolve ``diamond``, ``uniform:1,0,0``, ``file:path.ovf`` etc. to a field."""
    if spec.startswith("uniform"):
        _, _, vec = spec.partition(":")
        return uniform(grid, [float(v) for v in (vec or "1,0,0").split(",")])
    if spec.startswith("file:"):
        path = spec[5:]
        if path.endswith(".csv"):
            m = read_field_csv(path, grid)
        else:
            m, g = read_ovf(path)
            if g.shape != grid.shape:
                raise ValueError(f"{path}: grid {g.shape} does not match configured {grid.shape}")
        return project_unit(check_field(m, grid))
    return preset_initial(spec, grid)


def steady_state_reached(m_prev, m_next, dt: float, threshold: float) -> bool:
    """True when ``max |m^{n+1} - m^n| / dt`` falls below ``threshold`` (1/s)."""
    if threshold <= 0:
        return False
    return float(np.max(np.abs(m_next - m_prev))) / dt < threshold


class Stepper:
    """Advance a ``SavState`` with one of the configured schemes.

    Every scheme keeps ``h_m`` of the current magnetization cached; non-SAV
    schemes carry ``r = sqrt(E_m)`` so traces have a uniform layout.
    """

    def __init__(self, scheme, grid, params, kernel: DemagKernel, dt, cfg: bl.IterativeSolveConfig):
        self.scheme = scheme
        self.grid = grid
        self.params = params
        self.kernel = kernel
        self.dt = dt
        self.iter_cfg = cfg
        self.A = SpectralOperatorA(grid, params, dt) if scheme in ("sav1", "sav2", "bep") else None
        self.info = {}

    def start(self, m0) -> SavState:
        return initial_state(m0, self.kernel)

    def _wrap(self, s, m_new):
        h = self.kernel.apply(m_new)
        r = math.sqrt(max(0.0, -0.5 * self.grid.cell_volume * float(np.vdot(h, m_new))))
        return SavState(m=m_new, r=r, h_m=h, t=s.t + self.dt)

    def step(self, s: SavState) -> SavState:
        k, p, dt, grid = self.kernel, self.params, self.dt, self.grid
        self.info = {}
        if self.scheme == "sav1":
            return sav1_step(s, self.A, k, p, dt, self.info)
        if self.scheme == "sav2":
            return sav2_step(s, self.A, k, p, dt, self.info)
        if self.scheme == "fep":
            return self._wrap(s, bl.fep_step(s.m, k, p, dt, h_m=s.h_m))
        if self.scheme == "bep":
            m_star, its = bl.bep_predictor(s.m, k, p, self.A, self.iter_cfg)
            self.info["iterations"] = its
            return self._wrap(s, project_unit(m_star))
        h_n = effective_field(s.m, s.h_m, grid, p)
        if self.scheme == "llg_midpoint":
            return self._wrap(s, bl.llg_midpoint_step(s.m, k, p, dt, self.iter_cfg, h_n=h_n))
        if self.scheme == "llg_be":
            return self._wrap(s, bl.llg_backward_euler_step(s.m, k, p, dt, self.iter_cfg))
        if self.scheme == "llg_fe":
            return self._wrap(s, bl.llg_forward_euler_step(s.m, k, p, dt, h_n=h_n))
        raise ValueError(f"unknown scheme {self.scheme!r}")


def _row(step, s: SavState, grid, params, wall) -> EnergyTraceRow:
    e = gibbs_energy(s.m, s.h_m, grid, params, s.r)
    return EnergyTraceRow(
        step=step,
        time=s.t,
        exchange=e.exchange,
        anisotropy=e.anisotropy,
        magnetostatic=e.magnetostatic,
        zeeman=e.zeeman,
        r2=s.r * s.r,
        total=e.total,
        modified_total=e.modified_total,
        normalized_total=e.normalized_total,
        max_norm_deviation=max_norm_deviation(s.m),
        step_wall_time=wall,
    )


def run(config: SimulationConfig, m0=None, kernel: DemagKernel | None = None, write: bool | None = None,
        raise_on_failure: bool = True) -> RunResult:
    """Integrate ``config`` from its initial state up to ``T`` (or a steady state).

    ``kernel`` may be shared between runs on the same grid.  A stepper error
    carries the failing step in ``exc.step``; with ``raise_on_failure=False``
    it is recorded in the summary instead and the last good state returned.
    """
    grid = config.grid
    params = config.material
    if kernel is None or kernel.grid != grid or kernel.enabled != config.demag:
        kernel = DemagKernel(grid, enabled=config.demag)
    if m0 is None:
        m0 = initial_magnetization(config.initial, grid)
    m0 = check_field(m0, grid)
    iter_cfg = bl.IterativeSolveConfig(config.tolerance, config.max_iters)
    stepper = Stepper(config.scheme, grid, params, kernel, config.dt, iter_cfg)
    is_sav = config.scheme in ("sav1", "sav2")

    s = stepper.start(m0)
    trace = [_row(0, s, grid, params, 0.0)]
    n_steps = config.n_steps
    worst_mid = -math.inf
    mid_violations = 0
    worst_post = -math.inf
    post_increases = 0
    max_r2_gap = 0.0
    max_dev = max_norm_deviation(s.m)
    iterations = []
    steady = False
    failure = None
    step = 0
    t_start = time.perf_counter()
    for step in range(1, n_steps + 1):
        t0 = time.perf_counter()
        try:
            s_new = stepper.step(s)
        except Exception as exc:
            exc.step = step
            exc.args = (f"step {step}: {exc}",) + exc.args[1:]
            failure = exc
            break
        wall = time.perf_counter() - t0
        # exact time from the step counter, not accumulated
        s_new = SavState(m=s_new.m, r=s_new.r, h_m=s_new.h_m, t=step * config.dt)
        if is_sav:
            g_n, g_star = intermediate_energies(s, stepper.info["m_star"], grid, params)
            rel = (g_star - g_n) / max(abs(g_n), 1e-300)
            worst_mid = max(worst_mid, rel)
            if rel > DISSIPATION_TOL:
                mid_violations += 1
            g_new = modified_energy(s_new.m, s_new.r, grid, params)
            rel_post = (g_new - g_n) / max(abs(g_n), 1e-300)
            worst_post = max(worst_post, rel_post)
            if rel_post > 1e-10:
                post_increases += 1
        if is_sav:
            e_m = -0.5 * grid.cell_volume * float(np.vdot(s_new.h_m, s_new.m))
            if e_m > 0:
                max_r2_gap = max(max_r2_gap, abs(s_new.r * s_new.r - e_m) / e_m)
        if "iterations" in stepper.info:
            iterations.append(stepper.info["iterations"])
        max_dev = max(max_dev, max_norm_deviation(s_new.m))
        done = steady_state_reached(s.m, s_new.m, config.dt, config.steady_threshold)
        s = s_new
        if step % config.stride == 0 or step == n_steps or done:
            trace.append(_row(step, s, grid, params, wall))
        if done:
            steady = True
            break
    wall_total = time.perf_counter() - t_start
    final = s.m
    e = gibbs_energy(s.m, s.h_m, grid, params, s.r)
    summary = {
        "name": config.run_name,
        "scheme": config.scheme,
        "initial": config.initial,
        "dt": config.dt,
        "T": config.T,
        "steps": step if failure is None else step - 1,
        "final_time": s.t,
        "wall_time": wall_total,
        "steady_state": steady,
        "failed": failure is not None,
        "error": None if failure is None else f"{type(failure).__name__}: {failure}",
        "energy": asdict(e),
        "energy_density": e.normalized_total,
        "energy_density_Kd": e.energy_density_Kd,
        "max_norm_deviation": max_dev,
        "r2_gap": abs(s.r * s.r - e.magnetostatic) / grid.domain_volume,
    }
    if is_sav:
        summary.update(
            worst_intermediate_increase=worst_mid,
            intermediate_violations=mid_violations,
            worst_post_projection_increase=worst_post,
            post_projection_increases=post_increases,
            max_r2_gap_relative=max_r2_gap,
        )
        if post_increases:
            log.info("%s: modified energy rose after projection in %d step(s)", config.run_name, post_increases)
    if iterations:
        summary["mean_iterations"] = float(np.mean(iterations))
    result = RunResult(final=final, trace=trace, summary=summary, state=s)
    if config.write if write is None else write:
        write_outputs(result, config, m0)
    if failure is not None and raise_on_failure:
        raise failure
    return result


def write_outputs(result: RunResult, config: SimulationConfig, m0=None) -> dict:
    """Write trace CSV, OVF snapshots, CSV field fallback and a JSON summary."""
    out = ensure_dir(config.output_dir)
    base = config.run_name
    grid = config.grid
    paths = {
        "trace": out / f"{base}_trace.csv",
        "final_ovf": out / f"{base}_final.ovf",
        "final_csv": out / f"{base}_final.csv",
        "summary": out / f"{base}_summary.json",
    }
    write_trace(paths["trace"], result.trace)
    write_ovf(paths["final_ovf"], result.final, grid, title=base, time=result.summary["final_time"])
    write_field_csv(paths["final_csv"], result.final, grid)
    if m0 is not None:
        paths["initial_ovf"] = out / f"{base}_initial.ovf"
        write_ovf(paths["initial_ovf"], m0, grid, title=base, time=0.0)
    with open(paths["summary"], "w") as fh:
        json.dump({**result.summary, "config": config.to_dotted()}, fh, indent=2, default=str)
    return paths
