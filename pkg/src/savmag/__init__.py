"""Norm-preserving scalar auxiliary variable schemes for micromagnetic ground states."""

from .baselines import (
    IterativeSolveConfig,
    bep_step,
    fep_step,
    llg_backward_euler_step,
    llg_forward_euler_step,
    llg_midpoint_step,
)
from .config import SimulationConfig, load_config
from .demag import DemagKernel, apply_demag, build_kernel, magnetostatic_energy
from .energy import (
    EnergyBreakdown,
    MaterialParams,
    aux_var_from_state,
    effective_field,
    gibbs_energy,
    modified_energy,
)
from .estimator import GroundStateSolver
from .mesh import Grid, inner_product_h, laplacian, laplacian_vec, norm_h, project_unit
from .presets import preset_initial
from .runner import EnergyTraceRow, RunResult, run, steady_state_reached
from .sav import (
    SavState,
    SpectralOperatorA,
    build_operator,
    initial_state,
    sav1_step,
    sav2_step,
    sav_substep,
    spectral_solve,
)

__version__ = "0.1.0"
