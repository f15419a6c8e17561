"""scikit-learn style front end.

``GroundStateSolver`` treats a magnetization as the input sample matrix: ``X``
has one row per cell (x fastest, then y, then z) and three columns
``(mx, my, mz)``.  ``fit`` relaxes ``X`` to a steady state and ``transform``
returns relaxed states.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .config import SCHEMES, SimulationConfig
from .demag import DemagKernel
from .runner import run


class GroundStateSolver(TransformerMixin, BaseEstimator):
    """Relax magnetizations by energy-minimizing gradient flow.

    Parameters
    ----------
    shape : tuple of int
        Cell counts ``(nx, ny, nz)``.
    extent : tuple of float
        Physical size of the film in meters.
    scheme : str
        One of ``sav1``, ``sav2``, ``fep``, ``bep`` or an LLG integrator.
    dt, T : float
        Physical step and end time in seconds.
    steady_threshold : float
        Early stop when ``max |dm/dt|`` drops below it; ``<= 0`` disables.
    C_ex, K_u, Ms, alpha, gamma : float
        Material constants.
    demag : bool
        Include the stray field.

    Attributes
    ----------
    m_ : ndarray of shape (n_cells, 3)
        Relaxed magnetization of the last ``fit``.
    energy_ : float
        Final energy density in units of ``K_d``.
    n_steps_ : int
    trace_ : list of EnergyTraceRow
    summary_ : dict
    """

    def __init__(self, shape=(100, 50, 1), extent=(2e-6, 1e-6, 2e-8), scheme="sav2", dt=1e-13, T=4e-10,
                 steady_threshold=0.0, C_ex=1.3e-11, K_u=5.0e2, Ms=8.0e5, alpha=0.1, gamma=2.211e5,
                 demag=True, stride=100):
        self.shape = shape
        self.extent = extent
        self.scheme = scheme
        self.dt = dt
        self.T = T
        self.steady_threshold = steady_threshold
        self.C_ex = C_ex
        self.K_u = K_u
        self.Ms = Ms
        self.alpha = alpha
        self.gamma = gamma
        self.demag = demag
        self.stride = stride

    def _config(self) -> SimulationConfig:
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        nx, ny, nz = self.shape
        lx, ly, lz = self.extent
        return SimulationConfig(
            nx=nx, ny=ny, nz=nz, lx=lx, ly=ly, lz=lz, C_ex=self.C_ex, K_u=self.K_u, M_s=self.Ms,
            alpha=self.alpha, gamma=self.gamma, scheme=self.scheme, dt=self.dt, T=self.T,
            steady_threshold=self.steady_threshold, demag=self.demag, stride=self.stride, write=False,
        )

    def _validate(self, X, cfg) -> np.ndarray:
        X = check_array(X, dtype=np.float64, ensure_min_features=3)
        grid = cfg.grid
        if X.shape != (grid.n_cells, 3):
            raise ValueError(f"X must have shape ({grid.n_cells}, 3) for a {self.shape} mesh, got {X.shape}")
        norms = np.linalg.norm(X, axis=1)
        if np.any(norms < 1e-12):
            raise ValueError("X contains zero-length magnetization vectors")
        return (X / norms[:, None]).T.reshape(grid.vector_shape)

    def _relax(self, X):
        cfg = self._config()
        m0 = self._validate(X, cfg)
        kernel = getattr(self, "_kernel", None)
        if kernel is None or kernel.grid != cfg.grid or kernel.enabled != cfg.demag:
            kernel = DemagKernel(cfg.grid, enabled=cfg.demag)
            self._kernel = kernel
        return run(cfg, m0=m0, kernel=kernel, write=False)

    def fit(self, X, y=None):
        res = self._relax(X)
        self.m_ = res.final.reshape(3, -1).T.copy()
        self.energy_ = res.summary["energy_density_Kd"]
        self.n_steps_ = res.summary["steps"]
        self.trace_ = res.trace
        self.summary_ = res.summary
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        """Relax ``X`` with the fitted parameters and return the final state."""
        check_is_fitted(self, "m_")
        return self._relax(X).final.reshape(3, -1).T.copy()

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y).m_.copy()

    def score(self, X, y=None) -> float:
        """Negative relaxed energy density (higher is better), in units of ``K_d``."""
        res = self._relax(X)
        e = res.summary["energy_density_Kd"]
        return -e if math.isfinite(e) else -math.inf
