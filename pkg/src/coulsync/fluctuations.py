"""Gaussian fluctuation dynamics: drift/diffusion builders and the covariance
Lyapunov ODE co-integrated with the mean-field equations."""

from dataclasses import dataclass

import numpy as np

from . import _kernels, linalg
from .classical import ClassicalState, ClassicalTrajectory, _phases_of, _store_indices
from .errors import DomainError, IntegrationDivergedError
from .params import QuadratureOrdering, SystemParams

#: symplectic eigenvalue slack below 1/2 before a snapshot is flagged
PHYSICALITY_TOL = 1e-6


def build_drift(params: SystemParams, state: ClassicalState) -> np.ndarray:
    """8x8 drift matrix of the linearized dynamics at the given mean values."""
    A = np.empty((8, 8))
    _kernels.drift_kernel(state.to_array(), params.as_array(), A)
    return A


def build_diffusion(params: SystemParams) -> np.ndarray:
    """Constant diagonal noise-injection matrix.

    Mechanical momentum rows carry gamma_m (2 n_th + 1); optical rows carry
    the cavity decay rate; mechanical position rows are noiseless.
    """
    therm1 = params.gamma_m1 * (2.0 * params.n_th + 1.0)
    therm2 = params.gamma_m2 * (2.0 * params.n_th + 1.0)
    return np.diag(
        [0.0, therm1, params.kappa1, params.kappa1,
         0.0, therm2, params.kappa2, params.kappa2]
    )


def lyapunov_rhs(V: np.ndarray, A: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Covariance time derivative A V + V A^T + D."""
    V = np.asarray(V, dtype=float)
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    if V.shape != (8, 8) or A.shape != (8, 8) or D.shape != (8, 8):
        raise DomainError("lyapunov_rhs expects 8x8 matrices")
    return A @ V + V @ A.T + D


def default_initial_covariance(params: SystemParams) -> np.ndarray:
    """Thermal mechanical / vacuum optical product state.

    Diagonal n_th + 1/2 on the mechanical quadratures, 1/2 on the optical
    ones, in the canonical ordering.
    """
    if params.n_th < 0:
        raise DomainError("n_th must be non-negative")
    d = np.full(8, 0.5)
    d[list(QuadratureOrdering.MECHANICAL)] = params.n_th + 0.5
    return np.diag(d)


@dataclass(frozen=True)
class CoupledTrajectory:
    """Classical trajectory plus one covariance snapshot per grid point.

    physicality_flags marks snapshots whose minimum symplectic eigenvalue
    dipped below 1/2 - PHYSICALITY_TOL (warnings, not errors).
    """

    classical: ClassicalTrajectory
    covariances: np.ndarray  # (n, 8, 8)
    min_symplectic: np.ndarray  # (n,)
    physicality_flags: np.ndarray  # (n,) bool

    def __post_init__(self):
        if len(self.classical) != len(self.covariances):
            raise DomainError("classical and covariance grids must align")

    def __len__(self):
        return len(self.classical)

    @property
    def times(self):
        return self.classical.times


def _min_symplectic(Vs: np.ndarray) -> np.ndarray:
    omega = linalg.symplectic_form(4)
    out = np.empty(len(Vs))
    for i, V in enumerate(Vs):
        ev = np.abs(np.linalg.eigvals(1j * omega @ V))
        out[i] = ev.min()
    return out


def integrate_coupled(
    params: SystemParams,
    initial_state: ClassicalState | None = None,
    initial_V: np.ndarray | None = None,
    t_end: float = 2000.0,
    dt: float = 1e-3,
    decimate: int = 100,
) -> CoupledTrajectory:
    """RK4 co-integration of mean values and covariance from tau=0.

    The drift matrix is rebuilt from stage-consistent classical values at
    every RK4 stage; the covariance is symmetrized after each step.
    Physicality violations are recorded per snapshot, never fatal.
    """
    if dt <= 0 or t_end <= 0:
        raise DomainError("dt and t_end must be positive")
    if decimate < 1:
        raise DomainError("decimate must be >= 1")
    if initial_state is None:
        initial_state = ClassicalState()
    if initial_V is None:
        initial_V = default_initial_covariance(params)
    initial_V = np.asarray(initial_V, dtype=float)
    if initial_V.shape != (8, 8):
        raise DomainError("initial covariance must be 8x8")
    nsteps = int(round(t_end / dt))
    idx = _store_indices(nsteps, decimate)
    fail, ys, Vs = _kernels.rk4_coupled(
        initial_state.to_array(), initial_V, params.as_array(),
        build_diffusion(params), nsteps, dt, idx,
    )
    if fail >= 0:
        raise IntegrationDivergedError(fail * dt)
    times = idx.astype(float) * dt
    classical = ClassicalTrajectory(
        times=times, states=ys, phases=_phases_of(ys), decimate=decimate
    )
    nu_min = _min_symplectic(Vs)
    return CoupledTrajectory(
        classical=classical,
        covariances=Vs,
        min_symplectic=nu_min,
        physicality_flags=nu_min < 0.5 - PHYSICALITY_TOL,
    )


def integrate_frozen(
    A: np.ndarray,
    D: np.ndarray,
    V0: np.ndarray,
    t_end: float,
    dt: float,
    n_store: int = 11,
) -> tuple[np.ndarray, np.ndarray]:
    """Covariance ODE with a constant drift matrix, for oracle comparisons.

    Returns (times, covariances) at n_store points spread evenly over
    [0, t_end] (endpoints included).
    """
    if dt <= 0 or t_end <= 0:
        raise DomainError("dt and t_end must be positive")
    nsteps = int(round(t_end / dt))
    idx = np.unique(np.linspace(0, nsteps, n_store).round().astype(np.int64))
    Vs = _kernels.rk4_frozen(
        np.asarray(A, dtype=float), np.asarray(D, dtype=float),
        np.asarray(V0, dtype=float), nsteps, dt, idx,
    )
    return idx.astype(float) * dt, Vs
