"""Coulomb-coupled optomechanical synchronization simulator.

Two driven, tunnel-coupled cavities, each hosting a mechanical resonator;
the resonators interact through an electrostatic position-position coupling.
The package co-integrates the nonlinear mean-field equations with the
Gaussian-fluctuation covariance equation and evaluates complete, offset-phase
and phase quantum-synchronization measures.
"""

__version__ = "0.1.0"

from .params import SystemParams, CoulombGeometry, QuadratureOrdering
from .classical import ClassicalState, ClassicalTrajectory, integrate_classical
from .fluctuations import (
    build_drift,
    build_diffusion,
    default_initial_covariance,
    integrate_coupled,
    CoupledTrajectory,
)
from .measures import sync_complete, sync_phi, sync_phase, sync_series, SyncSeries

__all__ = [
    "SystemParams",
    "CoulombGeometry",
    "QuadratureOrdering",
    "ClassicalState",
    "ClassicalTrajectory",
    "integrate_classical",
    "build_drift",
    "build_diffusion",
    "default_initial_covariance",
    "integrate_coupled",
    "CoupledTrajectory",
    "sync_complete",
    "sync_phi",
    "sync_phase",
    "sync_series",
    "SyncSeries",
    "__version__",
]
