"""Quantum synchronization figures of merit evaluated on covariance snapshots.

All three measures depend only on the mechanical rows/columns of the
covariance matrix (indices 0, 1, 4, 5 in the canonical ordering).
"""

import math
from dataclasses import dataclass

import numpy as np

from .classical import unwrapped_phase_difference
from .errors import DomainError, NonphysicalCovarianceError
from .fluctuations import CoupledTrajectory

#: denominators below this map to a flagged +inf instead of an exception
UNDERFLOW = 1e-12

PHI_MODES = ("classical-diff", "fixed", "per-resonator")


def _invert(denominator: float) -> float:
    if denominator < 0.0:
        raise NonphysicalCovarianceError(
            f"synchronization denominator {denominator:.3e} is negative"
        )
    if denominator < UNDERFLOW:
        return math.inf
    return 1.0 / denominator


def sync_phi(V: np.ndarray, phi: float) -> float:
    """Offset-phase synchronization: complete measure with resonator 2
    rotated forward by phi in its mechanical phase space."""
    s, c = math.sin(phi), math.cos(phi)
    den = 0.5 * (
        V[0, 0] + V[1, 1] + V[4, 4] + V[5, 5]
        + 2.0 * V[1, 4] * s
        - 2.0 * V[0, 5] * s
        - 2.0 * V[1, 5] * c
        - 2.0 * V[0, 4] * c
    )
    return _invert(den)


def sync_complete(V: np.ndarray) -> float:
    """Complete synchronization: inverse mean square of the relative
    mechanical coordinates, bounded above by 1 for physical states."""
    return sync_phi(V, 0.0)


def sync_phase(V: np.ndarray, phi1: float, phi2: float) -> float:
    """Phase synchronization: inverse variance (scaled) of the relative
    momentum after rotating each resonator by its classical phase."""
    s1, c1 = math.sin(phi1), math.cos(phi1)
    s2, c2 = math.sin(phi2), math.cos(phi2)
    den = (
        V[0, 0] * s1 * s1
        + V[1, 1] * c1 * c1
        + V[4, 4] * s2 * s2
        + V[5, 5] * c2 * c2
        - 2.0 * V[0, 1] * c1 * s1
        - 2.0 * V[0, 4] * s1 * s2
        + 2.0 * V[0, 5] * s1 * c2
        + 2.0 * V[1, 4] * c1 * s2
        - 2.0 * V[1, 5] * c1 * c2
        - 2.0 * V[4, 5] * c2 * s2
    )
    return _invert(den)


@dataclass(frozen=True)
class SyncSample:
    tau: float
    s_c: float
    s_phi: float
    s_p: float
    phi1: float
    phi2: float


@dataclass(frozen=True)
class SteadyAggregates:
    """Time-mean, min and max of each measure over the trailing window."""

    mean_s_c: float
    min_s_c: float
    max_s_c: float
    mean_s_phi: float
    min_s_phi: float
    max_s_phi: float
    mean_s_p: float
    min_s_p: float
    max_s_p: float


@dataclass(frozen=True)
class SyncSeries:
    """Per-snapshot synchronization measures aligned with a coupled trajectory."""

    times: np.ndarray
    s_c: np.ndarray
    s_phi: np.ndarray
    s_p: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    dphi_unwrapped: np.ndarray
    steady: SteadyAggregates

    def __len__(self):
        return len(self.times)

    def sample(self, i: int) -> SyncSample:
        return SyncSample(
            tau=self.times[i], s_c=self.s_c[i], s_phi=self.s_phi[i],
            s_p=self.s_p[i], phi1=self.phi1[i], phi2=self.phi2[i],
        )


def sync_series(
    traj: CoupledTrajectory,
    phi_mode: str = "classical-diff",
    phi_fixed: float = 0.0,
    steady_fraction: float = 0.5,
) -> SyncSeries:
    """Evaluate all three measures along a coupled trajectory.

    The phase measure always uses the instantaneous classical phases. The
    offset phi of the middle measure follows phi_mode: the classical phase
    difference phi1 - phi2 (default), a fixed value, or per-resonator
    classical rotation (equivalent to the phase difference by joint-rotation
    invariance, computed via the rotated covariance for transparency).
    """
    if phi_mode not in PHI_MODES:
        raise DomainError(f"phi_mode must be one of {PHI_MODES}")
    if not 0 < steady_fraction <= 1:
        raise DomainError("steady_fraction must lie in (0, 1]")
    n = len(traj)
    if n == 0:
        raise DomainError("empty trajectory")
    phases = traj.classical.phases
    s_c = np.empty(n)
    s_phi = np.empty(n)
    s_p = np.empty(n)
    for i in range(n):
        V = traj.covariances[i]
        ph1, ph2 = phases[i]
        s_c[i] = sync_complete(V)
        s_p[i] = sync_phase(V, ph1, ph2)
        if phi_mode == "fixed":
            s_phi[i] = sync_phi(V, phi_fixed)
        elif phi_mode == "classical-diff":
            s_phi[i] = sync_phi(V, ph1 - ph2)
        else:
            s_phi[i] = sync_phi(_rotate_mechanical(V, ph1, ph2), 0.0)
    dphi = unwrapped_phase_difference(traj.classical)
    n0 = int(n * (1 - steady_fraction))
    window = slice(min(n0, n - 1), None)
    steady = SteadyAggregates(
        mean_s_c=float(np.mean(s_c[window])),
        min_s_c=float(np.min(s_c[window])),
        max_s_c=float(np.max(s_c[window])),
        mean_s_phi=float(np.mean(s_phi[window])),
        min_s_phi=float(np.min(s_phi[window])),
        max_s_phi=float(np.max(s_phi[window])),
        mean_s_p=float(np.mean(s_p[window])),
        min_s_p=float(np.min(s_p[window])),
        max_s_p=float(np.max(s_p[window])),
    )
    return SyncSeries(
        times=traj.times, s_c=s_c, s_phi=s_phi, s_p=s_p,
        phi1=phases[:, 0], phi2=phases[:, 1], dphi_unwrapped=dphi, steady=steady,
    )


def mechanical_rotation(phi1: float, phi2: float) -> np.ndarray:
    """8x8 block rotation acting on each mechanical (q, p) pair.

    Maps q -> q cos(phi) + p sin(phi), p -> p cos(phi) - q sin(phi); the
    optical quadratures are untouched. The map is symplectic.
    """
    R = np.eye(8)
    for phi, o in ((phi1, 0), (phi2, 4)):
        c, s = math.cos(phi), math.sin(phi)
        R[o, o] = c
        R[o, o + 1] = s
        R[o + 1, o] = -s
        R[o + 1, o + 1] = c
    return R


def _rotate_mechanical(V: np.ndarray, phi1: float, phi2: float) -> np.ndarray:
    R = mechanical_rotation(phi1, phi2)
    return R @ V @ R.T
