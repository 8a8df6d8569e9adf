"""Mean-field dynamics: limit-cycle integration, phases, locking diagnostics."""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, InsufficientDataError, IntegrationDivergedError
from .params import SystemParams


@dataclass(frozen=True)
class ClassicalState:
    """Mean values of the two mechanical resonators and cavity fields."""

    q1s: float = 0.0
    p1s: float = 0.0
    alpha1: complex = 0j
    q2s: float = 0.0
    p2s: float = 0.0
    alpha2: complex = 0j

    def to_array(self) -> np.ndarray:
        """Flat vector [q1, p1, Re a1, Im a1, q2, p2, Re a2, Im a2]."""
        return np.array(
            [
                self.q1s, self.p1s, self.alpha1.real, self.alpha1.imag,
                self.q2s, self.p2s, self.alpha2.real, self.alpha2.imag,
            ]
        )

    @staticmethod
    def from_array(y) -> "ClassicalState":
        return ClassicalState(
            q1s=y[0], p1s=y[1], alpha1=complex(y[2], y[3]),
            q2s=y[4], p2s=y[5], alpha2=complex(y[6], y[7]),
        )


@dataclass(frozen=True)
class ClassicalTrajectory:
    """Decimated mean-field trajectory on a strictly increasing time grid.

    states has shape (n, 8) in ClassicalState.to_array layout; phases has
    shape (n, 2) with the two mechanical phase angles.
    """

    times: np.ndarray
    states: np.ndarray
    phases: np.ndarray
    decimate: int

    def __post_init__(self):
        if not np.all(np.diff(self.times) > 0):
            raise DomainError("trajectory times must be strictly increasing")
        if not (len(self.times) == len(self.states) == len(self.phases)):
            raise DomainError("trajectory arrays must have equal length")

    def __len__(self):
        return len(self.times)

    def state_at(self, i: int) -> ClassicalState:
        return ClassicalState.from_array(self.states[i])

    @property
    def q1s(self):
        return self.states[:, 0]

    @property
    def p1s(self):
        return self.states[:, 1]

    @property
    def alpha1(self):
        return self.states[:, 2] + 1j * self.states[:, 3]

    @property
    def q2s(self):
        return self.states[:, 4]

    @property
    def p2s(self):
        return self.states[:, 5]

    @property
    def alpha2(self):
        return self.states[:, 6] + 1j * self.states[:, 7]


def classical_rhs(state: ClassicalState, params: SystemParams) -> ClassicalState:
    """Time derivative of the mean values (pure function)."""
    y = state.to_array()
    dy = np.empty(8)
    _kernels.classical_rhs_kernel(y, params.as_array(), dy)
    return ClassicalState.from_array(dy)


def _store_indices(nsteps: int, decimate: int) -> np.ndarray:
    idx = np.arange(0, nsteps + 1, decimate, dtype=np.int64)
    if idx[-1] != nsteps:
        idx = np.append(idx, np.int64(nsteps))
    return idx


def mechanical_phase(state: ClassicalState):
    """Phase-space angles atan2(p, q) of the two resonators, in (-pi, pi]."""
    return (
        math.atan2(state.p1s, state.q1s),
        math.atan2(state.p2s, state.q2s),
    )


def _phases_of(states: np.ndarray) -> np.ndarray:
    return np.stack(
        [np.arctan2(states[:, 1], states[:, 0]), np.arctan2(states[:, 5], states[:, 4])],
        axis=1,
    )


def integrate_classical(
    params: SystemParams,
    initial: ClassicalState | None = None,
    t_end: float = 2000.0,
    dt: float = 1e-3,
    decimate: int = 100,
) -> ClassicalTrajectory:
    """Fixed-step RK4 integration of the mean-field equations from tau=0.

    Every `decimate`-th step is stored; the final state is always stored.
    Raises IntegrationDivergedError if the state becomes non-finite.
    """
    if dt <= 0 or t_end <= 0:
        raise DomainError("dt and t_end must be positive")
    if decimate < 1:
        raise DomainError("decimate must be >= 1")
    if initial is None:
        initial = ClassicalState()
    nsteps = int(round(t_end / dt))
    idx = _store_indices(nsteps, decimate)
    fail, ys = _kernels.rk4_classical(initial.to_array(), params.as_array(), nsteps, dt, idx)
    if fail >= 0:
        raise IntegrationDivergedError(fail * dt)
    times = idx.astype(float) * dt
    return ClassicalTrajectory(times=times, states=ys, phases=_phases_of(ys), decimate=decimate)


def unwrapped_phase_difference(traj: ClassicalTrajectory) -> np.ndarray:
    """Continuously accumulated phi1 - phi2 along the trajectory.

    The principal-value increment is added per stored sample, so the result
    is free of 2*pi jumps as long as the sampling resolves the oscillation.
    """
    d = traj.phases[:, 0] - traj.phases[:, 1]
    wrapped = np.angle(np.exp(1j * d))
    out = np.empty_like(wrapped)
    out[0] = wrapped[0]
    inc = np.angle(np.exp(1j * np.diff(wrapped)))
    out[1:] = wrapped[0] + np.cumsum(inc)
    return out


@dataclass(frozen=True)
class PhaseLockResult:
    mean_dphi: float
    circ_std_dphi: float
    locked: bool
    drift: float  # total unwrapped |dphi| excursion over the window


def phase_locking_metric(
    traj: ClassicalTrajectory,
    window_fraction: float = 0.5,
    lock_threshold: float = 0.1,
) -> PhaseLockResult:
    """Circular statistics of the phase difference over the trailing window.

    locked is true when the circular standard deviation of phi1 - phi2 stays
    below lock_threshold (radians).
    """
    if not 0 < window_fraction <= 1:
        raise DomainError("window_fraction must lie in (0, 1]")
    if len(traj) == 0:
        raise InsufficientDataError("empty trajectory")
    n0 = int(len(traj) * (1 - window_fraction))
    dphi = unwrapped_phase_difference(traj)[n0:]
    if len(dphi) < 10:
        raise InsufficientDataError("phase-locking window has fewer than 10 samples")
    z = np.exp(1j * dphi)
    r = abs(np.mean(z))
    circ_std = math.sqrt(max(0.0, -2.0 * math.log(r))) if r > 0 else math.inf
    return PhaseLockResult(
        mean_dphi=float(np.angle(np.mean(z))),
        circ_std_dphi=circ_std,
        locked=circ_std < lock_threshold,
        drift=float(np.max(dphi) - np.min(dphi)),
    )


@dataclass(frozen=True)
class LimitCycleSummary:
    amplitude: tuple  # max phase-space radius per resonator
    period: tuple  # zero-crossing period estimate per resonator
    closed_orbit: tuple  # per-cycle amplitude variation < tolerance


def _cycle_stats(q: np.ndarray, p: np.ndarray, times: np.ndarray, tol: float):
    radius = np.hypot(q, p)
    amplitude = float(np.max(radius))
    # upward zero crossings of q, refined by linear interpolation
    sgn = q >= 0
    up = np.nonzero(~sgn[:-1] & sgn[1:])[0]
    if len(up) < 4:
        raise InsufficientDataError("fewer than 3 full cycles in window")
    tc = times[up] + (times[up + 1] - times[up]) * (-q[up]) / (q[up + 1] - q[up])
    period = float(np.mean(np.diff(tc)))
    peaks = np.array(
        [np.max(radius[up[i]: up[i + 1] + 1]) for i in range(len(up) - 1)]
    )
    variation = (np.max(peaks) - np.min(peaks)) / np.mean(peaks)
    return amplitude, period, bool(variation < tol)


def limit_cycle_summary(
    traj: ClassicalTrajectory,
    window_fraction: float = 0.5,
    closed_tolerance: float = 0.02,
) -> LimitCycleSummary:
    """Amplitude, period, and closed-orbit flags over the trailing window."""
    if not 0 < window_fraction <= 1:
        raise DomainError("window_fraction must lie in (0, 1]")
    if len(traj) == 0:
        raise InsufficientDataError("empty trajectory")
    n0 = int(len(traj) * (1 - window_fraction))
    t = traj.times[n0:]
    a1, t1, c1 = _cycle_stats(traj.q1s[n0:], traj.p1s[n0:], t, closed_tolerance)
    a2, t2, c2 = _cycle_stats(traj.q2s[n0:], traj.p2s[n0:], t, closed_tolerance)
    return LimitCycleSummary(
        amplitude=(a1, a2), period=(t1, t2), closed_orbit=(c1, c2)
    )
