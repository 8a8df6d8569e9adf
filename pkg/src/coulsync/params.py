"""Parameter set, unit convention, and canonical quadrature ordering.

All rates and drives are expressed in units of the first mechanical frequency,
which is fixed to 1. The simulation time variable is tau = omega1 * t.
"""

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import DomainError


class QuadratureOrdering:
    """Single source of truth for the 8-component fluctuation vector.

    Index map: 0 -> dq1, 1 -> dp1, 2 -> dx1, 3 -> dy1,
               4 -> dq2, 5 -> dp2, 6 -> dx2, 7 -> dy2.

    Every matrix builder and every synchronization formula indexes through
    this ordering.
    """

    DQ1, DP1, DX1, DY1, DQ2, DP2, DX2, DY2 = range(8)
    LABELS = ("dq1", "dp1", "dx1", "dy1", "dq2", "dp2", "dx2", "dy2")
    MECHANICAL = (0, 1, 4, 5)
    OPTICAL = (2, 3, 6, 7)
    SIZE = 8


# Layout of SystemParams.as_array(), consumed by the compiled kernels.
PARAM_LAYOUT = (
    "omega1", "omega2", "delta1", "delta2", "g1", "g2",
    "gamma_m1", "gamma_m2", "kappa1", "kappa2",
    "tunnel_j", "chi_c", "drive1", "drive2", "n_th",
)


@dataclass(frozen=True)
class SystemParams:
    """Physical rates and drives, nondimensionalized by omega1.

    Defaults reproduce the baseline parameter set used throughout the
    driven-limit-cycle regime (blue-detuned strong driving, slightly
    detuned second resonator), with the Coulomb coupling off.
    """

    omega1: float = 1.0
    omega2: float = 1.005
    delta1: float = -1.0
    delta2: float = -1.005
    g1: float = 1e-3
    g2: float = 1e-3
    gamma_m1: float = 1e-3
    gamma_m2: float = 1e-3
    kappa1: float = 0.15
    kappa2: float = 0.15
    tunnel_j: float = 0.02
    chi_c: float = 0.0
    drive1: float = 150.0
    drive2: float = 150.0
    n_th: float = 0.0

    def __post_init__(self):
        if self.omega1 != 1.0:
            raise DomainError("omega1 must be exactly 1.0 (unit convention)")
        for name in ("omega2", "gamma_m1", "gamma_m2", "kappa1", "kappa2", "n_th"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise DomainError(f"{f.name} must be finite")

    def as_array(self) -> np.ndarray:
        """Flat float64 view in PARAM_LAYOUT order, for the compiled kernels."""
        return np.array([getattr(self, k) for k in PARAM_LAYOUT], dtype=np.float64)


@dataclass(frozen=True)
class CoulombGeometry:
    """Gate capacitances, bias voltages and separation of the charged resonators.

    Any consistent unit system works; only the resulting coupling constant
    matters, and the caller nondimensionalizes it by omega1.
    """

    c1: float
    v1: float
    c2: float
    v2: float
    r0: float
    eps0: float = 8.8541878128e-12

    def __post_init__(self):
        if self.r0 <= 0:
            raise DomainError("r0 must be positive")
        if self.eps0 <= 0:
            raise DomainError("eps0 must be positive")


def coulomb_coupling(geom: CoulombGeometry) -> float:
    """Position-position coupling constant C1 V1 C2 V2 / (2 pi eps0 r0^3)."""
    return (geom.c1 * geom.v1 * geom.c2 * geom.v2) / (
        2.0 * math.pi * geom.eps0 * geom.r0**3
    )


def effective_detuning(params: SystemParams, q1s: float, q2s: float):
    """Cavity detunings shifted by the instantaneous mechanical displacement."""
    return (
        params.delta1 - params.g1 * q1s,
        params.delta2 - params.g2 * q2s,
    )


def effective_coupling(params: SystemParams, alpha1: complex, alpha2: complex):
    """Optomechanical couplings amplified by the classical cavity amplitudes."""
    return params.g1 * alpha1, params.g2 * alpha2
