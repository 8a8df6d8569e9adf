"""Compiled inner loops for the mean-field and covariance integrators.

State layout for the flat classical vector y (mirrors the quadrature ordering):
    y = [q1, p1, re_a1, im_a1, q2, p2, re_a2, im_a2]

Parameter array layout is params.PARAM_LAYOUT:
    p = [omega1, omega2, delta1, delta2, g1, g2,
         gamma_m1, gamma_m2, kappa1, kappa2, tunnel_j, chi_c, drive1, drive2, n_th]
"""

import numpy as np
from numba import njit

SQRT2 = np.sqrt(2.0)


@njit(cache=True)
def classical_rhs_kernel(y, p, dy):
    """Mean-field time derivative, written into dy."""
    omega1, omega2 = p[0], p[1]
    delta1, delta2 = p[2], p[3]
    g1, g2 = p[4], p[5]
    gm1, gm2 = p[6], p[7]
    k1, k2 = p[8], p[9]
    J, chi = p[10], p[11]
    e1, e2 = p[12], p[13]

    q1, p1, ra1, ia1 = y[0], y[1], y[2], y[3]
    q2, p2, ra2, ia2 = y[4], y[5], y[6], y[7]
    dp1 = delta1 - g1 * q1
    dp2 = delta2 - g2 * q2

    dy[0] = omega1 * p1
    dy[1] = -omega1 * q1 + g1 * (ra1 * ra1 + ia1 * ia1) - chi * q2 - gm1 * p1
    dy[2] = -k1 * ra1 + dp1 * ia1 + J * ia2 + e1
    dy[3] = -dp1 * ra1 - k1 * ia1 - J * ra2
    dy[4] = omega2 * p2
    dy[5] = -omega2 * q2 + g2 * (ra2 * ra2 + ia2 * ia2) - chi * q1 - gm2 * p2
    dy[6] = -k2 * ra2 + dp2 * ia2 + J * ia1 + e2
    dy[7] = -dp2 * ra2 - k2 * ia2 - J * ra1


@njit(cache=True)
def drift_kernel(y, p, A):
    """Drift matrix of the linearized fluctuation dynamics, written into A.

    The sparsity pattern is exact: entries not assigned below are zero.
    """
    omega1, omega2 = p[0], p[1]
    delta1, delta2 = p[2], p[3]
    g1, g2 = p[4], p[5]
    gm1, gm2 = p[6], p[7]
    k1, k2 = p[8], p[9]
    J, chi = p[10], p[11]

    dpr1 = delta1 - g1 * y[0]
    dpr2 = delta2 - g2 * y[4]
    reG1, imG1 = g1 * y[2], g1 * y[3]
    reG2, imG2 = g2 * y[6], g2 * y[7]

    A[:, :] = 0.0
    A[0, 1] = omega1
    A[1, 0] = -omega1
    A[1, 1] = -gm1
    A[1, 2] = SQRT2 * reG1
    A[1, 3] = SQRT2 * imG1
    A[1, 4] = -chi
    A[2, 0] = -SQRT2 * imG1
    A[2, 2] = -k1
    A[2, 3] = dpr1
    A[2, 7] = J
    A[3, 0] = SQRT2 * reG1
    A[3, 2] = -dpr1
    A[3, 3] = -k1
    A[3, 6] = -J
    A[4, 5] = omega2
    A[5, 0] = -chi
    A[5, 4] = -omega2
    A[5, 5] = -gm2
    A[5, 6] = SQRT2 * reG2
    A[5, 7] = SQRT2 * imG2
    A[6, 3] = J
    A[6, 4] = -SQRT2 * imG2
    A[6, 6] = -k2
    A[6, 7] = dpr2
    A[7, 2] = -J
    A[7, 4] = SQRT2 * reG2
    A[7, 6] = -dpr2
    A[7, 7] = -k2


@njit(cache=True)
def rk4_classical(y0, p, nsteps, dt, store_idx):
    """Fixed-step RK4 of the mean-field equations.

    Stores the state at the step indices listed in store_idx (must start at 0,
    be strictly increasing, and end at nsteps). Returns (fail_step, ys);
    fail_step is -1 on success, otherwise the step index at which a
    non-finite state was detected.
    """
    nstore = store_idx.shape[0]
    ys = np.empty((nstore, 8))
    y = y0.copy()
    k1 = np.empty(8)
    k2 = np.empty(8)
    k3 = np.empty(8)
    k4 = np.empty(8)

    si = 0
    if store_idx[0] == 0:
        ys[0] = y
        si = 1
    for step in range(nsteps):
        classical_rhs_kernel(y, p, k1)
        classical_rhs_kernel(y + 0.5 * dt * k1, p, k2)
        classical_rhs_kernel(y + 0.5 * dt * k2, p, k3)
        classical_rhs_kernel(y + dt * k3, p, k4)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if si < nstore and store_idx[si] == step + 1:
            for i in range(8):
                if not np.isfinite(y[i]):
                    return step + 1, ys
            ys[si] = y
            si += 1
    return -1, ys


@njit(cache=True)
def _cov_rhs(V, A, D, out):
    """out = A V + V A^T + D, exploiting symmetry of the result for symmetric V."""
    AV = A @ V
    for i in range(8):
        for j in range(8):
            out[i, j] = AV[i, j] + AV[j, i] + D[i, j]


@njit(cache=True)
def rk4_coupled(y0, V0, p, D, nsteps, dt, store_idx):
    """Monolithic RK4 of the 8 mean values plus the 8x8 covariance.

    The drift matrix is rebuilt from stage-consistent classical values at
    every RK4 stage; the covariance is symmetrized after each full step.
    Returns (fail_step, ys, Vs) with fail_step as in rk4_classical.
    """
    nstore = store_idx.shape[0]
    ys = np.empty((nstore, 8))
    Vs = np.empty((nstore, 8, 8))
    y = y0.copy()
    V = 0.5 * (V0 + V0.T)
    A = np.empty((8, 8))
    ky = np.empty((4, 8))
    kV = np.empty((4, 8, 8))
    dy = np.empty(8)
    dV = np.empty((8, 8))

    si = 0
    if store_idx[0] == 0:
        ys[0] = y
        Vs[0] = V
        si = 1
    for step in range(nsteps):
        yt = y
        Vt = V
        for s in range(4):
            classical_rhs_kernel(yt, p, dy)
            drift_kernel(yt, p, A)
            _cov_rhs(Vt, A, D, dV)
            ky[s] = dy
            kV[s] = dV
            if s == 0 or s == 1:
                yt = y + 0.5 * dt * dy
                Vt = V + 0.5 * dt * dV
            elif s == 2:
                yt = y + dt * dy
                Vt = V + dt * dV
        y = y + (dt / 6.0) * (ky[0] + 2.0 * ky[1] + 2.0 * ky[2] + ky[3])
        V = V + (dt / 6.0) * (kV[0] + 2.0 * kV[1] + 2.0 * kV[2] + kV[3])
        V = 0.5 * (V + V.T)
        if si < nstore and store_idx[si] == step + 1:
            ok = True
            for i in range(8):
                if not np.isfinite(y[i]):
                    ok = False
                for j in range(8):
                    if not np.isfinite(V[i, j]):
                        ok = False
            if not ok:
                return step + 1, ys, Vs
            ys[si] = y
            Vs[si] = V
            si += 1
    return -1, ys, Vs


@njit(cache=True)
def rk4_frozen(A, D, V0, nsteps, dt, store_idx):
    """RK4 of Vdot = A V + V A^T + D with a constant drift matrix."""
    nstore = store_idx.shape[0]
    Vs = np.empty((nstore, 8, 8))
    V = 0.5 * (V0 + V0.T)
    kV = np.empty((4, 8, 8))
    dV = np.empty((8, 8))

    si = 0
    if store_idx[0] == 0:
        Vs[0] = V
        si = 1
    for step in range(nsteps):
        Vt = V
        for s in range(4):
            _cov_rhs(Vt, A, D, dV)
            kV[s] = dV
            if s == 0 or s == 1:
                Vt = V + 0.5 * dt * dV
            elif s == 2:
                Vt = V + dt * dV
        V = V + (dt / 6.0) * (kV[0] + 2.0 * kV[1] + 2.0 * kV[2] + kV[3])
        V = 0.5 * (V + V.T)
        if si < nstore and store_idx[si] == step + 1:
            Vs[si] = V
            si += 1
    return Vs
