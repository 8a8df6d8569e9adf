"""Dense small-matrix kernels: matrix exponential, algebraic Lyapunov solver,
eigenvalue utilities, and symplectic-eigenvalue physicality checks.

Everything here targets n <= 16 (n = 8 in practice), so the O(n^6)
Kronecker vectorization of the Lyapunov equation is perfectly adequate.
"""

import numpy as np

from .errors import DegenerateSystemError, DomainError, UnstableDriftError


def matrix_exp(A: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(A*t) by scaling-and-squaring with a Taylor core.

    The scaled matrix norm is brought below 1/2, the series is summed to
    machine-precision term decay, and the result is squared back up.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError("matrix_exp requires a square matrix")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix_exp requires finite entries")
    M = A * t
    norm = np.linalg.norm(M, 1)
    s = max(0, int(np.ceil(np.log2(norm / 0.5)))) if norm > 0.5 else 0
    M = M / (2**s)
    n = M.shape[0]
    E = np.eye(n)
    term = np.eye(n)
    for k in range(1, 40):
        term = term @ M / k
        E = E + term
        if np.linalg.norm(term, 1) < 1e-18 * max(1.0, np.linalg.norm(E, 1)):
            break
    for _ in range(s):
        E = E @ E
    return E


def eigenvalues(A: np.ndarray) -> np.ndarray:
    """All eigenvalues of a real square matrix, as a complex array."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError("eigenvalues requires a square matrix")
    if not np.all(np.isfinite(A)):
        raise DomainError("eigenvalues requires finite entries")
    try:
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare QR failure
        raise DegenerateSystemError(f"eigenvalue iteration failed: {exc}") from exc


def is_hurwitz(A: np.ndarray) -> bool:
    """True when every eigenvalue has a strictly negative real part."""
    return bool(np.max(eigenvalues(A).real) < 0)


def solve_algebraic_lyapunov(A: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Unique symmetric solution V of A V + V A^T + D = 0 for Hurwitz A.

    Solves the n^2 x n^2 linear system (I (x) A + A (x) I) vec(V) = -vec(D)
    and symmetrizes. The residual is checked on every call.
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or D.shape != (n, n):
        raise DomainError("A and D must be square matrices of equal size")
    if not is_hurwitz(A):
        raise UnstableDriftError("drift matrix is not Hurwitz-stable")
    K = np.kron(np.eye(n), A) + np.kron(A, np.eye(n))
    try:
        vec_v = np.linalg.solve(K, -D.reshape(n * n))
    except np.linalg.LinAlgError as exc:
        raise DegenerateSystemError(f"Lyapunov system is singular: {exc}") from exc
    # vec here is row-major stacking; K is built to match (I(x)A acts on rows).
    V = vec_v.reshape(n, n)
    V = 0.5 * (V + V.T)
    resid = np.linalg.norm(A @ V + V @ A.T + D)
    scale = np.linalg.norm(A) * np.linalg.norm(V) + np.linalg.norm(D)
    if resid > 1e-10 * max(scale, 1.0):
        raise DegenerateSystemError(
            f"Lyapunov residual {resid:.3e} exceeds tolerance for scale {scale:.3e}"
        )
    return V


def symplectic_form(n_modes: int = 4) -> np.ndarray:
    """Block-diagonal form with [[0, 1], [-1, 0]] on each conjugate pair."""
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for m in range(n_modes):
        omega[2 * m, 2 * m + 1] = 1.0
        omega[2 * m + 1, 2 * m] = -1.0
    return omega


def symplectic_eigenvalues(V: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a symmetric positive-definite covariance matrix.

    Returns the n_modes doubly-degenerate values |eig(i Omega V)|, collapsed
    and sorted ascending. Physical Gaussian states have all values >= 1/2.
    """
    V = np.asarray(V, dtype=float)
    n = V.shape[0]
    if n % 2 or V.shape != (n, n):
        raise DomainError("covariance matrix must be square with even size")
    if np.max(np.abs(V - V.T)) > 1e-9 * max(1.0, np.max(np.abs(V))):
        raise DomainError("covariance matrix must be symmetric")
    if np.min(np.linalg.eigvalsh(0.5 * (V + V.T))) <= 0:
        raise DomainError("covariance matrix must be positive definite")
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n // 2) @ V))
    ev.sort()
    return ev[::2]
