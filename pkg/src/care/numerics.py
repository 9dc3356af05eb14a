"""Dense symmetric-matrix kernel.

Eigendecomposition by cyclic Jacobi rotations, the matrix norms used for
loss reporting, and the rank-one corrected inverse that turns a singular
zero-row-sum covariance into its Moore-Penrose inverse.
"""

from typing import NamedTuple

import numpy as np

from .exceptions import (
    ConvergenceFailure,
    InvalidMatrix,
    InvalidParameter,
    RankDeficient,
)

__all__ = [
    "EigenDecomposition",
    "as_sym_matrix",
    "eigen_sym",
    "norm",
    "rank1_corrected_inverse",
    "rowsum_tolerance",
]

_JACOBI_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 100
_NULL_EIG_TOL = 1e-8


class EigenDecomposition(NamedTuple):
    """Eigenvalues sorted descending with matching orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.T


def as_sym_matrix(a, name="matrix", atol=None, min_dim=2):
    """Validate a square finite matrix and return an exactly symmetric copy.

    Parameters
    ----------
    a : array-like of shape (p, p)
    name : str
        Used in error messages.
    atol : float, optional
        Largest tolerated asymmetry ``|a_ij - a_ji|``. Defaults to
        ``1e-8 * max(1, max|a|)``.
    min_dim : int
        Smallest accepted ``p``.

    Returns
    -------
    ndarray of shape (p, p)
        ``(a + a.T) / 2``, so that ``out[i, j] == out[j, i]`` bit for bit.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMatrix(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] < min_dim:
        raise InvalidMatrix(f"{name} must have dimension >= {min_dim}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix(f"{name} contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    if atol is None:
        atol = 1e-8 * scale
    if np.max(np.abs(a - a.T)) > atol:
        raise InvalidMatrix(f"{name} is not symmetric")
    return 0.5 * (a + a.T)


def _round_robin(p):
    # Circle-method schedule: p - 1 rounds (p even) of disjoint pairs that
    # together cover every index pair exactly once.
    m = p + (p % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[k], players[m - 1 - k]) for k in range(m // 2)]
        pairs = [(min(i, j), max(i, j)) for i, j in pairs if i < p and j < p]
        rounds.append((np.array([i for i, _ in pairs]), np.array([j for _, j in pairs])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def eigen_sym(a, tol=_JACOBI_TOL, max_sweeps=_JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi sweeps.

    Each sweep visits every off-diagonal pair once, in round-robin order so
    that rotations within a round touch disjoint index pairs and can be
    applied together.  Iteration stops once the off-diagonal Frobenius mass
    drops to ``tol * ||a||_F``.

    Parameters
    ----------
    a : array-like of shape (p, p)
        Finite symmetric matrix.
    tol : float
        Relative off-diagonal convergence threshold.
    max_sweeps : int
        Sweep cap; exceeding it raises :class:`ConvergenceFailure`.

    Returns
    -------
    EigenDecomposition
    """
    A = as_sym_matrix(a, min_dim=1)
    p = A.shape[0]
    V = np.eye(p)
    fro = np.linalg.norm(A)
    rounds = _round_robin(p)
    for _ in range(max_sweeps + 1):
        off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
        if off <= tol * fro or p == 1:
            break
        for P, Q in rounds:
            apq = A[P, Q]
            active = np.abs(apq) > 1e-300
            if not np.any(active):
                continue
            P, Q, apq = P[active], Q[active], apq[active]
            theta = (A[Q, Q] - A[P, P]) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(t**2 + 1.0)
            s = t * c
            rp, rq = A[P, :].copy(), A[Q, :]
            A[P, :] = c[:, None] * rp - s[:, None] * rq
            A[Q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = A[:, P].copy(), A[:, Q]
            A[:, P] = cp * c - cq * s
            A[:, Q] = cp * s + cq * c
            A[P, Q] = 0.0
            A[Q, P] = 0.0
            vp, vq = V[:, P].copy(), V[:, Q]
            V[:, P] = vp * c - vq * s
            V[:, Q] = vp * s + vq * c
    else:
        raise ConvergenceFailure(f"Jacobi did not converge in {max_sweeps} sweeps")
    values = np.diag(A).copy()
    order = np.argsort(-values, kind="stable")
    return EigenDecomposition(values[order], V[:, order])


def norm(a, kind="max"):
    """Matrix norm of ``a``.

    ``kind`` is one of ``"max"`` (entrywise absolute max), ``"l1"`` (max
    absolute column sum), ``"spectral"`` (largest singular value) or
    ``"frobenius"``.
    """
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("matrix contains non-finite entries")
    if kind == "max":
        return float(np.max(np.abs(a))) if a.size else 0.0
    if kind == "l1":
        return float(np.max(np.sum(np.abs(a), axis=0)))
    if kind == "frobenius":
        return float(np.sqrt(np.sum(a * a)))
    if kind == "spectral":
        if np.array_equal(a, a.T):
            return float(np.max(np.abs(eigen_sym(a).values)))
        return float(np.sqrt(max(eigen_sym(a.T @ a).values[0], 0.0)))
    raise InvalidParameter(f"unknown norm kind {kind!r}")


def rowsum_tolerance(a):
    """Tolerance on ``||a 1||_inf`` below which rows count as summing to zero."""
    a = np.asarray(a)
    return 1e-8 * a.shape[0] * max(1.0, float(np.max(np.abs(a))))


def rank1_corrected_inverse(a, rho=1.0):
    """Moore-Penrose inverse of a zero-row-sum symmetric matrix.

    Computes ``(a + rho v v^T)^{-1} - v v^T / rho`` with ``v = 1_p / sqrt(p)``.
    The correction fills the known null direction, so any ``rho > 0`` gives
    the same answer.

    Raises
    ------
    InvalidParameter
        If ``rho <= 0``.
    InvalidMatrix
        If the rows of ``a`` do not sum to zero.
    RankDeficient
        If ``a`` has a null direction besides ``1_p``.
    """
    if not rho > 0:
        raise InvalidParameter(f"rho must be positive, got {rho}")
    a = as_sym_matrix(a)
    p = a.shape[0]
    if np.max(np.abs(a.sum(axis=1))) > rowsum_tolerance(a):
        raise InvalidMatrix("rows must sum to zero")
    vvT = np.full((p, p), 1.0 / p)
    eig = eigen_sym(a + rho * vvT)
    # The v direction carries eigenvalue rho; the rest are a's own spectrum.
    vals = eig.values
    scale = max(1.0, norm(a, "l1"))
    if np.min(np.abs(vals)) <= _NULL_EIG_TOL * scale:
        raise RankDeficient("matrix is singular beyond the 1_p direction")
    inv = (eig.vectors / vals) @ eig.vectors.T - vvT / rho
    return 0.5 * (inv + inv.T)
