"""Log-ratio transforms, compositional covariance estimators and the
identities linking basis and compositional precision matrices.

Notation used throughout: ``Omega0`` is the precision matrix of the
log-basis ``Y = log W``; ``Sigma0`` its inverse.  A composition is
``X = W / sum(W)``, its centered log-ratio is ``Z = G Y`` with
``G = I - 11^T / p``, and ``Sigma_c = cov(Z) = G Sigma0 G``.  The
compositional precision matrix ``Omega_c`` is the Moore-Penrose inverse of
``Sigma_c`` and equals ``Omega0 - Omega0 11^T Omega0 / (1^T Omega0 1)``.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    EmptySample,
    InsufficientSamples,
    InvalidDimension,
    InvalidInput,
    InvalidParameter,
    NotPositiveDefinite,
    NotStrictlyPositive,
)
from .numerics import as_sym_matrix, rank1_corrected_inverse

__all__ = [
    "ZeroPattern",
    "alr_to_clr_covariance",
    "alr_transform",
    "basis_to_clr_covariance",
    "basis_to_compositional_precision",
    "center_matrix",
    "check_composition",
    "closure",
    "clr_transform",
    "compositional_precision_from_covariance",
    "ipw_alr_covariance",
    "sample_clr_covariance",
    "zero_replace_vc",
]

SIMPLEX_TOL = 1e-10
RENORMALIZE_TOL = 1e-6


def closure(w):
    """Scale each row of a positive matrix to sum to one."""
    w = np.asarray(w, dtype=float)
    return w / w.sum(axis=-1, keepdims=True)


def check_composition(x):
    """Validate an ``(n, p)`` matrix of strictly positive compositions.

    Rows whose sums are within ``1e-6`` of one are renormalized (CSV rounding);
    larger deviations are rejected.

    Returns
    -------
    ndarray of shape (n, p)
        Rows summing to one within ``1e-10``.
    """
    x = np.array(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] < 2:
        raise InvalidDimension("compositions must be a 2-D array with p >= 2")
    if not np.all(np.isfinite(x)):
        raise InvalidInput("compositions contain non-finite entries")
    if np.any(x <= 0):
        raise NotStrictlyPositive(
            "compositions must be strictly positive; zero counts need a "
            "zero-handling step such as zero_replace_vc"
        )
    sums = x.sum(axis=1)
    bad = np.abs(sums - 1.0) > RENORMALIZE_TOL
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise InvalidInput(f"row {k} sums to {sums[k]!r}, not 1")
    off = np.abs(sums - 1.0) > SIMPLEX_TOL
    if np.any(off):
        x[off] /= sums[off, None]
    return x


def clr_transform(x):
    """Centered log-ratio ``z_kj = log x_kj - mean_i log x_ki``.

    >>> clr_transform([[1/3, 1/3, 1/3]])
    array([[0., 0., 0.]])
    """
    x = check_composition(x)
    logx = np.log(x)
    return logx - logx.mean(axis=1, keepdims=True)


def alr_transform(x, reference=-1):
    """Additive log-ratio against the ``reference`` component.

    Returns the ``(n, p - 1)`` matrix ``log(x_kj / x_k,ref)`` with the
    reference column dropped.
    """
    x = check_composition(x)
    ref = reference % x.shape[1]
    logx = np.log(x)
    return np.delete(logx - logx[:, [ref]], ref, axis=1)


def sample_clr_covariance(z):
    """Sample covariance with divisor ``n``.

    Parameters
    ----------
    z : array-like of shape (n, p)
        Centered log-ratio rows (or log-basis rows for the oracle path).

    Returns
    -------
    ndarray of shape (p, p)
        ``n^{-1} sum_k (z_k - zbar)(z_k - zbar)^T``, exactly symmetric.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 2:
        raise InvalidDimension("data must be a 2-D array")
    n = z.shape[0]
    if n < 2:
        raise InsufficientSamples(f"need at least 2 samples, got {n}")
    zc = z - z.mean(axis=0)
    s = zc.T @ zc / n
    return 0.5 * (s + s.T)


def center_matrix(p):
    """The centering projection ``G = I_p - 1_p 1_p^T / p``."""
    if p < 2:
        raise InvalidDimension(f"p must be at least 2, got {p}")
    return np.eye(p) - np.full((p, p), 1.0 / p)


def basis_to_compositional_precision(omega0):
    """``Omega_c = Omega0 - Omega0 11^T Omega0 / (1^T Omega0 1)``.

    The result has zero row sums and equals the pseudoinverse of the
    centered log-ratio covariance implied by ``Omega0``.
    """
    omega0 = as_sym_matrix(omega0, "omega0")
    r = omega0.sum(axis=1)
    total = r.sum()
    if not total > 0:
        raise NotPositiveDefinite("1^T Omega0 1 must be positive")
    out = omega0 - np.outer(r, r) / total
    return 0.5 * (out + out.T)


def basis_to_clr_covariance(sigma0):
    """``Sigma_c = G Sigma0 G``, the centered log-ratio covariance."""
    sigma0 = as_sym_matrix(sigma0, "sigma0")
    # G S G = S - r 1^T/p - 1 r^T/p + (1^T S 1) 11^T/p^2 with r = S 1.
    p = sigma0.shape[0]
    r = sigma0.sum(axis=1) / p
    out = sigma0 - r[:, None] - r[None, :] + r.sum() / p
    return 0.5 * (out + out.T)


def compositional_precision_from_covariance(sigma_c, rho=1.0):
    """Moore-Penrose inverse of a rank ``p - 1`` centered log-ratio covariance."""
    return rank1_corrected_inverse(sigma_c, rho)


def zero_replace_vc(counts, allow_empty=False):
    """``+0.5`` variable correction: add one half to every count and close.

    An all-zero row carries no information and raises :class:`EmptySample`
    unless ``allow_empty`` is set, in which case it becomes the uniform
    composition.

    >>> zero_replace_vc([[1, 3]])
    array([[0.3, 0.7]])
    """
    c = np.asarray(counts, dtype=float)
    if c.ndim == 1:
        c = c[None, :]
    if np.any(c < 0) or not np.all(np.isfinite(c)):
        raise InvalidInput("counts must be finite and nonnegative")
    if not allow_empty and np.any(c.sum(axis=1) <= 0):
        k = int(np.flatnonzero(c.sum(axis=1) <= 0)[0])
        raise EmptySample(f"row {k} has no counts")
    return closure(c + 0.5)


@dataclass(frozen=True)
class ZeroPattern:
    """Nondegeneracy indicators for the zero-inflated ALR moment estimator.

    Attributes
    ----------
    delta : ndarray of shape (n, p - 1)
        1 where the observation comes from the nondegenerate part.
    pi : ndarray of shape (p - 1,)
        Per-component nondegeneracy probabilities in ``(0, 1]``.
    min_observed : int
        Fewest nondegenerate observations required per component.
    """

    delta: np.ndarray
    pi: np.ndarray
    min_observed: int = 2

    def __post_init__(self):
        delta = np.asarray(self.delta, dtype=float)
        pi = np.asarray(self.pi, dtype=float).ravel()
        if delta.ndim != 2 or delta.shape[1] != pi.shape[0]:
            raise InvalidDimension("delta must be (n, q) with len(pi) == q")
        if not np.all((delta == 0) | (delta == 1)):
            raise InvalidInput("delta entries must be 0 or 1")
        if np.any(pi <= 0) or np.any(pi > 1):
            raise InvalidParameter("pi entries must lie in (0, 1]")
        if np.any(delta.sum(axis=0) < self.min_observed):
            raise InsufficientSamples(f"each column of delta needs at least {self.min_observed} ones")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "pi", pi)


def ipw_alr_covariance(z_alr, zeros):
    """Inverse-probability-weighted second moments of ALR coordinates.

    ``sigma_ij = n^{-1} sum_k delta_ki delta_kj z_ki z_kj / pi_ij`` with
    ``pi_ij = pi_i pi_j`` off the diagonal and ``pi_i`` on it.  Moments are
    uncentered; supply mean-zero log-ratios if a covariance is wanted.
    """
    z = np.asarray(z_alr, dtype=float)
    if z.ndim != 2 or z.shape != zeros.delta.shape:
        raise InvalidDimension("z_alr and zeros.delta must have the same shape")
    pi = zeros.pi
    pij = np.outer(pi, pi)
    np.fill_diagonal(pij, pi)
    if np.any(pij <= 0):
        raise InvalidParameter("pi_ij must be positive")
    zd = z * zeros.delta
    s = (zd.T @ zd) / z.shape[0] / pij
    return 0.5 * (s + s.T)


def alr_to_clr_covariance(sigma_alr):
    """Map an ALR covariance to the centered log-ratio scale.

    Returns ``F^T H^{-1} S H^{-1} F`` with ``F = (I, -1)`` and
    ``H = I + 11^T``.
    """
    s = as_sym_matrix(sigma_alr, "sigma_alr", min_dim=1)
    q = s.shape[0]
    F = np.hstack([np.eye(q), -np.ones((q, 1))])
    # H^{-1} = I - 11^T / (q + 1)
    Hinv = np.eye(q) - np.full((q, q), 1.0 / (q + 1))
    M = Hinv @ F
    out = M.T @ s @ M
    return 0.5 * (out + out.T)
