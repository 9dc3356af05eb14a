"""Columnwise estimation, symmetrization, thresholding and cross-validation.

The same machinery serves two estimators.  The compositional estimator
works on the centered log-ratio covariance with column targets
``e_j - 1_p / p``; the oracle benchmark works on the covariance of the
log-basis itself with targets ``e_j``.  The ``centered`` flag selects which.
"""

from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .compositional import sample_clr_covariance
from .exceptions import InfeasibleColumn, InsufficientSamples, InvalidParameter
from .lpsolve import column_target, trace_path

__all__ = [
    "CvConfig",
    "CvResult",
    "PrecisionEstimate",
    "cross_validate",
    "cv_loss",
    "estimate_columns",
    "hard_threshold",
    "oracle_estimate",
    "perturbation_bound",
    "perturbation_lambda",
    "symmetrize",
    "threshold_level",
]

RAW = "raw_asymmetric"
SYMMETRIZED = "symmetrized"
THRESHOLDED = "thresholded"

SCHEMES = ("kfold", "split")
_TIE_RTOL = 1e-12


@dataclass
class PrecisionEstimate:
    matrix: np.ndarray
    lambdas: np.ndarray
    stage: str
    tau: float | None = None
    centered: bool = True


@dataclass(frozen=True)
class CvConfig:
    """Cross-validation settings.

    Attributes
    ----------
    n_folds : int
        Number ``B`` of train/test splits.  With ``scheme="kfold"`` the
        rows are partitioned into ``B`` folds (``B = 1`` means one split of
        ``train_fraction``); with ``scheme="split"`` each of the ``B``
        splits is an independent random split of ``train_fraction``.
    n_grid : int
        Grid points ``delta_j * l / n_grid`` for ``l = 1..n_grid``.
    delta : float or sequence of float, optional
        Grid ceilings; defaults to the smallest value giving the zero
        solution (``1 - 1/p`` centered, ``1`` otherwise).
    seed : int
        Seeds the row shuffle that defines the folds.
    scheme : {"kfold", "split"}
    train_fraction : float
        Training share for random splits.
    """

    n_folds: int = 5
    n_grid: int = 50
    delta: float | tuple | None = None
    seed: int = 0
    train_fraction: float = 0.5
    scheme: str = "kfold"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InvalidParameter(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.n_folds < 1:
            raise InvalidParameter("n_folds must be >= 1")
        if self.n_grid < 1:
            raise InvalidParameter("n_grid must be >= 1")
        if self.delta is not None and np.any(np.asarray(self.delta) <= 0):
            raise InvalidParameter("delta must be positive")
        if not 0 < self.train_fraction < 1:
            raise InvalidParameter("train_fraction must lie in (0, 1)")

    def deltas(self, p, centered=True):
        if self.delta is None:
            return np.full(p, 1.0 - 1.0 / p if centered else 1.0)
        return np.broadcast_to(np.asarray(self.delta, dtype=float), (p,)).copy()

    def grid(self, delta_j):
        """Decreasing grid ``delta_j * (N, N - 1, ..., 1) / N``."""
        return delta_j * np.arange(self.n_grid, 0, -1) / self.n_grid


@dataclass
class CvResult:
    lambdas: np.ndarray
    estimate: PrecisionEstimate
    grids: np.ndarray
    scores: np.ndarray = field(repr=False)
    raw: np.ndarray = field(repr=False, default=None)


def _solve_one(sigma, j, lam, centered):
    sols, _ = trace_path(sigma, column_target(sigma.shape[0], j, centered), [lam])
    if not sols[0].optimal:
        raise InfeasibleColumn(j, lam)
    return sols[0].omega


def _parallel(n_jobs):
    return Parallel(n_jobs=n_jobs or 1, prefer="threads")


def estimate_columns(sigma, lambdas, centered=True, n_jobs=None):
    """Solve the ``p`` column problems; column ``j`` uses ``lambdas[j]``.

    Returns the raw, generally asymmetric estimate.
    """
    sigma = np.asarray(sigma, dtype=float)
    p = sigma.shape[0]
    lambdas = np.broadcast_to(np.asarray(lambdas, dtype=float), (p,)).copy()
    if np.any(lambdas < 0):
        raise InvalidParameter("lambdas must be nonnegative")
    cols = _parallel(n_jobs)(
        delayed(_solve_one)(sigma, j, lambdas[j], centered) for j in range(p)
    )
    return PrecisionEstimate(np.column_stack(cols), lambdas, RAW, centered=centered)


def symmetrize(raw):
    """Keep, for each pair, the entry of smaller magnitude.

    The rule is evaluated for ``i < j`` and mirrored; on ties the ``(i, j)``
    entry wins.
    """
    W = np.asarray(raw.matrix if isinstance(raw, PrecisionEstimate) else raw, dtype=float)
    keep = np.abs(W) <= np.abs(W.T)
    S = np.where(keep, W, W.T)
    upper = np.triu(S)
    out = upper + np.triu(upper, 1).T
    if isinstance(raw, PrecisionEstimate):
        return PrecisionEstimate(out, raw.lambdas, SYMMETRIZED, centered=raw.centered)
    return out


def hard_threshold(est, tau):
    """Zero every entry (diagonal included) with ``|w_ij| <= tau``."""
    if not tau >= 0:
        raise InvalidParameter(f"tau must be nonnegative, got {tau}")
    M = est.matrix
    out = np.where(np.abs(M) > tau, M, 0.0)
    return PrecisionEstimate(out, est.lambdas, THRESHOLDED, tau=float(tau), centered=est.centered)


def threshold_level(M_p, n, p, c=1.0):
    """``c * (M_p sqrt(log p / n) + M_p^2 / sqrt(p))`` for known ``M_p``."""
    return c * (M_p * np.sqrt(np.log(p) / n) + M_p**2 / np.sqrt(p))


def perturbation_lambda(sigma, omega0, e_max, M_p=None):
    """Radius keeping ``omega0`` feasible under an additive covariance error.

    Returns ``(lam0, lam)`` with ``lam0 = ||sigma omega0 - G||_max`` and
    ``lam = lam0 + M_p * e_max``; ``M_p`` defaults to the matrix l1 norm of
    ``omega0``.
    """
    sigma = np.asarray(sigma, dtype=float)
    omega0 = np.asarray(omega0, dtype=float)
    p = sigma.shape[0]
    G = np.eye(p) - 1.0 / p
    if M_p is None:
        M_p = float(np.max(np.abs(omega0).sum(axis=0)))
    lam0 = float(np.max(np.abs(sigma @ omega0 - G)))
    return lam0, lam0 + M_p * float(e_max)


def perturbation_bound(lam0, M_p, e_max, p):
    """``2 M_p (lam0 + 1/p) + 3 M_p^2 e_max``: max-norm gap between the
    estimates from the clean and the perturbed covariance at the inflated
    radius."""
    return 2.0 * M_p * (lam0 + 1.0 / p) + 3.0 * M_p**2 * e_max


def cv_loss(omega_j, sigma, j, centered=True):
    """``0.5 w^T S w - b_j^T w`` with ``b_j`` the column target."""
    w = np.asarray(omega_j, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    b = column_target(sigma.shape[0], j, centered)
    return float(0.5 * w @ sigma @ w - b @ w)


def _path_losses(train_sigma, test_sigma, j, grid, centered):
    b = column_target(train_sigma.shape[0], j, centered)
    sols, _ = trace_path(train_sigma, b, grid)
    W = np.array([np.nan_to_num(s.omega) for s in sols])
    losses = 0.5 * np.einsum("lp,pq,lq->l", W, test_sigma, W) - W @ b
    feasible = np.array([s.optimal for s in sols])
    return np.where(feasible, losses, np.inf)


def _splits(n, config):
    rng = np.random.default_rng(config.seed)
    if config.scheme == "split":
        n1 = int(round(config.train_fraction * n))
        perms = [rng.permutation(n) for _ in range(config.n_folds)]
        return [(np.sort(q[:n1]), np.sort(q[n1:])) for q in perms]
    perm = rng.permutation(n)
    if config.n_folds == 1:
        n1 = int(round(config.train_fraction * n))
        return [(np.sort(perm[:n1]), np.sort(perm[n1:]))]
    folds = np.array_split(perm, config.n_folds)
    return [
        (np.sort(np.concatenate(folds[:b] + folds[b + 1 :])), np.sort(folds[b]))
        for b in range(config.n_folds)
    ]


def _pick(scores):
    # Grids are decreasing, so the first near-minimizer is the largest lambda.
    best = np.min(scores)
    tol = _TIE_RTOL * max(1.0, abs(best))
    return int(np.flatnonzero(scores <= best + tol)[0])


def cross_validate(data, config=None, centered=True, n_jobs=None):
    """Choose ``lambda_j`` per column by cross-validation over ``B`` splits.

    For every split the column path is traced on the training covariance and
    scored with :func:`cv_loss` on the held-out covariance; scores are
    averaged over folds and the largest minimizing grid value is kept.  All
    columns are then refit on the full data and symmetrized.

    Parameters
    ----------
    data : array-like of shape (n, p)
        Centered log-ratio rows (``centered=True``) or log-basis rows.
    config : CvConfig, optional

    Returns
    -------
    CvResult
    """
    config = config or CvConfig()
    data = np.asarray(data, dtype=float)
    n, p = data.shape
    splits = _splits(n, config)
    if any(len(tr) < 2 or len(te) < 2 for tr, te in splits):
        raise InsufficientSamples(
            f"n={n} is too small for {config.n_folds}-fold cross-validation"
        )
    deltas = config.deltas(p, centered)
    grids = np.array([config.grid(d) for d in deltas])
    scores = np.zeros((p, config.n_grid))
    for tr, te in splits:
        s_train = sample_clr_covariance(data[tr])
        s_test = sample_clr_covariance(data[te])
        fold = _parallel(n_jobs)(
            delayed(_path_losses)(s_train, s_test, j, grids[j], centered) for j in range(p)
        )
        scores += np.array(fold)
    scores /= len(splits)
    chosen = np.array([grids[j, _pick(scores[j])] for j in range(p)])
    raw = estimate_columns(sample_clr_covariance(data), chosen, centered, n_jobs)
    return CvResult(chosen, symmetrize(raw), grids, scores, raw.matrix)


def oracle_estimate(y, lambdas=None, config=None, n_jobs=None):
    """CLIME on the log-basis as if it were observed.

    With ``lambdas`` given the columns are solved directly; otherwise the
    tuning parameters are cross-validated with ``config``.  Returns the
    symmetrized estimate.
    """
    y = np.asarray(y, dtype=float)
    if lambdas is not None:
        raw = estimate_columns(sample_clr_covariance(y), lambdas, centered=False, n_jobs=n_jobs)
        return symmetrize(raw)
    return cross_validate(y, config, centered=False, n_jobs=n_jobs).estimate
