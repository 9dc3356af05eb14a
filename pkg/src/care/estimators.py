"""scikit-learn style wrappers around the functional core.

``fit`` takes the observed compositions (rows summing to one), or raw
counts when ``zero_correction="vc"``; the oracle estimators take the
log-basis directly.  Fitted attributes end with an underscore, as usual.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .clime import CvConfig, cross_validate, estimate_columns, hard_threshold, symmetrize
from .compositional import (
    check_composition,
    clr_transform,
    closure,
    sample_clr_covariance,
    zero_replace_vc,
)
from .exceptions import InvalidDimension, InvalidInput, InvalidParameter
from .lpsolve import column_target
from .numerics import as_sym_matrix

__all__ = [
    "CARE",
    "CARECV",
    "ClrTransformer",
    "OracleCLIME",
    "OracleCLIMECV",
    "check_compositions",
]

ZERO_CORRECTIONS = (None, "vc")


def check_compositions(X, zero_correction=None):
    """Validate ``X`` and return strictly positive compositions.

    Parameters
    ----------
    X : array-like of shape (n_samples, n_features)
        Compositions, or nonnegative counts if ``zero_correction="vc"``.
    zero_correction : {None, "vc"}
        ``"vc"`` adds 0.5 to every count before closure.

    Raises
    ------
    NotStrictlyPositive
        Zeros are present and no zero correction was requested.
    """
    if zero_correction not in ZERO_CORRECTIONS:
        raise InvalidParameter(f"zero_correction must be one of {ZERO_CORRECTIONS}")
    X = check_array(X, dtype=np.float64, ensure_min_features=2)
    if np.any(X < 0):
        raise InvalidInput("negative entries are not allowed")
    if zero_correction == "vc":
        return zero_replace_vc(X)
    return check_composition(X)


def _default_lambda(n, p):
    # Scale of the sampling term in the convergence rate.
    return float(np.sqrt(np.log(p) / n))


def _mean_loss(precision, sigma, centered):
    p = sigma.shape[0]
    total = 0.0
    for j in range(p):
        w = precision[:, j]
        total += 0.5 * w @ sigma @ w - column_target(p, j, centered) @ w
    return total / p


class ClrTransformer(TransformerMixin, BaseEstimator):
    """Centered log-ratio transform; ``inverse_transform`` is the softmax."""

    def __init__(self, zero_correction=None):
        self.zero_correction = zero_correction

    def fit(self, X, y=None):
        X = check_compositions(X, self.zero_correction)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_compositions(X, self.zero_correction)
        if X.shape[1] != self.n_features_in_:
            raise InvalidDimension(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return clr_transform(X)

    def inverse_transform(self, Z):
        Z = check_array(Z, dtype=np.float64)
        return closure(np.exp(Z - Z.max(axis=1, keepdims=True)))


class _PrecisionBase(BaseEstimator):
    _centered = True

    def _prepare(self, X):
        if self._centered:
            return clr_transform(check_compositions(X, getattr(self, "zero_correction", None)))
        return check_array(X, dtype=np.float64, ensure_min_samples=2, ensure_min_features=2)

    def _finish(self, sigma, raw, estimate):
        if not self.threshold >= 0:
            raise InvalidParameter("threshold must be nonnegative")
        if self.threshold > 0:
            estimate = hard_threshold(estimate, self.threshold)
        self.covariance_ = sigma
        self.raw_precision_ = raw
        self.precision_ = estimate.matrix
        self.lambda_ = np.asarray(estimate.lambdas)
        self.stage_ = estimate.stage
        self.n_features_in_ = sigma.shape[0]
        return self

    def get_precision(self):
        check_is_fitted(self, "precision_")
        return self.precision_

    def score(self, X, y=None):
        """Negative column-averaged validation loss on held-out ``X``."""
        check_is_fitted(self, "precision_")
        sigma = sample_clr_covariance(self._prepare(X))
        if sigma.shape[0] != self.n_features_in_:
            raise InvalidDimension(f"expected {self.n_features_in_} features, got {sigma.shape[0]}")
        return -_mean_loss(self.precision_, sigma, self._centered)


class _FixedLambda(_PrecisionBase):
    def fit(self, X, y=None):
        return self.fit_covariance(sample_clr_covariance(self._prepare(X)), n_samples=len(X))

    def fit_covariance(self, covariance, n_samples=None):
        """Fit from a covariance matrix, e.g. a corrected or perturbed one.

        ``n_samples`` is only used for the default ``lam``.
        """
        sigma = as_sym_matrix(covariance, "covariance")
        p = sigma.shape[0]
        lam = self.lam
        if lam is None:
            if n_samples is None:
                raise InvalidParameter("lam is required when n_samples is unknown")
            lam = _default_lambda(n_samples, p)
        raw = estimate_columns(sigma, lam, self._centered, self.n_jobs)
        return self._finish(sigma, raw.matrix, symmetrize(raw))


class _CrossValidated(_PrecisionBase):
    def _config(self):
        return CvConfig(
            n_folds=self.n_folds,
            n_grid=self.n_grid,
            delta=self.delta,
            seed=self.random_state,
            train_fraction=self.train_fraction,
            scheme=self.scheme,
        )

    def fit(self, X, y=None):
        data = self._prepare(X)
        res = cross_validate(data, self._config(), self._centered, self.n_jobs)
        sigma = sample_clr_covariance(data)
        self.cv_scores_ = res.scores
        self.lambda_grid_ = res.grids
        return self._finish(sigma, res.raw, res.estimate)


class CARE(_FixedLambda):
    """Compositional precision estimator at fixed tuning parameters.

    Parameters
    ----------
    lam : float or array-like of shape (p,), optional
        Constraint radius, shared or per column.  Defaults to
        ``sqrt(log p / n)``.
    threshold : float, default=0
        Hard-threshold level ``tau``; entries with ``|w| <= tau`` are zeroed.
    zero_correction : {None, "vc"}
        Treat the input as counts and add 0.5 before closure.
    n_jobs : int, optional
        Threads for the column problems.

    Attributes
    ----------
    precision_ : ndarray of shape (p, p)
        Symmetrized (and possibly thresholded) estimate of the basis
        precision matrix.
    raw_precision_ : ndarray of shape (p, p)
        Column solutions before symmetrization.
    covariance_ : ndarray of shape (p, p)
        Sample centered log-ratio covariance.
    lambda_ : ndarray of shape (p,)
    """

    def __init__(self, lam=None, threshold=0.0, zero_correction=None, n_jobs=None):
        self.lam = lam
        self.threshold = threshold
        self.zero_correction = zero_correction
        self.n_jobs = n_jobs


class CARECV(_CrossValidated):
    """:class:`CARE` with per-column ``lam`` chosen by cross-validation.

    Parameters
    ----------
    n_folds : int, default=5
    n_grid : int, default=50
    delta : float or array-like, optional
        Grid ceilings; ``1 - 1/p`` by default.
    scheme : {"kfold", "split"}, default="kfold"
        Disjoint folds, or ``n_folds`` independent random splits.
    train_fraction : float, default=0.5
        Training share for random splits.
    threshold, zero_correction, n_jobs
        As in :class:`CARE`.
    random_state : int, default=0

    Attributes
    ----------
    cv_scores_ : ndarray of shape (p, n_grid)
        Validation loss per column and grid point (decreasing ``lam``).
    lambda_grid_ : ndarray of shape (p, n_grid)
    """

    def __init__(
        self,
        n_folds=5,
        n_grid=50,
        delta=None,
        scheme="kfold",
        train_fraction=0.5,
        threshold=0.0,
        zero_correction=None,
        random_state=0,
        n_jobs=None,
    ):
        self.n_folds = n_folds
        self.n_grid = n_grid
        self.delta = delta
        self.scheme = scheme
        self.train_fraction = train_fraction
        self.threshold = threshold
        self.zero_correction = zero_correction
        self.random_state = random_state
        self.n_jobs = n_jobs


class OracleCLIME(_FixedLambda):
    """CLIME on log-basis data ``Y`` (targets ``e_j``)."""

    _centered = False

    def __init__(self, lam=None, threshold=0.0, n_jobs=None):
        self.lam = lam
        self.threshold = threshold
        self.n_jobs = n_jobs


class OracleCLIMECV(_CrossValidated):
    """Cross-validated :class:`OracleCLIME`; grid ceiling defaults to 1."""

    _centered = False

    def __init__(
        self,
        n_folds=5,
        n_grid=50,
        delta=None,
        scheme="kfold",
        train_fraction=0.5,
        threshold=0.0,
        random_state=0,
        n_jobs=None,
    ):
        self.n_folds = n_folds
        self.n_grid = n_grid
        self.delta = delta
        self.scheme = scheme
        self.train_fraction = train_fraction
        self.threshold = threshold
        self.random_state = random_state
        self.n_jobs = n_jobs
