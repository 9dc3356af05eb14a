"""Estimation losses, support recovery, ROC curves and network stability."""

from dataclasses import asdict, dataclass, field

import numpy as np

from .clime import CvConfig, cross_validate, estimate_columns, hard_threshold, symmetrize
from .compositional import check_composition, clr_transform, sample_clr_covariance
from .exceptions import InsufficientSamples, InvalidDimension, InvalidInput, InvalidParameter
from .numerics import norm

__all__ = [
    "RecoveryReport",
    "RocCurve",
    "StabilityReport",
    "detected_edges",
    "network_stability",
    "recovery_report",
    "roc_curve",
    "support_rates",
]


@dataclass
class RecoveryReport:
    spectral_loss: float
    l1_loss: float
    frobenius_loss: float
    tpr: float
    fpr: float
    vacuous_tpr: bool = False

    def to_dict(self, percent=False):
        d = asdict(self)
        if percent:
            d["tpr_percent"] = 100.0 * self.tpr
            d["fpr_percent"] = 100.0 * self.fpr
        return d


@dataclass
class RocCurve:
    lambdas: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    vacuous_tpr: bool = False

    def rows(self):
        return list(zip(self.lambdas.tolist(), self.fpr.tolist(), self.tpr.tolist()))


@dataclass
class StabilityReport:
    edges: list
    proportions: np.ndarray
    stability: float
    stable_edges: list
    retain_threshold: float
    subsamples: int
    full_lambdas: np.ndarray = field(repr=False, default=None)

    def to_dict(self):
        return {
            "edges": [list(e) for e in self.edges],
            "proportions": self.proportions.tolist(),
            "stability": self.stability,
            "stable_edges": [list(e) for e in self.stable_edges],
            "retain_threshold": self.retain_threshold,
            "subsamples": self.subsamples,
            "lambda": None if self.full_lambdas is None else self.full_lambdas.tolist(),
        }


def detected_edges(matrix, eps=0.0):
    """Upper-triangular mask of off-diagonal entries with ``|a_ij| > eps``."""
    a = np.asarray(matrix)
    return np.triu(np.abs(a) > eps, 1)


def _truth_mask(truth):
    if hasattr(truth, "edge_mask"):
        return truth.edge_mask()
    return detected_edges(truth)


def support_rates(estimate, truth, eps=0.0):
    """``(tpr, fpr, vacuous)`` over unordered off-diagonal pairs.

    With no true edges the recall is vacuous: ``tpr`` is reported as 1 and
    ``vacuous`` is set.
    """
    est = detected_edges(estimate, eps)
    true = _truth_mask(truth)
    p = est.shape[0]
    pairs = p * (p - 1) // 2
    n_true = int(true.sum())
    tp = int((est & true).sum())
    fp = int((est & ~true).sum())
    vacuous = n_true == 0
    tpr = 1.0 if vacuous else tp / n_true
    fpr = fp / (pairs - n_true) if pairs > n_true else 0.0
    return tpr, fpr, vacuous


def recovery_report(estimate, truth, eps=0.0):
    """Spectral, matrix-l1 and Frobenius losses plus TPR/FPR."""
    estimate = np.asarray(estimate, dtype=float)
    omega0 = truth.omega0 if hasattr(truth, "omega0") else np.asarray(truth, dtype=float)
    if estimate.shape != omega0.shape:
        raise InvalidDimension(f"estimate {estimate.shape} vs truth {omega0.shape}")
    diff = estimate - omega0
    tpr, fpr, vacuous = support_rates(estimate, truth, eps)
    return RecoveryReport(
        spectral_loss=norm(diff, "spectral"),
        l1_loss=norm(diff, "l1"),
        frobenius_loss=norm(diff, "frobenius"),
        tpr=tpr,
        fpr=fpr,
        vacuous_tpr=vacuous,
    )


def roc_curve(paths, truth, eps=0.0):
    """ROC points from per-column solution paths sharing one ``lambda`` grid.

    At every grid value the columns are assembled, symmetrized and scored.
    """
    paths = list(paths)
    if not paths:
        raise InvalidInput("no paths given")
    grid = np.asarray(paths[0].lambdas)
    if any(not np.array_equal(np.asarray(pa.lambdas), grid) for pa in paths):
        raise InvalidInput("all columns must share the same lambda grid")
    order = sorted(range(len(paths)), key=lambda k: paths[k].column)
    fpr, tpr = [], []
    vacuous = False
    for g in range(grid.size):
        W = np.column_stack([np.nan_to_num(paths[k].solutions[g].omega) for k in order])
        t, f, vacuous = support_rates(symmetrize(W), truth, eps)
        tpr.append(t)
        fpr.append(f)
    return RocCurve(grid.copy(), np.array(fpr), np.array(tpr), vacuous)


def _network(z, config, lambdas, tau, n_jobs):
    if lambdas is None:
        res = cross_validate(z, config, n_jobs=n_jobs)
        est, lam = res.estimate, res.lambdas
    else:
        est = symmetrize(estimate_columns(sample_clr_covariance(z), lambdas, n_jobs=n_jobs))
        lam = np.asarray(lambdas)
    if tau:
        est = hard_threshold(est, tau)
    return detected_edges(est.matrix), lam


def network_stability(
    data,
    config=None,
    subsamples=100,
    fraction=0.8,
    retain_threshold=0.8,
    seed=0,
    tau=0.0,
    freeze_lambda=False,
    n_jobs=None,
):
    """Edge reproduction across random row subsamples.

    The full-data network comes from the cross-validated pipeline.  Each of
    ``subsamples`` subsets of ``floor(fraction * n)`` rows is refit (with a
    fresh cross-validation unless ``freeze_lambda``), and every full-data
    edge gets the share of subsample networks that contain it.  Overall
    stability is the mean share; it is 1 when the full network is empty.

    Parameters
    ----------
    data : array-like of shape (n, p)
        Strictly positive compositions.
    config : CvConfig, optional
        Inner cross-validation settings.
    """
    config = config or CvConfig()
    if not 0 < fraction < 1:
        raise InvalidParameter("fraction must lie in (0, 1)")
    if subsamples < 1:
        raise InvalidParameter("subsamples must be >= 1")
    x = check_composition(data)
    n = x.shape[0]
    m = int(np.floor(fraction * n))
    if m < 2 * max(config.n_folds, 1):
        raise InsufficientSamples(f"subsample size {m} too small for {config.n_folds}-fold CV")
    z = clr_transform(x)
    if np.ptp(z, axis=0).max() == 0:
        raise InsufficientSamples("all rows are identical; the covariance carries no information")
    full, lam = _network(z, config, None, tau, n_jobs)
    edges = [(int(i), int(j)) for i, j in zip(*np.nonzero(full))]
    rng = np.random.default_rng(seed)
    counts = np.zeros(len(edges))
    for _ in range(subsamples):
        rows = np.sort(rng.choice(n, size=m, replace=False))
        sub, _ = _network(z[rows], config, lam if freeze_lambda else None, tau, n_jobs)
        counts += np.array([sub[e] for e in edges], dtype=float)
    proportions = counts / subsamples
    stability = float(proportions.mean()) if edges else 1.0
    stable = [e for e, pr in zip(edges, proportions) if pr >= retain_threshold]
    return StabilityReport(edges, proportions, stability, stable, retain_threshold, subsamples, lam)
