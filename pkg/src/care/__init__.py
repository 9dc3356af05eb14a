"""Sparse estimation of basis precision matrices from compositional data."""

__version__ = "0.1.0"

from .clime import (  # noqa: E402
    CvConfig,
    PrecisionEstimate,
    cross_validate,
    estimate_columns,
    hard_threshold,
    oracle_estimate,
    symmetrize,
)
from .compositional import clr_transform, sample_clr_covariance  # noqa: E402
from .estimators import CARE, CARECV, ClrTransformer, OracleCLIME, OracleCLIMECV  # noqa: E402
from .lpsolve import solve_column, solve_path  # noqa: E402
from .metrics import network_stability, recovery_report, roc_curve  # noqa: E402
from .simgen import GraphModelSpec, gen_omega, sample_logistic_normal  # noqa: E402

__all__ = [
    "CARE",
    "CARECV",
    "ClrTransformer",
    "CvConfig",
    "GraphModelSpec",
    "OracleCLIME",
    "OracleCLIMECV",
    "PrecisionEstimate",
    "clr_transform",
    "cross_validate",
    "estimate_columns",
    "gen_omega",
    "hard_threshold",
    "network_stability",
    "oracle_estimate",
    "recovery_report",
    "roc_curve",
    "sample_clr_covariance",
    "sample_logistic_normal",
    "solve_column",
    "solve_path",
    "symmetrize",
]
