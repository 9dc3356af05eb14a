"""Synthetic precision matrices and compositional / count samplers.

Random streams come from :class:`numpy.random.Generator` (PCG64).  A
replicate ``r`` of an experiment seeded with ``seed`` uses
``replicate_rngs(seed, R)[r]``, which spawns independent children of
``SeedSequence(seed)``; replicates are therefore reproducible in any
execution order.
"""

from dataclasses import dataclass

import numpy as np

from .compositional import check_composition, closure
from .exceptions import InvalidDimension, InvalidParameter, NotPositiveDefinite
from .numerics import eigen_sym, norm

__all__ = [
    "GraphModelSpec",
    "GroundTruth",
    "MODELS",
    "gen_omega",
    "replicate_rngs",
    "sample_counts",
    "sample_logistic_normal",
]

MODELS = ("band", "hub", "block", "random", "scale_free")
_ALIASES = {"a": "band", "b": "hub", "c": "block", "d": "random", "sf": "scale_free"}
_WEIGHTS = np.array([0.8, 0.5])
_SHIFT = 0.01


def replicate_rngs(seed, n):
    """``n`` independent generators derived from ``seed``."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class GraphModelSpec:
    model: str
    p: int
    seed: int = 0
    edge_count: int | None = None

    def __post_init__(self):
        model = _ALIASES.get(self.model, self.model)
        object.__setattr__(self, "model", model)
        if model not in MODELS:
            raise InvalidParameter(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.p < 2:
            raise InvalidDimension("p must be at least 2")
        if model in ("hub", "block") and self.p % 5:
            raise InvalidDimension(f"{model} model needs p divisible by 5, got p={self.p}")
        if model == "scale_free":
            if self.edge_count is None:
                raise InvalidParameter("scale_free model needs edge_count")
            if not 0 <= self.edge_count <= self.p * (self.p - 1) // 2:
                raise InvalidParameter("edge_count out of range")


@dataclass
class GroundTruth:
    omega0: np.ndarray
    support: list
    M_p: float
    eigen_range: tuple
    spec: GraphModelSpec | None = None

    @property
    def p(self):
        return self.omega0.shape[0]

    @property
    def sigma0(self):
        eig = eigen_sym(self.omega0)
        return (eig.vectors / eig.values) @ eig.vectors.T

    def edge_mask(self):
        """Upper-triangular boolean mask of true edges."""
        mask = np.zeros((self.p, self.p), dtype=bool)
        for i, j in self.support:
            mask[min(i, j), max(i, j)] = True
        return mask

    def to_dict(self):
        return {
            "p": self.p,
            "matrix": self.omega0.tolist(),
            "support": [list(e) for e in self.support],
            "M_p": self.M_p,
            "eigen_range": list(self.eigen_range),
            "model": self.spec.model if self.spec else None,
            "seed": self.spec.seed if self.spec else None,
            "edge_count": self.spec.edge_count if self.spec else None,
        }

    @classmethod
    def from_dict(cls, d):
        spec = None
        if d.get("model"):
            spec = GraphModelSpec(d["model"], d["p"], d.get("seed") or 0, d.get("edge_count"))
        omega0 = np.asarray(d["matrix"], dtype=float)
        return cls(omega0, [tuple(e) for e in d["support"]], d["M_p"], tuple(d["eigen_range"]), spec)

    @classmethod
    def from_matrix(cls, omega0, spec=None):
        omega0 = np.asarray(omega0, dtype=float)
        vals = eigen_sym(omega0).values
        iu = np.triu_indices(omega0.shape[0], 1)
        support = [(int(i), int(j)) for i, j in zip(*iu) if omega0[i, j] != 0]
        return cls(omega0, support, norm(omega0, "l1"), (float(vals[-1]), float(vals[0])), spec)


def _weights(rng, k):
    return rng.choice(_WEIGHTS, size=k)


def _band(p, rng):
    W = np.zeros((p, p))
    i = np.arange(p - 1)
    W[i, i + 1] = 0.8
    i = np.arange(p - 2)
    W[i, i + 2] = 0.5
    return W


def _hub(p, rng):
    W = np.zeros((p, p))
    for start in range(0, p, 5):
        block = np.arange(start, start + 5)
        hub = rng.choice(block)
        others = block[block != hub]
        W[np.minimum(hub, others), np.maximum(hub, others)] = _weights(rng, others.size)
    return W


def _block(p, rng):
    W = np.zeros((p, p))
    size = p // 5
    prob = min(1.0, 20.0 / p)
    for start in range(0, p, size):
        iu = np.triu_indices(size, 1)
        hit = rng.random(iu[0].size) < prob
        W[iu[0][hit] + start, iu[1][hit] + start] = _weights(rng, int(hit.sum()))
    return W


def _random(p, rng):
    W = np.zeros((p, p))
    iu = np.triu_indices(p, 1)
    hit = rng.random(iu[0].size) < min(1.0, 4.0 / p)
    W[iu[0][hit], iu[1][hit]] = _weights(rng, int(hit.sum()))
    return W


def _preferential_attachment(p, m, rng):
    """Barabasi-Albert growth: each new node links to ``m`` existing nodes
    chosen with probability proportional to degree."""
    edges = set()
    targets = list(range(m))
    repeated = []
    for new in range(m, p):
        for t in targets:
            edges.add((min(new, t), max(new, t)))
        repeated.extend(targets)
        repeated.extend([new] * m)
        chosen = set()
        while len(chosen) < m and new + 1 < p:
            chosen.add(int(repeated[rng.integers(len(repeated))]))
        targets = sorted(chosen)
    return edges


def _scale_free(p, rng, edge_count):
    m = int(np.clip(round(edge_count / p), 1, p - 1))
    edges = _preferential_attachment(p, m, rng)
    iu = np.triu_indices(p, 1)
    all_pairs = list(zip(iu[0].tolist(), iu[1].tolist()))
    if len(edges) > edge_count:
        pool = sorted(edges)
        drop = rng.choice(len(pool), size=len(edges) - edge_count, replace=False)
        edges -= {pool[k] for k in drop}
    elif len(edges) < edge_count:
        pool = [e for e in all_pairs if e not in edges]
        add = rng.choice(len(pool), size=edge_count - len(edges), replace=False)
        edges |= {pool[k] for k in add}
    W = np.zeros((p, p))
    ordered = sorted(edges)
    if ordered:
        rows, cols = zip(*ordered)
        W[list(rows), list(cols)] = _weights(rng, len(ordered))
    return W


def gen_omega(spec):
    """Draw a positive definite ``Omega0`` for ``spec``.

    Off-diagonal weights follow the chosen graph; the diagonal is drawn from
    ``U(1, 2)`` and the assembled matrix is shifted by
    ``(|lambda_min| + 0.01) I``.
    """
    rng = np.random.default_rng(spec.seed)
    p = spec.p
    if spec.model == "band":
        upper = _band(p, rng)
    elif spec.model == "hub":
        upper = _hub(p, rng)
    elif spec.model == "block":
        upper = _block(p, rng)
    elif spec.model == "random":
        upper = _random(p, rng)
    else:
        upper = _scale_free(p, rng, spec.edge_count)
    omega1 = upper + upper.T + np.diag(rng.uniform(1.0, 2.0, size=p))
    lam_min = eigen_sym(omega1).values[-1]
    omega0 = omega1 + (abs(lam_min) + _SHIFT) * np.eye(p)
    return GroundTruth.from_matrix(omega0, spec)


def _covariance_root(omega0):
    eig = eigen_sym(omega0)
    if eig.values[-1] <= 0:
        raise NotPositiveDefinite("Omega0 must be positive definite")
    return (eig.vectors / np.sqrt(eig.values)) @ eig.vectors.T


def sample_logistic_normal(truth, n, mu=None, seed=None):
    """Draw ``Y_k ~ N(mu, Omega0^{-1})`` and ``X_k = exp(Y_k) / sum exp(Y_k)``.

    Returns
    -------
    Y : ndarray of shape (n, p)
    X : ndarray of shape (n, p)
    """
    omega0 = truth.omega0 if isinstance(truth, GroundTruth) else np.asarray(truth, dtype=float)
    p = omega0.shape[0]
    rng = _rng(seed)
    root = _covariance_root(omega0)
    mu = np.zeros(p) if mu is None else np.broadcast_to(np.asarray(mu, dtype=float), (p,))
    Y = mu + rng.standard_normal((n, p)) @ root
    X = closure(np.exp(Y - Y.max(axis=1, keepdims=True)))
    return Y, X


def sample_counts(x, depth_low, depth_high, seed=None):
    """Multinomial counts with per-row depth uniform on ``[depth_low, depth_high]``."""
    if not 1 <= depth_low <= depth_high:
        raise InvalidParameter("need 1 <= depth_low <= depth_high")
    x = check_composition(x)
    rng = _rng(seed)
    depths = rng.integers(depth_low, depth_high + 1, size=x.shape[0])
    return rng.multinomial(depths, x)
