"""Simplex solver for the columnwise constrained l1-minimization.

Each column problem reads

    minimize ||w||_1  subject to  ||S w - b||_inf <= lam

and is solved in the split form ``w = u - v`` with ``u, v >= 0``:

    [ S  -S ] [u]   [ lam 1 + b ]
    [-S   S ] [v] <= [ lam 1 - b ]

Adding slacks gives ``2p`` equality rows and ``4p`` columns.  The slack
basis is optimal for every ``lam >= ||b||_inf``, and because all costs are
nonnegative every basis reached by dual simplex pivots stays dual feasible.
That makes two drivers natural:

* :func:`solve_column` runs the dual simplex at a fixed ``lam``;
* :func:`solve_path` lowers ``lam`` continuously from ``||b||_inf`` and
  pivots only when a basic variable hits zero (parametric simplex), which
  yields the whole piecewise-linear solution path in one pass.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConvergenceFailure, InvalidInput, InvalidParameter

__all__ = [
    "ColumnProblem",
    "LpSolution",
    "SolutionPath",
    "column_target",
    "solve_column",
    "solve_path",
]

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9
_REFRESH_EVERY = 50


def column_target(p, j, centered=True):
    """Right-hand side ``e_j - 1_p / p`` (or ``e_j`` when not centered)."""
    b = np.full(p, -1.0 / p) if centered else np.zeros(p)
    b[j] += 1.0
    return b


@dataclass(frozen=True)
class ColumnProblem:
    """One column of the estimator: ``sigma``, column ``j`` (0-based), ``lam``."""

    sigma: np.ndarray
    j: int
    lam: float
    centered: bool = True

    def __post_init__(self):
        p = np.shape(self.sigma)[0]
        if not 0 <= self.j < p:
            raise InvalidParameter(f"column index {self.j} out of range for p={p}")
        if not self.lam >= 0:
            raise InvalidParameter(f"lambda must be nonnegative, got {self.lam}")

    @property
    def target(self):
        return column_target(np.shape(self.sigma)[0], self.j, self.centered)


@dataclass
class LpSolution:
    omega: np.ndarray
    objective: float
    status: str
    lam: float
    iterations: int = 0

    @property
    def optimal(self):
        return self.status == "optimal"


@dataclass
class SolutionPath:
    """Solutions of one column problem along a decreasing ``lam`` grid.

    ``breakpoints`` lists the values of ``lam`` at which the optimal basis
    changed while tracing down to the last grid point.
    """

    column: int
    lambdas: np.ndarray
    solutions: list
    breakpoints: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def omegas(self):
        return np.array([s.omega for s in self.solutions])

    @property
    def objectives(self):
        return np.array([s.objective for s in self.solutions])


class _Tableau:
    """Dense simplex tableau ``B^{-1} [A | r0 | r1]`` with reduced costs.

    The right-hand side is ``r0 + lam * r1``, so the basic solution is
    ``beta + lam * gamma`` with ``beta, gamma`` the last two columns.
    """

    def __init__(self, sigma, target):
        p = target.shape[0]
        m = 2 * p
        M = np.vstack([sigma, -sigma])
        self.p, self.m, self.n = p, m, 2 * m
        self.A = np.hstack([M, -M, np.eye(m), np.concatenate([target, -target])[:, None], np.ones((m, 1))])
        self.cost = np.concatenate([np.ones(m), np.zeros(m)])
        self.basis = np.arange(m, 2 * m)
        self.is_basic = np.zeros(self.n, dtype=bool)
        self.is_basic[self.basis] = True
        self.T = self.A.copy()
        self.d = self.cost.copy()
        self.pivots = 0

    @property
    def beta(self):
        return self.T[:, -2]

    @property
    def gamma(self):
        return self.T[:, -1]

    def basic_values(self, lam):
        return self.T[:, -2] + lam * self.T[:, -1]

    def entering(self, i):
        """Dual ratio test on row ``i``; ``None`` means primal infeasible."""
        alpha = self.T[i, : self.n]
        cand = (alpha < -PIVOT_TOL) & ~self.is_basic
        if not np.any(cand):
            return None
        idx = np.flatnonzero(cand)
        ratios = np.maximum(self.d[idx], 0.0) / -alpha[idx]
        # argmin returns the first minimizer, i.e. the smallest index on ties.
        return int(idx[np.argmin(ratios)])

    def pivot(self, i, k):
        T = self.T
        T[i] /= T[i, k]
        col = T[:, k].copy()
        col[i] = 0.0
        T -= np.outer(col, T[i])
        self.d -= self.d[k] * T[i, : self.n]
        self.d[k] = 0.0
        self.is_basic[self.basis[i]] = False
        self.is_basic[k] = True
        self.basis[i] = k
        self.pivots += 1
        if self.pivots % _REFRESH_EVERY == 0:
            self.refresh()

    def refresh(self):
        # Recompute from the original data to stop round-off accumulating.
        B = self.A[:, self.basis]
        self.T = np.linalg.solve(B, self.A)
        self.T[np.arange(self.m), self.basis] = 1.0
        y = self.cost[self.basis] @ self.T[:, : self.n]
        self.d = self.cost - y
        self.d[self.basis] = 0.0

    def solution(self, lam, status="optimal"):
        if status != "optimal":
            return LpSolution(np.full(self.p, np.nan), np.nan, status, lam, self.pivots)
        x = np.zeros(self.n)
        x[self.basis] = np.maximum(self.basic_values(lam), 0.0)
        omega = x[: self.p] - x[self.p : 2 * self.p]
        return LpSolution(omega, float(np.abs(omega).sum()), "optimal", lam, self.pivots)


def _check_sigma(sigma, target):
    sigma = np.asarray(sigma, dtype=float)
    target = np.asarray(target, dtype=float)
    p = target.shape[0]
    if sigma.shape != (p, p):
        raise InvalidInput(f"sigma must be {p}x{p}, got {sigma.shape}")
    if not (np.all(np.isfinite(sigma)) and np.all(np.isfinite(target))):
        raise InvalidInput("non-finite problem data")
    return sigma, target


def solve_lp(sigma, target, lam, max_iter=None):
    """Dual simplex for ``min ||w||_1 s.t. ||sigma w - target||_inf <= lam``.

    The leaving row is the most infeasible one until ``50 p`` degenerate
    pivots have been made, after which Bland's smallest-index rule takes
    over to rule out cycling.
    """
    sigma, target = _check_sigma(sigma, target)
    if not lam >= 0:
        raise InvalidParameter(f"lambda must be nonnegative, got {lam}")
    tab = _Tableau(sigma, target)
    max_iter = max_iter or 200 * tab.m
    degenerate = 0
    bland = False
    for _ in range(max_iter):
        x = tab.basic_values(lam)
        neg = np.flatnonzero(x < -FEAS_TOL)
        if neg.size == 0:
            return tab.solution(lam)
        if bland:
            i = int(neg[np.argmin(tab.basis[neg])])
        else:
            i = int(neg[np.argmin(x[neg])])
        k = tab.entering(i)
        if k is None:
            return tab.solution(lam, "infeasible")
        if tab.d[k] <= PIVOT_TOL:
            degenerate += 1
            bland = bland or degenerate > 25 * tab.m
        tab.pivot(i, k)
    raise ConvergenceFailure(f"dual simplex exceeded {max_iter} pivots")


def solve_column(problem):
    """Solve one :class:`ColumnProblem` at its own ``lam``."""
    return solve_lp(problem.sigma, problem.target, problem.lam)


def trace_path(sigma, target, grid, max_iter=None):
    """Parametric simplex over a strictly decreasing ``grid`` of ``lam``.

    Returns ``(solutions, breakpoints)`` where ``solutions[g]`` solves the
    problem at ``grid[g]``.  Grid points below the point where the problem
    becomes infeasible are reported with status ``"infeasible"``.
    """
    sigma, target = _check_sigma(sigma, target)
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise InvalidParameter("lambda grid is empty")
    if np.any(grid < 0) or np.any(np.diff(grid) >= 0):
        raise InvalidParameter("lambda grid must be nonnegative and strictly decreasing")
    tab = _Tableau(sigma, target)
    max_iter = max_iter or 200 * tab.m
    solutions = []
    breakpoints = []
    lam = np.inf
    g = 0
    while g < grid.size:
        beta, gamma = tab.beta, tab.gamma
        rising = np.flatnonzero(gamma > PIVOT_TOL)
        if rising.size:
            cross = -beta[rising] / gamma[rising]
            nxt = min(float(np.max(cross)), lam)
        else:
            nxt = -np.inf
        while g < grid.size and grid[g] >= nxt:
            solutions.append(tab.solution(grid[g]))
            g += 1
        if g == grid.size:
            break
        breakpoints.append(nxt)
        # Leaving row: the basic variable that reaches zero first; ties go to
        # the smallest variable index.
        ties = rising[cross >= nxt - 1e-14 * max(1.0, abs(nxt))]
        i = int(ties[np.argmin(tab.basis[ties])])
        k = tab.entering(i)
        if k is None:
            solutions.extend(tab.solution(lv, "infeasible") for lv in grid[g:])
            break
        if tab.pivots >= max_iter:
            raise ConvergenceFailure(f"parametric simplex exceeded {max_iter} pivots")
        tab.pivot(i, k)
        lam = nxt
    return solutions, np.array(breakpoints)


def solve_path(sigma, j, lambda_grid, centered=True):
    """Solution path for column ``j`` (0-based) over ``lambda_grid``."""
    sigma = np.asarray(sigma, dtype=float)
    target = column_target(sigma.shape[0], j, centered)
    grid = np.asarray(lambda_grid, dtype=float).ravel()
    solutions, breakpoints = trace_path(sigma, target, grid)
    return SolutionPath(j, grid, solutions, breakpoints)
