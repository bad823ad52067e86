"""Dense linear-program solver: two-phase simplex with bounded variables.

Handles problems of the form

    maximize  c . x
    s.t.      A x = b,   lo <= x <= hi   (hi may be +inf, lo == hi allowed)

which covers every program built in this package (adversary searches,
box-constrained attacks, robust-loss evaluation). Bland's rule is used for
both the entering and the leaving choice, so the solver terminates and is
deterministic for a fixed input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

AT_LOWER = 0
AT_UPPER = 1
BASIC = 2


@dataclass
class LinearProgram:
    objective: np.ndarray
    eq_coeffs: np.ndarray
    eq_rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=np.float64)
        n = self.objective.shape[0]
        self.eq_coeffs = np.asarray(self.eq_coeffs, dtype=np.float64).reshape(-1, n)
        self.eq_rhs = np.asarray(self.eq_rhs, dtype=np.float64)
        self.lower = np.asarray(self.lower, dtype=np.float64)
        self.upper = np.asarray(self.upper, dtype=np.float64)
        if self.eq_rhs.shape[0] != self.eq_coeffs.shape[0]:
            raise ConfigurationError("constraint matrix and rhs sizes differ")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ConfigurationError("bound vectors must match variable count")
        if np.any(self.lower > self.upper + 1e-15):
            raise ConfigurationError("lower bound exceeds upper bound")
        if not np.all(np.isfinite(self.eq_rhs)):
            raise ConfigurationError("constraint rhs must be finite")

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]


@dataclass
class LpSolution:
    status: str
    point: np.ndarray | None = None
    value: float | None = None
    meta: dict = field(default_factory=dict)


def solve(lp: LinearProgram) -> LpSolution:
    """Solve to an optimal basic solution; never raises for infeasible or
    unbounded inputs (those come back in ``status``)."""
    n = lp.n_vars
    lo, hi = lp.lower.copy(), lp.upper.copy()
    ranges = hi - lo  # may be inf or 0

    if lp.eq_coeffs.shape[0] == 0:
        return _solve_unconstrained(lp, lo, hi)

    # shift to u = x - lo in [0, r]; flip rows to make the rhs nonnegative
    a = lp.eq_coeffs.copy()
    b = lp.eq_rhs - a @ lo
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0
    m = a.shape[0]

    state = _SimplexState(a, b, ranges)
    if not state.run_phase1():
        return LpSolution(INFEASIBLE)
    status = state.run_phase2(-lp.objective)  # maximize c = minimize -c
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED)
    u = state.solution()
    x = lo + u
    return LpSolution(OPTIMAL, point=x, value=float(lp.objective @ x))


def _solve_unconstrained(lp, lo, hi):
    x = np.where(lp.objective > 0, hi, lo)
    zero = np.abs(lp.objective) <= PIVOT_TOL
    x[zero] = lo[zero]
    if np.any(~np.isfinite(x)):
        return LpSolution(UNBOUNDED)
    return LpSolution(OPTIMAL, point=x, value=float(lp.objective @ x))


class _SimplexState:
    """Bounded-variable simplex over u in [0, r] with A u = b, b >= 0."""

    def __init__(self, a: np.ndarray, b: np.ndarray, ranges: np.ndarray):
        m, n = a.shape
        self.n_orig = n
        # append artificial columns (identity)
        self.a = np.hstack([a, np.eye(m)])
        self.b = b.copy()
        self.r = np.concatenate([ranges, np.full(m, np.inf)])
        self.status = np.full(n + m, AT_LOWER, dtype=np.int64)
        self.basis = list(range(n, n + m))
        self.status[self.basis] = BASIC
        self.u_basic = b.copy()

    # -- helpers ---------------------------------------------------------

    def _rhs_effective(self) -> np.ndarray:
        rhs = self.b.copy()
        upper_vars = np.nonzero(self.status == AT_UPPER)[0]
        if upper_vars.size:
            rhs = rhs - self.a[:, upper_vars] @ self.r[upper_vars]
        return rhs

    def _refresh_basics(self):
        bmat = self.a[:, self.basis]
        self.u_basic = np.linalg.solve(bmat, self._rhs_effective())

    def solution(self) -> np.ndarray:
        u = np.zeros(self.n_orig)
        upper_vars = np.nonzero(self.status[: self.n_orig] == AT_UPPER)[0]
        u[upper_vars] = self.r[upper_vars]
        for pos, var in enumerate(self.basis):
            if var < self.n_orig:
                u[var] = self.u_basic[pos]
        return np.maximum(u, 0.0)

    # -- core loop -------------------------------------------------------

    def _iterate(self, cost: np.ndarray, allowed: int) -> str:
        """Minimize cost . u over variables with index < ``allowed``."""
        m = self.a.shape[0]
        max_iter = 2000 + 40 * (self.n_orig + m)
        for _ in range(max_iter):
            bmat = self.a[:, self.basis]
            try:
                y = np.linalg.solve(bmat.T, cost[self.basis])
            except np.linalg.LinAlgError:
                raise NumericError("singular basis in simplex") from None
            entering = -1
            direction_up = True
            for j in range(allowed):
                st = self.status[j]
                if st == BASIC or self.r[j] <= 0:
                    continue
                zj = cost[j] - y @ self.a[:, j]
                if st == AT_LOWER and zj < -PIVOT_TOL:
                    entering, direction_up = j, True
                    break
                if st == AT_UPPER and zj > PIVOT_TOL:
                    entering, direction_up = j, False
                    break
            if entering < 0:
                return OPTIMAL

            d = np.linalg.solve(bmat, self.a[:, entering])
            # u_basic moves by -t*d when entering increases, +t*d when it
            # decreases; t >= 0 is the step along the edge.
            sgn = 1.0 if direction_up else -1.0
            t_best = self.r[entering]  # own bound flip
            leave_pos = -1
            leave_to_upper = False
            for k in range(m):
                dk = sgn * d[k]
                if dk > PIVOT_TOL:
                    t = self.u_basic[k] / dk
                    to_upper = False
                elif dk < -PIVOT_TOL and np.isfinite(self.r[self.basis[k]]):
                    t = (self.r[self.basis[k]] - self.u_basic[k]) / (-dk)
                    to_upper = True
                else:
                    continue
                t = max(t, 0.0)
                if t < t_best - PIVOT_TOL or (
                    t < t_best + PIVOT_TOL
                    and leave_pos >= 0
                    and self.basis[k] < self.basis[leave_pos]
                ):
                    t_best, leave_pos, leave_to_upper = t, k, to_upper
            if not np.isfinite(t_best):
                return UNBOUNDED

            if leave_pos < 0:
                # entering variable flips to its opposite bound
                self.u_basic -= sgn * t_best * d
                self.status[entering] = AT_UPPER if direction_up else AT_LOWER
            else:
                leaving = self.basis[leave_pos]
                self.u_basic -= sgn * t_best * d
                self.basis[leave_pos] = entering
                self.status[entering] = BASIC
                self.status[leaving] = AT_UPPER if leave_to_upper else AT_LOWER
                self.u_basic[leave_pos] = (
                    t_best if direction_up else self.r[entering] - t_best
                )
            self._refresh_basics()
        raise NumericError("simplex iteration limit exceeded")

    def run_phase1(self) -> bool:
        m = self.a.shape[0]
        cost = np.zeros(self.n_orig + m)
        cost[self.n_orig:] = 1.0
        self._iterate(cost, allowed=self.n_orig + m)
        art_value = 0.0
        for pos, var in enumerate(self.basis):
            if var >= self.n_orig:
                art_value += max(self.u_basic[pos], 0.0)
        if art_value > FEAS_TOL:
            return False
        self._evict_artificials()
        # freeze artificials so phase 2 can never re-enter them
        self.r[self.n_orig:] = 0.0
        return True

    def _evict_artificials(self):
        """Pivot zero-valued artificials out of the basis; drop redundant
        rows where no original column can replace them."""
        drop_rows = []
        for pos in range(len(self.basis)):
            if self.basis[pos] < self.n_orig:
                continue
            bmat = self.a[:, self.basis]
            row = np.linalg.solve(bmat, self.a[:, : self.n_orig])[pos]
            candidates = [
                j
                for j in range(self.n_orig)
                if self.status[j] != BASIC and abs(row[j]) > 1e-8 and self.r[j] > 0
            ]
            if candidates:
                j = candidates[0]
                leaving = self.basis[pos]
                self.basis[pos] = j
                self.status[j] = BASIC
                self.status[leaving] = AT_LOWER
            else:
                drop_rows.append(pos)
        if drop_rows:
            keep = [k for k in range(self.a.shape[0]) if k not in drop_rows]
            dropped_vars = [self.basis[k] for k in drop_rows]
            self.a = self.a[keep]
            self.b = self.b[keep]
            self.basis = [v for k, v in enumerate(self.basis) if k not in drop_rows]
            for v in dropped_vars:
                self.status[v] = AT_LOWER
        self._refresh_basics()

    def run_phase2(self, cost_orig: np.ndarray) -> str:
        cost = np.zeros(self.status.shape[0])
        cost[: self.n_orig] = cost_orig
        return self._iterate(cost, allowed=self.n_orig)


def check_feasible(lp: LinearProgram, x: np.ndarray, tol: float = FEAS_TOL) -> bool:
    """Post-hoc verification used by the test suite on every solve."""
    if np.any(x < lp.lower - tol) or np.any(x > lp.upper + tol):
        return False
    if lp.eq_coeffs.shape[0]:
        resid = lp.eq_coeffs @ x - lp.eq_rhs
        if np.max(np.abs(resid)) > tol * max(1.0, float(np.max(np.abs(lp.eq_rhs)))):
            return False
    return True
