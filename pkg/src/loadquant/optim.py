"""Derivative-free optimizers and a dense two-phase simplex LP solver.

Everything here is deterministic: golden-section search with a final
parabolic refinement for bounded scalars, classic Nelder-Mead (reflection 1,
expansion 2, contraction 0.5, shrink 0.5) with optional log-space or clamped
bound handling, and a tableau simplex with Bland's anti-cycling rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    Infeasible,
    InvalidConfig,
    MaxEvaluationsExceeded,
    NonFiniteObjective,
    Unbounded,
)

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ScalarObjective:
    evaluate: Callable[[float], float]
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise InvalidConfig(f"need lower < upper, got [{self.lower}, {self.upper}]")


@dataclass(frozen=True)
class VectorObjective:
    evaluate: Callable[[np.ndarray], float]
    dimension: int
    bounds: Optional[Sequence[tuple[float, float]]] = None

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise InvalidConfig("dimension must be >= 1")
        if self.bounds is not None and len(self.bounds) != self.dimension:
            raise InvalidConfig("bounds length must equal dimension")


@dataclass(frozen=True)
class LinearProgram:
    """min cost.x  subject to  equality_matrix @ x = equality_rhs, x >= 0."""

    cost: np.ndarray
    equality_matrix: np.ndarray
    equality_rhs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.cost, dtype=np.float64)
        a = np.asarray(self.equality_matrix, dtype=np.float64)
        b = np.asarray(self.equality_rhs, dtype=np.float64)
        if a.ndim != 2 or c.ndim != 1 or b.ndim != 1:
            raise InvalidConfig("cost and rhs must be vectors, matrix must be 2-D")
        if a.shape != (b.size, c.size):
            raise InvalidConfig(
                f"matrix shape {a.shape} inconsistent with cost ({c.size}) and rhs ({b.size})"
            )
        object.__setattr__(self, "cost", c)
        object.__setattr__(self, "equality_matrix", a)
        object.__setattr__(self, "equality_rhs", b)


@dataclass(frozen=True)
class ScalarResult:
    x: float
    value: float
    evaluations: int


@dataclass(frozen=True)
class VectorResult:
    x: np.ndarray
    value: float
    iterations: int


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    objective: float


def minimize_bounded_scalar(
    obj: ScalarObjective,
    tol: float,
    max_evaluations: int = 500,
    callback: Optional[Callable[[float, float], None]] = None,
) -> ScalarResult:
    """Golden-section search with a final parabolic refinement step.

    For a unimodal objective the returned point is within `tol` of the
    minimizer. `callback(a, b)` is invoked after every bracket shrink.
    """
    if tol <= 0:
        raise InvalidConfig("tol must be positive")
    f = obj.evaluate
    a, b = float(obj.lower), float(obj.upper)
    evals = 0

    def ev(x: float) -> float:
        nonlocal evals
        if evals >= max_evaluations:
            raise MaxEvaluationsExceeded(
                f"scalar minimizer needs more than {max_evaluations} evaluations for tol={tol}"
            )
        evals += 1
        return float(f(x))

    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = ev(c), ev(d)
    best_x, best_f = (c, fc) if fc <= fd else (d, fd)

    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = ev(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = ev(d)
        if fc <= best_f:
            best_x, best_f = c, fc
        if fd <= best_f:
            best_x, best_f = d, fd
        if callback is not None:
            callback(a, b)

    # one parabolic step through the bracket triplet, kept only if it helps
    x1, x2, x3 = a, best_x, b
    f2 = best_f
    if x1 < x2 < x3 and evals + 3 <= max_evaluations:
        f1, f3 = ev(x1), ev(x3)
        num = (x2 - x1) ** 2 * (f2 - f3) - (x2 - x3) ** 2 * (f2 - f1)
        den = (x2 - x1) * (f2 - f3) - (x2 - x3) * (f2 - f1)
        if den != 0.0:
            v = x2 - 0.5 * num / den
            if np.isfinite(v) and x1 < v < x3:
                fv = ev(v)
                if fv < best_f:
                    best_x, best_f = v, fv
    return ScalarResult(best_x, best_f, evals)


def grid_search(obj: ScalarObjective, grid: Sequence[float]) -> ScalarResult:
    """Evaluate every grid point; ties go to the earliest grid entry."""
    pts = list(grid)
    if not pts:
        raise InvalidConfig("grid must be nonempty")
    best_x, best_f = None, math.inf
    for x in pts:
        fx = float(obj.evaluate(float(x)))
        if fx < best_f:
            best_x, best_f = float(x), fx
    return ScalarResult(best_x, best_f, len(pts))


def minimize_nelder_mead(
    obj: VectorObjective,
    start: Sequence[float],
    tol: float,
    bound_mode: Optional[str] = None,
    max_iterations: Optional[int] = None,
) -> VectorResult:
    """Nelder-Mead simplex minimization.

    bound_mode:
        None     unconstrained
        "log"    optimize log-coordinates; caller guarantees positivity
        "clamp"  clamp each coordinate into obj.bounds before evaluating

    Terminates when both the simplex coordinate spread and the value spread
    fall below `tol`, or after 200 * dimension iterations. Never returns a
    point worse than the starting point.
    """
    if tol <= 0:
        raise InvalidConfig("tol must be positive")
    if bound_mode not in (None, "log", "clamp"):
        raise InvalidConfig(f"unknown bound_mode {bound_mode!r}")
    n = obj.dimension
    x0 = np.asarray(start, dtype=np.float64)
    if x0.shape != (n,):
        raise InvalidConfig(f"start must have length {n}")
    if bound_mode == "clamp":
        if obj.bounds is None:
            raise InvalidConfig("clamp mode requires bounds")
        lo = np.array([b[0] for b in obj.bounds], dtype=np.float64)
        hi = np.array([b[1] for b in obj.bounds], dtype=np.float64)
    if bound_mode == "log" and np.any(x0 <= 0):
        raise InvalidConfig("log mode requires a strictly positive start")

    def to_user(z: np.ndarray) -> np.ndarray:
        if bound_mode == "log":
            return np.exp(z)
        if bound_mode == "clamp":
            return np.clip(z, lo, hi)
        return z

    def ev(z: np.ndarray) -> float:
        v = float(obj.evaluate(to_user(z)))
        if not np.isfinite(v):
            raise NonFiniteObjective(f"objective returned {v} at {to_user(z)}")
        return v

    z0 = np.log(x0) if bound_mode == "log" else x0.copy()
    simplex = [z0]
    for i in range(n):
        zi = z0.copy()
        zi[i] = zi[i] * 1.05 if zi[i] != 0.0 else 0.00025
        simplex.append(zi)
    values = [ev(z) for z in simplex]
    best_z = simplex[int(np.argmin(values))].copy()
    best_f = min(values)

    limit = max_iterations if max_iterations is not None else 200 * n
    iterations = 0
    while iterations < limit:
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        if values[0] < best_f:
            best_f = values[0]
            best_z = simplex[0].copy()
        spread_x = max(np.max(np.abs(z - simplex[0])) for z in simplex[1:])
        spread_f = values[-1] - values[0]
        if spread_x <= tol and spread_f <= tol:
            break
        iterations += 1

        centroid = np.mean(simplex[:-1], axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = ev(xr)
        if fr < values[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = ev(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
        else:
            if fr < values[-1]:
                xc = centroid + 0.5 * (centroid - simplex[-1])
            else:
                xc = centroid - 0.5 * (centroid - simplex[-1])
            fc = ev(xc)
            if fc < min(fr, values[-1]):
                simplex[-1], values[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    values[i] = ev(simplex[i])

    i_best = int(np.argmin(values))
    if values[i_best] < best_f:
        best_f = values[i_best]
        best_z = simplex[i_best].copy()
    return VectorResult(to_user(best_z), best_f, iterations)


# ---------------------------------------------------------------------------
# simplex


class SimplexTableau:
    """Dense simplex tableau for min c.x, A x = b, x >= 0.

    The constructor expects a canonical tableau: `basis[i]` names a column of
    `body` that is the i-th unit vector and rhs >= 0. Costs can be swapped
    with set_objective() to re-optimize the same constraint body, which is
    what makes warm-started quantile sweeps cheap.
    """

    RC_TOL = 1e-9
    PIV_TOL = 1e-9

    def __init__(self, body: np.ndarray, rhs: np.ndarray, basis: Sequence[int]):
        self.body = np.array(body, dtype=np.float64, order="C")
        self.rhs = np.array(rhs, dtype=np.float64)
        self.basis = np.array(basis, dtype=np.int64)
        m, n = self.body.shape
        if self.rhs.shape != (m,) or self.basis.shape != (m,):
            raise InvalidConfig("tableau shapes inconsistent")
        self.n_rows = m
        self.n_cols = n
        self.costs = np.zeros(n)
        self.reduced = np.zeros(n)
        self.objective_value = 0.0
        self._rc_zeroed = 0
        # degenerate vertices must be exact zeros or Bland's rule can cycle
        # on rounding dust; anything below this is snapped to 0
        self._rhs_snap = 1e-11 * max(1.0, float(np.abs(self.rhs).max(initial=0.0)))
        self._perturbed = False
        # originals retained for refactorization
        self._a0 = self.body.copy()
        self._b0 = self.rhs.copy()

    def set_objective(self, costs: np.ndarray) -> None:
        self.costs = np.asarray(costs, dtype=np.float64)
        if self.costs.shape != (self.n_cols,):
            raise InvalidConfig("cost vector length mismatch")
        cb = self.costs[self.basis]
        self.reduced = self.costs - cb @ self.body
        self.reduced[self.basis] = 0.0
        self.objective_value = float(cb @ self.rhs)

    def refactorize(self) -> bool:
        """Recompute the tableau from the original data and current basis.

        Removes accumulated pivot drift and any active rhs perturbation.
        """
        try:
            sol = np.linalg.solve(self._a0[:, self.basis], np.column_stack([self._a0, self._b0]))
        except np.linalg.LinAlgError:
            return False
        scale = 1.0 + float(np.abs(self._b0).max(initial=0.0))
        if not np.all(np.isfinite(sol)) or np.abs(sol[:, -1]).max(initial=0.0) > 1e8 * scale:
            return False
        self.body = np.ascontiguousarray(sol[:, :-1])
        self.rhs = sol[:, -1]
        np.maximum(self.rhs, 0.0, out=self.rhs)
        self._perturbed = False
        self.set_objective(self.costs)
        self._rc_zeroed = 0
        return True

    def _entering(self, rule: str) -> Optional[int]:
        red = self.reduced
        cb_scale = float(np.abs(self.costs[self.basis]).max(initial=0.0))
        while True:
            if rule == "bland":
                idx = np.flatnonzero(red < -self.RC_TOL)
                if idx.size == 0:
                    return None
                j = int(idx[0])
            else:
                j = int(np.argmin(red))
                if red[j] >= -self.RC_TOL:
                    return None
            # a stored reduced cost carries float error that scales with the
            # tableau column; anything inside that band is treated as zero
            col_scale = float(np.abs(self.body[:, j]).max(initial=0.0))
            noise = 5e-12 * self.n_rows * (1.0 + col_scale) * (1.0 + cb_scale)
            if red[j] < -(self.RC_TOL + noise):
                return j
            red[j] = 0.0
            self._rc_zeroed += 1

    def _leaving(self, col: np.ndarray) -> Optional[int]:
        # prefer pivots that are large relative to the column, so that drift
        # noise in a true-zero column cannot enter the basis; fall back to
        # the absolute tolerance rather than misreport unboundedness
        strict = max(self.PIV_TOL, 1e-7 * float(np.abs(col).max(initial=0.0)))
        pos = col > strict
        if not np.any(pos):
            pos = col > self.PIV_TOL
            if not np.any(pos):
                return None
        ratios = np.full(self.n_rows, np.inf)
        ratios[pos] = self.rhs[pos] / col[pos]
        rmin = ratios.min()
        ties = np.flatnonzero(ratios <= rmin + 1e-9)
        # Bland-style tie break: smallest basis label leaves
        return int(ties[np.argmin(self.basis[ties])])

    def _pivot(self, row: int, col: int) -> None:
        body, rhs = self.body, self.rhs
        piv = body[row, col]
        body[row] /= piv
        rhs[row] /= piv
        colv = body[:, col].copy()
        colv[row] = 0.0
        body -= np.outer(colv, body[row])
        rhs -= colv * rhs[row]
        body[:, col] = 0.0
        body[row, col] = 1.0
        np.maximum(rhs, 0.0, out=rhs)
        rhs[rhs < self._rhs_snap] = 0.0
        rc = self.reduced[col]
        self.objective_value += rc * rhs[row]
        self.reduced -= rc * body[row]
        self.reduced[col] = 0.0
        self.basis[row] = col

    def _apply_perturbation(self, round_no: int) -> None:
        """Distinct positive rhs bumps per row break degenerate tie chains."""
        m = self.n_rows
        base = max(self._rhs_snap, 1e-9) * (10.0 ** round_no)
        self.rhs = self.rhs + base * (1.0 + np.arange(m)) / m
        self._perturbed = True

    def optimize(self, rule: str = "bland", max_pivots: Optional[int] = None) -> int:
        """Pivot to optimality. `rule` is "bland" or "dantzig".

        The dantzig rule falls back to Bland once the objective stalls.
        Persistent degenerate stalling triggers temporary rhs perturbation
        rounds; the tableau is refactorized back to the exact data before
        optimality is declared, so the returned solution is unperturbed.
        """
        if rule not in ("bland", "dantzig"):
            raise InvalidConfig(f"unknown pivot rule {rule!r}")
        limit = max_pivots if max_pivots is not None else 400 * (self.n_rows + self.n_cols) + 20000
        stall_limit = self.n_rows + 30
        stall = 0
        pivots = 0
        drift = 0
        current = rule
        perturb_round = 0
        while pivots < limit:
            col = self._entering(current)
            if col is None:
                if not (self._perturbed or self._rc_zeroed or drift > 2000):
                    return pivots
                # verify optimality on exact, freshly factorized data
                if not self.refactorize():
                    raise RuntimeError("simplex basis lost numerical consistency")
                drift = 0
                stall = 0
                col = self._entering(current)
                if col is None:
                    return pivots
            row = self._leaving(self.body[:, col])
            if row is None:
                # distinguish a real ray from perturbation/pivot-drift noise
                if (self._perturbed or drift > 0) and self.refactorize():
                    drift = 0
                    stall = 0
                    continue
                raise Unbounded(f"column {col} can increase without bound")
            before = self.objective_value
            self._pivot(row, col)
            pivots += 1
            drift += 1
            if self.objective_value < before - 1e-12 * (1.0 + abs(before)):
                stall = 0
            else:
                stall += 1
                if stall >= stall_limit:
                    stall = 0
                    if current == "dantzig":
                        current = "bland"
                    elif perturb_round < 6:
                        perturb_round += 1
                        self._apply_perturbation(perturb_round)
                    else:
                        break
        raise RuntimeError("simplex pivot limit exceeded")

    def primal(self) -> np.ndarray:
        x = np.zeros(self.n_cols)
        x[self.basis] = np.maximum(self.rhs, 0.0)
        return x


def solve_lp_simplex(lp: LinearProgram, pivot_rule: str = "bland") -> LPResult:
    """Two-phase primal simplex with Bland's anti-cycling rule by default.

    Raises Infeasible or Unbounded. For feasible bounded problems the
    returned point is an optimal basic feasible solution.
    """
    a = lp.equality_matrix.copy()
    b = lp.equality_rhs.copy()
    c = lp.cost
    m, n = a.shape
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0

    # phase 1: artificial identity basis
    body = np.column_stack([a, np.eye(m)])
    basis = np.arange(n, n + m)
    tab = SimplexTableau(body, b, basis)
    phase1_costs = np.concatenate([np.zeros(n), np.ones(m)])
    tab.set_objective(phase1_costs)
    tab.optimize(pivot_rule)
    if tab.objective_value > 1e-7 * (1.0 + float(np.abs(b).max(initial=0.0))):
        raise Infeasible(f"phase-1 objective {tab.objective_value:.3e} > 0")

    # drive leftover artificials out of the basis; drop redundant rows
    keep = np.ones(tab.n_rows, dtype=bool)
    for i in range(tab.n_rows):
        if tab.basis[i] >= n:
            row = tab.body[i, :n]
            candidates = np.flatnonzero(np.abs(row) > 1e-8)
            if candidates.size:
                tab._pivot(i, int(candidates[0]))
            else:
                keep[i] = False

    body2 = tab.body[keep][:, :n]
    rhs2 = np.maximum(tab.rhs[keep], 0.0)
    basis2 = tab.basis[keep]
    tab2 = SimplexTableau(body2, rhs2, basis2)
    tab2._a0 = a[keep]
    tab2._b0 = b[keep]
    tab2.set_objective(np.asarray(c, dtype=np.float64))
    tab2.optimize(pivot_rule)
    x = tab2.primal()
    return LPResult(x, float(c @ x))
