"""Minimization linear programs over operator-counting variables.

The built-in solver is a dense two-phase primal simplex (float64,
feasibility/optimality tolerance 1e-7, Bland's rule after 2*(m+n)
degenerate pivots). Alternative solvers plug in through a named backend
registry; a scipy (HiGHS) backend is registered when scipy is importable.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import util as _importlib_util
from typing import Callable, Sequence

import numpy as np

from .constraints import ConstraintSet, LinearConstraint
from .errors import BackendUnavailable, SolverFailure

EPS = 1e-7
PHASE1_TOL = 1e-6
PIVOT_TOL = 1e-9
DEGENERATE_TOL = 1e-12

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """min objective . y  s.t.  constraints (all >=),  y >= 0."""

    num_vars: int
    objective: tuple[float, ...]
    constraints: tuple[LinearConstraint, ...]

    @staticmethod
    def from_constraints(cset: ConstraintSet, costs: Sequence[float]) -> "LinearProgram":
        if len(costs) != cset.num_actions:
            raise ValueError("cost vector does not match the action table")
        return LinearProgram(num_vars=cset.num_actions,
                             objective=tuple(float(c) for c in costs),
                             constraints=cset.constraints)


@dataclass(frozen=True)
class LpOutcome:
    status: str  # optimal | infeasible | unbounded
    value: float | None = None
    counts: tuple[float, ...] | None = None


def _dense(lp: LinearProgram) -> tuple[np.ndarray, np.ndarray]:
    a = np.zeros((len(lp.constraints), lp.num_vars))
    b = np.zeros(len(lp.constraints))
    for i, row in enumerate(lp.constraints):
        for var, coef in row.terms:
            if not 0 <= var < lp.num_vars:
                raise ValueError(f"constraint references unknown variable {var}")
            a[i, var] += float(coef)
        b[i] = float(row.rhs)
    return a, b


def _pivot(tab: np.ndarray, basis: list[int], row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    factors = tab[:, col].copy()
    factors[row] = 0.0
    tab -= np.outer(factors, tab[row])
    basis[row] = col


def _run_simplex(tab: np.ndarray, basis: list[int], bland_after: int,
                 iter_cap: int) -> str:
    """Iterate to optimality on the reduced-cost row; returns a status."""
    m = tab.shape[0] - 1
    degenerate = 0
    bland = False
    for _ in range(iter_cap):
        costs = tab[-1, :-1]
        if bland:
            neg = np.nonzero(costs < -EPS)[0]
            if neg.size == 0:
                return OPTIMAL
            col = int(neg[0])
        else:
            col = int(np.argmin(costs))
            if costs[col] >= -EPS:
                return OPTIMAL
        column = tab[:m, col]
        eligible = np.nonzero(column > PIVOT_TOL)[0]
        if eligible.size == 0:
            return UNBOUNDED
        ratios = tab[eligible, -1] / column[eligible]
        best = ratios.min()
        tied = eligible[np.nonzero(ratios <= best + DEGENERATE_TOL)[0]]
        row = int(min(tied, key=lambda r: basis[r]))
        if best < DEGENERATE_TOL:
            degenerate += 1
            if degenerate > bland_after:
                bland = True
        _pivot(tab, basis, row, col)
    raise SolverFailure("simplex iteration limit exceeded")


def _solve_simplex(lp: LinearProgram) -> LpOutcome:
    n = lp.num_vars
    m = len(lp.constraints)
    c = np.asarray(lp.objective, dtype=float)
    if m == 0:
        if n and c.min() < 0:
            return LpOutcome(UNBOUNDED)
        return LpOutcome(OPTIMAL, 0.0, (0.0,) * n)
    a, b = _dense(lp)

    art_rows = [i for i in range(m) if b[i] > 0]
    n_art = len(art_rows)
    total = n + m + n_art
    tab = np.zeros((m + 1, total + 1))
    basis: list[int] = [0] * m
    art_col = {}
    for j, i in enumerate(art_rows):
        art_col[i] = n + m + j
    for i in range(m):
        if b[i] > 0:
            # a.y - surplus + artificial = b
            tab[i, :n] = a[i]
            tab[i, n + i] = -1.0
            tab[i, art_col[i]] = 1.0
            tab[i, -1] = b[i]
            basis[i] = art_col[i]
        else:
            # -a.y + slack = -b
            tab[i, :n] = -a[i]
            tab[i, n + i] = 1.0
            tab[i, -1] = -b[i]
            basis[i] = n + i

    bland_after = 2 * (m + n)
    iter_cap = 2000 + 200 * (m + n)

    if n_art:
        for j in art_col.values():
            tab[-1, j] = 1.0
        for i in art_rows:
            tab[-1] -= tab[i]
        status = _run_simplex(tab, basis, bland_after, iter_cap)
        if status != OPTIMAL:
            raise SolverFailure("phase 1 ended " + status)
        if -tab[-1, -1] > PHASE1_TOL:
            return LpOutcome(INFEASIBLE)
        art_set = set(art_col.values())
        drop_rows: list[int] = []
        for i in range(m):
            if basis[i] in art_set:
                pivots = np.nonzero(np.abs(tab[i, : n + m]) > PIVOT_TOL)[0]
                if pivots.size:
                    _pivot(tab, basis, i, int(pivots[0]))
                else:
                    drop_rows.append(i)  # redundant constraint
        keep_rows = [i for i in range(m) if i not in drop_rows] + [m]
        keep_cols = list(range(n + m)) + [total]
        tab = tab[np.ix_(keep_rows, keep_cols)]
        basis = [basis[i] for i in range(m) if i not in drop_rows]
        m = len(basis)

    tab[-1, :] = 0.0
    tab[-1, :n] = c
    for i in range(m):
        if tab[-1, basis[i]] != 0.0:
            tab[-1] -= tab[-1, basis[i]] * tab[i]
    status = _run_simplex(tab, basis, bland_after, iter_cap)
    if status == UNBOUNDED:
        return LpOutcome(UNBOUNDED)

    x = np.zeros(n + m)
    for i, col in enumerate(basis):
        if col < n + m:
            x[col] = tab[i, -1]
    counts = np.maximum(x[:n], 0.0)
    value = float(c @ counts)
    return LpOutcome(OPTIMAL, value, tuple(float(v) for v in counts))


def solve_lp(lp: LinearProgram) -> LpOutcome:
    """Solve with the built-in simplex."""
    return _solve_simplex(lp)


_BACKENDS: dict[str, Callable[[LinearProgram], LpOutcome]] = {}


def register_backend(name: str, solver: Callable[[LinearProgram], LpOutcome]) -> None:
    _BACKENDS[name] = solver


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def solve_with(lp: LinearProgram, backend: str) -> LpOutcome:
    solver = _BACKENDS.get(backend)
    if solver is None:
        raise BackendUnavailable(
            f"no LP backend registered under '{backend}' (have: {', '.join(available_backends())})")
    return solver(lp)


def _scipy_backend(lp: LinearProgram) -> LpOutcome:
    from scipy.optimize import linprog

    c = np.asarray(lp.objective, dtype=float)
    if lp.constraints:
        a, b = _dense(lp)
        res = linprog(c, A_ub=-a, b_ub=-b, bounds=(0, None), method="highs")
    else:
        res = linprog(c, bounds=(0, None), method="highs")
    if res.status == 0:
        counts = tuple(float(v) for v in np.maximum(res.x, 0.0))
        return LpOutcome(OPTIMAL, float(c @ np.asarray(counts)), counts)
    if res.status == 2:
        return LpOutcome(INFEASIBLE)
    if res.status == 3:
        return LpOutcome(UNBOUNDED)
    raise SolverFailure(f"scipy backend failed: {res.message}")


register_backend("simplex", _solve_simplex)
if _importlib_util.find_spec("scipy") is not None:
    register_backend("scipy", _scipy_backend)
