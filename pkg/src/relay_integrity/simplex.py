"""Dense two-phase simplex for small feasibility and linear-minimization problems.

Solves   min c.x   s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0
with Bland's (smallest-index) pivoting rule, which cannot cycle, and a
feasibility tolerance of 1e-9.  Problems in this package have at most a few
dozen variables, so a dense tableau is the simplest correct choice.
"""

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
MAX_ITER = 20_000


@dataclass
class LpResult:
    status: str            # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None


def solve_lp(c, a_eq=None, b_eq=None, a_ub=None, b_ub=None) -> LpResult:
    """Minimize c.x over {A_eq x = b_eq, A_ub x <= b_ub, x >= 0}."""
    c = np.asarray(c, dtype=float)
    n = c.size
    rows = []
    rhs = []
    n_slack = 0
    if a_eq is not None:
        a_eq = np.atleast_2d(np.asarray(a_eq, dtype=float))
        b_eq = np.atleast_1d(np.asarray(b_eq, dtype=float))
        for i in range(a_eq.shape[0]):
            rows.append((a_eq[i], None))
            rhs.append(b_eq[i])
    if a_ub is not None:
        a_ub = np.atleast_2d(np.asarray(a_ub, dtype=float))
        b_ub = np.atleast_1d(np.asarray(b_ub, dtype=float))
        for i in range(a_ub.shape[0]):
            rows.append((a_ub[i], n_slack))
            rhs.append(b_ub[i])
            n_slack += 1

    m = len(rows)
    total = n + n_slack
    a = np.zeros((m, total))
    b = np.array(rhs, dtype=float)
    for i, (coef, slack) in enumerate(rows):
        a[i, :n] = coef
        if slack is not None:
            a[i, n + slack] = 1.0
    # Simplex wants b >= 0.
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0

    tableau, basis, keep_rows = _phase_one(a, b)
    if tableau is None:
        return LpResult("infeasible", None, None)

    full_c = np.concatenate([c, np.zeros(n_slack)])
    status, x_full, obj = _phase_two(tableau, basis, full_c)
    if status != "optimal":
        return LpResult(status, None, None)
    return LpResult("optimal", x_full[:n], obj)


def feasible_point(a_eq=None, b_eq=None, a_ub=None, b_ub=None) -> np.ndarray | None:
    """A vertex of the polytope, or None when it is empty."""
    n = (np.atleast_2d(a_eq).shape[1] if a_eq is not None
         else np.atleast_2d(a_ub).shape[1])
    res = solve_lp(np.zeros(n), a_eq, b_eq, a_ub, b_ub)
    return res.x if res.status == "optimal" else None


def _phase_one(a: np.ndarray, b: np.ndarray):
    """Find a basic feasible solution with artificial variables.

    Returns (tableau, basis, kept_row_mask) where the tableau has the
    artificial columns already removed, or (None, None, None) if infeasible.
    """
    m, n = a.shape
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = a
    tab[:m, n:n + m] = np.eye(m)
    tab[:m, -1] = b
    basis = list(range(n, n + m))
    # Phase-1 objective: minimize the sum of artificials; with the artificial
    # basis, reduced costs are -(column sums of A) and the objective is -sum b.
    tab[m, :n] = -a.sum(axis=0)
    tab[m, -1] = -b.sum()

    if not _iterate(tab, basis, n + m):
        raise RuntimeError("phase-1 simplex failed to terminate")
    if -tab[m, -1] > FEAS_TOL:
        return None, None, None

    # Pivot remaining artificials out of the basis where possible.
    drop_rows = []
    for i in range(m):
        if basis[i] >= n:
            piv = np.flatnonzero(np.abs(tab[i, :n]) > PIVOT_TOL)
            if piv.size:
                _pivot(tab, basis, i, int(piv[0]))
            else:
                drop_rows.append(i)  # redundant constraint row
    keep = [i for i in range(m) if i not in drop_rows]
    tab = tab[keep + [m]]
    basis = [basis[i] for i in keep]
    # Remove artificial columns.
    tab = np.delete(tab, np.s_[n:n + m], axis=1)
    return tab, basis, keep


def _phase_two(tab: np.ndarray, basis: list, c: np.ndarray):
    m = tab.shape[0] - 1
    n = c.size
    tab[m, :n] = c
    tab[m, -1] = 0.0
    for i, bv in enumerate(basis):
        if abs(tab[m, bv]) > 0:
            tab[m, :] -= tab[m, bv] * tab[i, :]
    if not _iterate(tab, basis, n):
        return "unbounded", None, None
    x = np.zeros(n)
    for i, bv in enumerate(basis):
        x[bv] = tab[i, -1]
    return "optimal", x, -tab[m, -1]


def _iterate(tab: np.ndarray, basis: list, n_cols: int) -> bool:
    """Run Bland-rule pivots until optimal; False means unbounded."""
    m = tab.shape[0] - 1
    for _ in range(MAX_ITER):
        enter = -1
        for j in range(n_cols):
            if tab[m, j] < -FEAS_TOL:
                enter = j
                break
        if enter < 0:
            return True
        leave = -1
        best = np.inf
        for i in range(m):
            if tab[i, enter] > PIVOT_TOL:
                ratio = tab[i, -1] / tab[i, enter]
                if ratio < best - PIVOT_TOL or (
                    abs(ratio - best) <= PIVOT_TOL
                    and leave >= 0
                    and basis[i] < basis[leave]
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            return False
        _pivot(tab, basis, leave, enter)
    raise RuntimeError("simplex iteration limit exceeded")


def _pivot(tab: np.ndarray, basis: list, row: int, col: int):
    tab[row, :] /= tab[row, col]
    for i in range(tab.shape[0]):
        if i != row and abs(tab[i, col]) > 0:
            tab[i, :] -= tab[i, col] * tab[row, :]
    basis[row] = col
