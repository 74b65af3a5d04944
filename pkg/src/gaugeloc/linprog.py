"""Dense two-phase simplex with Bland's rule.

Solves   min c.x   s.t.   a_ub @ x <= b_ub,   a_eq @ x = b_eq,
with every variable nonnegative unless flagged free (free variables are
split internally as x = x+ - x-).  No external solver dependency; problem
sizes here are tiny, so a dense tableau is fine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded" | "iteration_limit"
    x: np.ndarray | None
    objective: float | None
    ray: np.ndarray | None = None  # recession direction in the original variables

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _as_2d(a, n_cols):
    if a is None:
        return np.zeros((0, n_cols))
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return a


def _pivot(tab: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    for r in range(tab.shape[0]):
        if r != row and abs(tab[r, col]) > 0.0:
            tab[r] -= tab[r, col] * tab[row]


def _bland_enter(red: np.ndarray, allowed: int) -> int:
    for j in range(allowed):
        if red[j] < -PIVOT_TOL:
            return j
    return -1


def _ratio_leave(tab: np.ndarray, col: int, basis: list[int]) -> int:
    best_i, best_ratio, best_var = -1, np.inf, -1
    for i in range(tab.shape[0]):
        a = tab[i, col]
        if a > PIVOT_TOL:
            ratio = tab[i, -1] / a
            # Bland ties: smallest basic-variable index leaves.
            if ratio < best_ratio - 1e-12 or (
                abs(ratio - best_ratio) <= 1e-12 and basis[i] < best_var
            ):
                best_i, best_ratio, best_var = i, ratio, basis[i]
    return best_i


def _run_simplex(tab, basis, cost, n_real, max_iter):
    """Iterate on the (m x n+1) tableau; reduced costs recomputed per step."""
    for _ in range(max_iter):
        cb = cost[basis]
        red = cost - cb @ tab[:, :-1]
        col = _bland_enter(red, n_real)
        if col < 0:
            return "optimal"
        row = _ratio_leave(tab, col, basis)
        if row < 0:
            return ("unbounded", col)
        _pivot(tab, row, col)
        basis[row] = col
    return "iteration_limit"


def solve_lp(
    c,
    a_ub=None,
    b_ub=None,
    a_eq=None,
    b_eq=None,
    free=None,
    max_iter=20000,
):
    """Two-phase simplex.  `free` is a boolean mask over variables."""
    c = np.asarray(c, dtype=float)
    n = c.size
    a_ub = _as_2d(a_ub, n)
    a_eq = _as_2d(a_eq, n)
    b_ub = np.zeros(0) if b_ub is None else np.atleast_1d(np.asarray(b_ub, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.atleast_1d(np.asarray(b_eq, dtype=float))
    if free is None:
        free = np.zeros(n, dtype=bool)
    else:
        free = np.asarray(free, dtype=bool)

    # Split free variables: columns = [x (all)] + [x- (free only)].
    free_idx = np.flatnonzero(free)
    n_split = n + free_idx.size
    def widen(mat):
        if mat.shape[0] == 0:
            return np.zeros((0, n_split))
        return np.hstack([mat, -mat[:, free_idx]])

    A_ub, A_eq = widen(a_ub), widen(a_eq)
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # Rows: ub rows get a slack; rows with negative rhs are negated afterwards.
    A = np.zeros((m, n_split + m_ub))
    rhs = np.zeros(m)
    A[:m_ub, :n_split] = A_ub
    A[:m_ub, n_split : n_split + m_ub] = np.eye(m_ub)
    rhs[:m_ub] = b_ub
    A[m_ub:, :n_split] = A_eq
    rhs[m_ub:] = b_eq
    neg = rhs < 0
    A[neg] *= -1.0
    rhs[neg] *= -1.0

    # Basis: slack columns where usable, artificials elsewhere.
    need_art = [i for i in range(m) if i >= m_ub or neg[i]]
    n_base = A.shape[1]
    n_total = n_base + len(need_art)
    tab = np.zeros((m, n_total + 1))
    tab[:, :n_base] = A
    tab[:, -1] = rhs
    basis = [-1] * m
    for i in range(m_ub):
        if not neg[i]:
            basis[i] = n_split + i
    for k, i in enumerate(need_art):
        tab[i, n_base + k] = 1.0
        basis[i] = n_base + k

    # Phase 1: minimize the artificial sum.
    if need_art:
        cost1 = np.zeros(n_total)
        cost1[n_base:] = 1.0
        # Artificials may leave but never re-enter the basis.
        status = _run_simplex(tab, basis, cost1, n_base, max_iter)
        if status == "iteration_limit":
            return LPResult("iteration_limit", None, None)
        phase1 = float(cost1[basis] @ tab[:, -1])
        if phase1 > FEAS_TOL:
            return LPResult("infeasible", None, None)
        # Drive remaining artificials out of the basis (or drop redundant rows).
        for i in range(m):
            if basis[i] >= n_base:
                piv = next(
                    (j for j in range(n_base) if abs(tab[i, j]) > PIVOT_TOL), None
                )
                if piv is not None:
                    _pivot(tab, i, piv)
                    basis[i] = piv
        keep = [i for i in range(m) if basis[i] < n_base]
        tab = np.hstack([tab[keep][:, :n_base], tab[keep][:, -1:]])
        basis = [basis[i] for i in keep]
    else:
        tab = tab[:, : n_base + 1]

    # Phase 2.
    cost2 = np.zeros(n_base)
    cost2[:n] = c
    cost2[n:n_split] = -c[free_idx]
    status = _run_simplex(tab, basis, cost2, n_base, max_iter)

    def extract(vec_len):
        full = np.zeros(vec_len)
        for i, b in enumerate(basis):
            if b < vec_len:
                full[b] = tab[i, -1]
        return full

    if status == "optimal":
        full = extract(n_base)
        x = full[:n].copy()
        x[free_idx] -= full[n:n_split]
        return LPResult("optimal", x, float(c @ x))
    if isinstance(status, tuple):  # unbounded: build recession direction
        col = status[1]
        direction = np.zeros(n_base)
        direction[col] = 1.0
        for i, b in enumerate(basis):
            if b < n_base:
                direction[b] = -tab[i, col]
        ray = direction[:n].copy()
        ray[free_idx] -= direction[n:n_split]
        return LPResult("unbounded", None, None, ray=ray)
    return LPResult("iteration_limit", None, None)


def lp_feasible(a_ub=None, b_ub=None, a_eq=None, b_eq=None, free=None, n=None):
    """Phase-1 feasibility check; returns a feasible point or None."""
    if n is None:
        for mat in (a_ub, a_eq):
            if mat is not None:
                n = np.atleast_2d(np.asarray(mat)).shape[1]
                break
    res = solve_lp(np.zeros(n), a_ub, b_ub, a_eq, b_eq, free=free)
    return res.x if res.ok else None
