"""Two-phase primal simplex on the slack-augmented dense tableau.

Rows with b <= 0 start from their surplus column; rows with b > 0 start from
a positive singleton column of A when one exists (the margin-slack pattern)
and otherwise receive a phase-1 artificial.  Bland's rule replaces Dantzig
pricing after 10*(V+M) iterations to rule out cycling.
"""

from __future__ import annotations

import numpy as np

from . import backend
from .problem import LPProblem, LPSolution, LPStatus
from ..errors import SolverError

__all__ = ["solve_dense", "positive_singleton_columns"]


def positive_singleton_columns(A: np.ndarray) -> dict[int, int]:
    """Map row -> column for columns whose only nonzero is that row.

    Only coefficients that are exactly +1 qualify, which is the shape the
    margin-slack assembly produces.  The smallest qualifying column wins.
    """
    mask = A != 0.0
    nnz = mask.sum(axis=0)
    out: dict[int, int] = {}
    for j in np.nonzero(nnz == 1)[0]:
        r = int(np.argmax(mask[:, j]))
        if A[r, j] == 1.0 and r not in out:
            out[r] = int(j)
    return out


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int):
    # Same arithmetic as the backend loop pivot; used for artificial purging.
    piv = T[row, col]
    T[row] /= piv
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    T[:, col] = 0.0
    T[row, col] = 1.0
    basis[row] = col


def _extract_values(T: np.ndarray, basis: np.ndarray, n_vars: int) -> np.ndarray:
    last = T.shape[1] - 1
    x = np.zeros(n_vars)
    in_x = basis < n_vars
    x[basis[in_x]] = T[np.nonzero(in_x)[0], last]
    return np.maximum(x, 0.0)


def solve_dense(
    problem: LPProblem,
    max_iters: int,
    rc_tol: float = 1e-8,
    pivot_tol: float = 1e-9,
    feas_tol: float = 1e-7,
    bland_after: int | None = None,
) -> LPSolution:
    A, b, c = problem.A, problem.b, problem.c
    M, V = A.shape
    if bland_after is None:
        bland_after = 10 * (V + M)

    flip = b <= 0.0
    singles = positive_singleton_columns(A)
    art_rows = [r for r in range(M) if (not flip[r]) and r not in singles]
    K = len(art_rows)
    ncols = V + M + K + 1
    last = ncols - 1

    T = np.zeros((M + 1, ncols))
    basis = np.empty(M, dtype=np.int64)
    T[:M, :V] = np.where(flip[:, None], -A, A)
    T[:M, last] = np.where(flip, -b, b)
    # surplus columns: A v - s = b, negated alongside the row when flipped
    scol = np.arange(M)
    T[scol, V + scol] = np.where(flip, 1.0, -1.0)
    for r in range(M):
        if flip[r]:
            basis[r] = V + r
        elif r in singles:
            basis[r] = singles[r]
        else:
            basis[r] = 0  # placeholder, set below
    for k, r in enumerate(art_rows):
        T[r, V + M + k] = 1.0
        basis[r] = V + M + k
    # -0.0 in the rhs of flipped zero rows is cosmetic; normalize it
    rhs = T[:M, last]
    rhs[rhs == 0.0] = 0.0

    eligible_hi = V + M
    iters_used = 0

    if K:
        obj1 = np.zeros(ncols)
        obj1[V + M : V + M + K] = 1.0
        obj1 -= T[art_rows].sum(axis=0)
        T[M] = obj1
        code, it1, _ = backend.dense_loop(
            T, basis, eligible_hi, rc_tol, pivot_tol, bland_after, max_iters
        )
        iters_used += it1
        if code == backend.ITERATION_CODE:
            return LPSolution(
                values=_extract_values(T, basis, V),
                objective=float(np.dot(c, _extract_values(T, basis, V))),
                status=LPStatus.ITERATION_LIMIT,
                duals=None,
                n_iterations=iters_used,
            )
        if code == backend.UNBOUNDED_CODE:
            raise SolverError("phase-1 objective cannot be unbounded; numerical breakdown")
        phase1 = -T[M, last]
        if phase1 > feas_tol:
            farkas = np.maximum(T[M, V : V + M].copy(), 0.0)
            values = _extract_values(T, basis, V)
            return LPSolution(
                values=values,
                objective=float("nan"),
                status=LPStatus.INFEASIBLE,
                duals=None,
                n_iterations=iters_used,
                certificate={"farkas": farkas, "phase1_objective": float(phase1)},
            )
        # drive any degenerate artificials out of the basis
        for r in range(M):
            if basis[r] >= V + M:
                row = T[r, : V + M]
                cols = np.nonzero(np.abs(row) > pivot_tol)[0]
                if cols.shape[0]:
                    _pivot(T, basis, r, int(cols[0]))
                # else: the row is redundant; the artificial stays basic at 0

    obj2 = np.zeros(ncols)
    obj2[:V] = c
    for r in range(M):
        bv = basis[r]
        if bv < V and c[bv] != 0.0:
            obj2 -= c[bv] * T[r]
    T[M] = obj2

    code, it2, ucol = backend.dense_loop(
        T,
        basis,
        eligible_hi,
        rc_tol,
        pivot_tol,
        max(0, bland_after - iters_used),
        max_iters - iters_used,
    )
    iters_used += it2
    values = _extract_values(T, basis, V)

    if code == backend.UNBOUNDED_CODE:
        ray = np.zeros(V)
        if ucol < V:
            ray[ucol] = 1.0
        in_x = basis < V
        ray[basis[in_x]] = -T[np.nonzero(in_x)[0], ucol]
        ray = np.maximum(ray, 0.0)
        return LPSolution(
            values=values,
            objective=float("-inf"),
            status=LPStatus.UNBOUNDED,
            duals=None,
            n_iterations=iters_used,
            certificate={"ray": ray},
        )
    if code == backend.ITERATION_CODE:
        return LPSolution(
            values=values,
            objective=float(np.dot(c, values)),
            status=LPStatus.ITERATION_LIMIT,
            duals=None,
            n_iterations=iters_used,
        )
    duals = np.maximum(T[M, V : V + M].copy(), 0.0)
    return LPSolution(
        values=values,
        objective=float(np.dot(c, values)),
        status=LPStatus.OPTIMAL,
        duals=duals,
        n_iterations=iters_used,
    )
