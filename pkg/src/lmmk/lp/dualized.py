"""Structured path for margin-slack programs.

A problem where every row owns a dedicated +1 singleton column (the slack
variable of a margin constraint) and all costs are non-negative has a dual

    maximize  b . y   subject to  R^T y <= c_gen,  0 <= y <= c_slack

with only d general constraints, where R is the block of non-singleton
columns.  The bounded-variable simplex works on a d x d basis, so its cost
per iteration is O(M d) instead of the dense tableau's O(M (V + M)).  The
primal vertex is recovered from the optimal basis by one exact linear solve,
its duals are y itself, and verify() certifies the pair like any other.
"""

from __future__ import annotations

import numpy as np

from . import backend
from .dense import positive_singleton_columns
from .problem import LPProblem, LPSolution, LPStatus

__all__ = ["try_structure", "solve_dualized"]


def try_structure(problem: LPProblem):
    """Return (gen_cols, slack_cols) when the margin-slack shape applies."""
    A, c = problem.A, problem.c
    M, V = A.shape
    if M == 0 or c.min() < 0.0:
        return None
    singles = positive_singleton_columns(A)
    if len(singles) != M:
        return None
    slack_cols = np.array([singles[r] for r in range(M)], dtype=np.int64)
    is_slack = np.zeros(V, dtype=bool)
    is_slack[slack_cols] = True
    gen_cols = np.nonzero(~is_slack)[0]
    return gen_cols, slack_cols


def solve_dualized(
    problem: LPProblem,
    structure,
    max_iters: int,
    rc_tol: float = 1e-8,
    pivot_tol: float = 1e-9,
    bland_after: int | None = None,
):
    """Solve through the bounded dual; returns None on numerical breakdown."""
    gen_cols, slack_cols = structure
    A, b, c = problem.A, problem.b, problem.c
    M, V = A.shape
    d = gen_cols.shape[0]
    if bland_after is None:
        bland_after = 10 * (V + M)

    values = np.zeros(V)
    if d == 0:
        # no general columns: each row is settled by its own slack variable
        values[slack_cols] = np.maximum(b, 0.0)
        y = np.where(b > 0.0, c[slack_cols], 0.0)
        return LPSolution(
            values=values,
            objective=float(np.dot(c, values)),
            status=LPStatus.OPTIMAL,
            duals=y,
            n_iterations=0,
        )

    R = np.ascontiguousarray(A[:, gen_cols])
    cR = np.ascontiguousarray(c[gen_cols])
    u = np.ascontiguousarray(c[slack_cols])
    code, iters, status, basis = backend.bounded_dual_loop(
        R, b, cR, u, rc_tol, pivot_tol, bland_after, max_iters
    )
    if code == backend.NUMERICAL_CODE:
        return None
    if code == backend.ITERATION_CODE:
        # best-effort primal point from the current bound statuses
        beta = np.zeros(d)
        values[gen_cols] = beta
        values[slack_cols] = np.maximum(b, 0.0)
        return LPSolution(
            values=values,
            objective=float(np.dot(c, values)),
            status=LPStatus.ITERATION_LIMIT,
            duals=None,
            n_iterations=iters,
        )

    # exact recovery from the final basis: one clean solve for the primal
    # multipliers and one for the basic dual values
    B = np.empty((d, d))
    cb = np.empty(d)
    for i in range(d):
        col = int(basis[i])
        if col < M:
            B[:, i] = R[col]
            cb[i] = b[col]
        else:
            B[:, i] = 0.0
            B[col - M, i] = 1.0
            cb[i] = 0.0
    try:
        beta = np.linalg.solve(B.T, cb)
        upper = status[:M] == 1
        rhs = cR - (u * upper) @ R
        xb = np.linalg.solve(B, rhs)
    except np.linalg.LinAlgError:
        return None

    y = np.where(upper, u, 0.0)
    in_y = basis < M
    y[basis[in_y]] = xb[in_y]
    y = np.minimum(np.maximum(y, 0.0), u)

    values[gen_cols] = np.maximum(beta, 0.0)
    act = R @ values[gen_cols]
    values[slack_cols] = np.maximum(b - act, 0.0)
    return LPSolution(
        values=values,
        objective=float(np.dot(c, values)),
        status=LPStatus.OPTIMAL,
        duals=y,
        n_iterations=iters,
    )
