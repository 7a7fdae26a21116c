"""Non-negative linear programming: primal simplex with certification.

``solve`` accepts min c.v s.t. A v >= b, v >= 0.  Problems in which every row
carries its own +1 slack column (the margin-slack form the training assembly
emits) are routed through a bounded-variable dual simplex whose basis stays
d x d; everything else runs on the dense two-phase tableau.  Both paths
return a vertex solution with duals that verify() can certify.
"""

from __future__ import annotations

import numpy as np

from .backend import BACKEND_NAME, HAVE_COMPILED
from .dense import solve_dense
from .dualized import solve_dualized, try_structure
from .problem import LPProblem, LPSolution, LPStatus, format_problem
from .verify import VerifyReport, verify

__all__ = [
    "LPProblem",
    "LPSolution",
    "LPStatus",
    "VerifyReport",
    "solve",
    "verify",
    "format_problem",
    "BACKEND_NAME",
    "HAVE_COMPILED",
]


def solve(
    problem: LPProblem,
    max_iters: int | None = None,
    tol: float = 1e-8,
    method: str = "auto",
    pivot_tol: float = 1e-9,
    feas_tol: float = 1e-7,
) -> LPSolution:
    """Solve the program to a certified vertex.

    ``method`` is "auto" (structure detection), "dense", or "dualized".
    ``tol`` is the reduced-cost optimality threshold.  The iteration budget
    defaults to 50*(V+M) and Bland's rule engages after 10*(V+M).
    """
    if method not in ("auto", "dense", "dualized"):
        raise ValueError(f"unknown method {method!r}")
    V = problem.n_vars
    M = problem.n_rows
    if max_iters is None:
        max_iters = 50 * (V + M)
    bland_after = 10 * (V + M)

    if M == 0:
        # only the sign bounds remain
        neg = np.nonzero(problem.c < 0.0)[0]
        if neg.shape[0]:
            ray = np.zeros(V)
            ray[neg[0]] = 1.0
            return LPSolution(
                values=np.zeros(V),
                objective=float("-inf"),
                status=LPStatus.UNBOUNDED,
                duals=np.zeros(0),
                certificate={"ray": ray},
            )
        return LPSolution(
            values=np.zeros(V),
            objective=0.0,
            status=LPStatus.OPTIMAL,
            duals=np.zeros(0),
        )

    if method in ("auto", "dualized"):
        structure = try_structure(problem)
        if structure is not None:
            sol = solve_dualized(
                problem,
                structure,
                max_iters=max_iters,
                rc_tol=tol,
                pivot_tol=pivot_tol,
                bland_after=bland_after,
            )
            if sol is not None:
                return sol
        if method == "dualized":
            raise ValueError("problem does not have the margin-slack structure")
    return solve_dense(
        problem,
        max_iters=max_iters,
        rc_tol=tol,
        pivot_tol=pivot_tol,
        feas_tol=feas_tol,
        bland_after=bland_after,
    )
