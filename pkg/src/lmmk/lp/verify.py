"""Independent certification of a solved program.

A primal-dual pair certifies optimality when the primal point is feasible,
the duals are feasible for the dual program, every complementary-slackness
product vanishes, and the objective gap closes.  All residuals are reported
so a near-miss is visible, not just a boolean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import LPProblem, LPSolution

__all__ = ["VerifyReport", "verify"]


@dataclass(frozen=True)
class VerifyReport:
    primal_violation: float      # max over rows of (b - A v)+
    bound_violation: float       # max over variables of (-v)+
    dual_violation: float        # max of (A^T y - c)+ and (-y)+
    complementarity: float       # max |y_r * slack_r| and |v_j * rc_j|
    duality_gap: float           # |c.v - b.y|
    tol: float

    @property
    def passed(self) -> bool:
        return (
            self.primal_violation <= self.tol
            and self.bound_violation <= self.tol
            and self.dual_violation <= self.tol
            and self.complementarity <= self.tol
            and self.duality_gap <= self.tol
        )


def verify(problem: LPProblem, solution: LPSolution, tol: float = 1e-6) -> VerifyReport:
    if solution.duals is None:
        raise ValueError("verification needs the dual vector; solution.duals is None")
    v = solution.values
    y = solution.duals
    A, b, c = problem.A, problem.b, problem.c

    slack = A @ v - b
    rc = c - A.T @ y
    primal_violation = float(np.maximum(-slack, 0.0).max(initial=0.0))
    bound_violation = float(np.maximum(-v, 0.0).max(initial=0.0))
    dual_violation = float(
        max(
            np.maximum(-rc, 0.0).max(initial=0.0),
            np.maximum(-y, 0.0).max(initial=0.0),
        )
    )
    complementarity = float(
        max(
            np.abs(y * slack).max(initial=0.0),
            np.abs(v * rc).max(initial=0.0),
        )
    )
    duality_gap = float(abs(float(np.dot(c, v)) - float(np.dot(b, y))))
    return VerifyReport(
        primal_violation=primal_violation,
        bound_violation=bound_violation,
        dual_violation=dual_violation,
        complementarity=complementarity,
        duality_gap=duality_gap,
        tol=tol,
    )
