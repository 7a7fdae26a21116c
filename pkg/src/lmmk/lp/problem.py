"""Problem and solution containers for non-negative linear programs.

The canonical form is

    minimize    c . v
    subject to  A v >= b,  v >= 0

with dense float64 data.  Solutions carry the dual vector for the M
inequality rows so optimality can be certified independently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = ["LPStatus", "LPProblem", "LPSolution", "format_problem"]


class LPStatus(Enum):
    OPTIMAL = "Optimal"
    UNBOUNDED = "Unbounded"
    INFEASIBLE = "Infeasible"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True)
class LPProblem:
    """min c.v subject to A v >= b, v >= 0."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(np.asarray(self.c, dtype=np.float64)).reshape(-1)
        A = np.ascontiguousarray(np.asarray(self.A, dtype=np.float64))
        b = np.ascontiguousarray(np.asarray(self.b, dtype=np.float64)).reshape(-1)
        if A.ndim != 2:
            raise ValueError("A must be 2-D")
        if c.shape[0] != A.shape[1]:
            raise ValueError(f"cost length {c.shape[0]} != column count {A.shape[1]}")
        if b.shape[0] != A.shape[0]:
            raise ValueError(f"rhs length {b.shape[0]} != row count {A.shape[0]}")
        if c.shape[0] < 1:
            raise ValueError("at least one variable is required")
        for name, arr in (("c", c), ("A", A), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        for arr in (c, A, b):
            arr.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def n_rows(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class LPSolution:
    """Solver output; ``duals`` has one multiplier per inequality row."""

    values: np.ndarray
    objective: float
    status: LPStatus
    duals: np.ndarray | None = None
    n_iterations: int = 0
    certificate: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64)).reshape(-1)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.duals is not None:
            duals = np.ascontiguousarray(np.asarray(self.duals, dtype=np.float64)).reshape(-1)
            duals.setflags(write=False)
            object.__setattr__(self, "duals", duals)


def _term(coef: float, j: int, first: bool) -> str:
    if coef == 0.0 and not first:
        return ""
    sign = "- " if coef < 0 else ("+ " if not first else "")
    mag = abs(coef)
    return f"{sign}{mag:g}*v{j} "


def format_problem(problem: LPProblem) -> str:
    """Plain-text dump with one constraint per line, for debugging."""
    lines = []
    head = "".join(
        _term(float(ci), j, first=(j == 0)) for j, ci in enumerate(problem.c)
    ).strip()
    lines.append(f"minimize {head if head else '0'}")
    lines.append("subject to")
    for r in range(problem.n_rows):
        row = "".join(
            _term(float(a), j, first=(j == 0)) for j, a in enumerate(problem.A[r])
        ).strip()
        lines.append(f"  [{r}] {row if row else '0'} >= {float(problem.b[r]):g}")
    lines.append(f"  v0..v{problem.n_vars - 1} >= 0")
    return "\n".join(lines)
