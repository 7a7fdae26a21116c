"""The compiled loops must be bit-identical to the pure-python twins."""

import numpy as np
import pytest

from lmmk import lp
from lmmk.lp import _pyref, backend

if not backend.HAVE_COMPILED:
    pytest.skip("compiled extension not built", allow_module_level=True)

from lmmk.lp import _speedups


def random_general(rng):
    V = int(rng.integers(1, 7))
    M = int(rng.integers(1, 10))
    A = rng.integers(-3, 4, size=(M, V)).astype(float)
    b = rng.integers(-3, 4, size=M).astype(float)
    c = rng.integers(-3, 4, size=V).astype(float)
    return lp.LPProblem(c=c, A=A, b=b)


def random_structured(rng):
    T = int(rng.integers(1, 40))
    d = int(rng.integers(1, 8))
    G = rng.normal(size=(T, d))
    A = np.hstack([G, np.eye(T)])
    c = np.concatenate([rng.uniform(0.0, 2.0, size=d), rng.uniform(0.1, 1.0, size=T)])
    return lp.LPProblem(c=c, A=A, b=np.ones(T))


def solve_with(problem, loops, method):
    saved = (backend.dense_loop, backend.bounded_dual_loop)
    backend.dense_loop, backend.bounded_dual_loop = loops
    try:
        return lp.solve(problem, method=method)
    finally:
        backend.dense_loop, backend.bounded_dual_loop = saved


def identical(a: lp.LPSolution, b: lp.LPSolution) -> bool:
    if a.status != b.status or a.n_iterations != b.n_iterations:
        return False
    return (
        a.values.tobytes() == b.values.tobytes()
        and (a.duals is None) == (b.duals is None)
        and (a.duals is None or a.duals.tobytes() == b.duals.tobytes())
    )


PURE = (_pyref.dense_loop, _pyref.bounded_dual_loop)
FAST = (_speedups.dense_loop, _speedups.bounded_dual_loop)


def test_dense_path_bitwise():
    rng = np.random.default_rng(555)
    for _ in range(80):
        prob = random_general(rng)
        a = solve_with(prob, PURE, "dense")
        b = solve_with(prob, FAST, "dense")
        assert identical(a, b), (prob.c, prob.A, prob.b)


def test_dualized_path_bitwise():
    rng = np.random.default_rng(556)
    for _ in range(40):
        prob = random_structured(rng)
        a = solve_with(prob, PURE, "auto")
        b = solve_with(prob, FAST, "auto")
        assert identical(a, b)


def test_loop_codes_match():
    for name in ("OPTIMAL_CODE", "UNBOUNDED_CODE", "ITERATION_CODE", "NUMERICAL_CODE"):
        assert getattr(_pyref, name) == getattr(_speedups, name)
