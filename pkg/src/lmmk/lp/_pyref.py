"""Pure-NumPy simplex inner loops.

This module is the reference twin of the compiled extension
(lmmk.lp._speedups).  Both implement the same two kernels:

  dense_loop          pivot loop of the tableau simplex
  bounded_dual_loop   bounded-variable simplex over the dualized margin form

Every floating-point operation here is elementwise (no dot-product
reductions), and the compiled twin performs the same operations in the same
per-element order, so the two backends produce bit-identical iterates.  Keep
any change mirrored in _speedups.pyx.

Status codes: 0 optimal, 1 unbounded, 2 iteration limit, 3 numerical failure.
"""

from __future__ import annotations

import numpy as np

OPTIMAL_CODE = 0
UNBOUNDED_CODE = 1
ITERATION_CODE = 2
NUMERICAL_CODE = 3


def dense_loop(T, basis, eligible_hi, rc_tol, pivot_tol, bland_from, max_iters):
    """Run simplex pivots on a canonical tableau until a terminal state.

    T has m constraint rows, an objective row at index m, and the rhs in the
    last column.  Only columns below ``eligible_hi`` may enter.  Bland's rule
    replaces Dantzig pricing from iteration ``bland_from`` onward.

    Returns (code, iterations, entering_column) where the column is the one
    that certified unboundedness (-1 otherwise).
    """
    m = T.shape[0] - 1
    last = T.shape[1] - 1
    obj = T[m]
    iters = 0
    while iters < max_iters:
        bland = iters >= bland_from
        # entering column
        if bland:
            cand = np.nonzero(obj[:eligible_hi] < -rc_tol)[0]
            if cand.shape[0] == 0:
                return OPTIMAL_CODE, iters, -1
            col = int(cand[0])
        else:
            col = int(np.argmin(obj[:eligible_hi]))
            if not (obj[col] < -rc_tol):
                return OPTIMAL_CODE, iters, -1
        # ratio test
        colvals = T[:m, col]
        mask = colvals > pivot_tol
        if not mask.any():
            return UNBOUNDED_CODE, iters, col
        ratios = np.full(m, np.inf)
        np.divide(T[:m, last], colvals, out=ratios, where=mask)
        np.maximum(ratios, 0.0, out=ratios)
        rmin = ratios.min()
        if bland:
            tied = np.nonzero(ratios == rmin)[0]
            row = int(tied[np.argmin(basis[tied])])
        else:
            row = int(np.argmax(ratios == rmin))
        # pivot
        piv = T[row, col]
        T[row] /= piv
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row])
        T[:, col] = 0.0
        T[row, col] = 1.0
        basis[row] = col
        iters += 1
    return ITERATION_CODE, iters, -1


def bounded_dual_loop(R, bobj, cR, u, rc_tol, pivot_tol, bland_from, max_iters):
    """Bounded-variable simplex maximizing bobj.y with R^T y + s = cR.

    Variables are the M bounded duals y (0 <= y <= u) followed by d slack
    columns (s >= 0).  The start basis is the slacks, feasible because the
    caller guarantees cR >= 0.  Duals with u <= 0 are frozen at zero.

    Returns (code, iterations, status, basis) where status[i] is 0 at lower
    bound, 1 at upper bound, 2 basic, and basis lists the d basic columns.
    """
    M, d = R.shape
    status = np.zeros(M + d, dtype=np.int8)
    status[M:] = 2
    basis = np.arange(M, M + d, dtype=np.int64)
    Binv = np.eye(d)
    xB = cR.astype(np.float64).copy()
    cB = np.zeros(d)
    eligible = u > 0.0
    iters = 0
    while iters < max_iters:
        bland = iters >= bland_from
        # simplex multipliers pi = cB . Binv, accumulated row by row
        pi = np.zeros(d)
        for i in range(d):
            pi += cB[i] * Binv[i]
        # reduced costs of the y columns, accumulated term by term
        rc = bobj.copy()
        for mcol in range(d):
            rc -= R[:, mcol] * pi[mcol]
        ylow = (status[:M] == 0) & eligible & (rc > rc_tol)
        yupp = (status[:M] == 1) & (rc < -rc_tol)
        viol_y = np.where(ylow, rc, 0.0) + np.where(yupp, -rc, 0.0)
        viol_s = np.where((status[M:] == 0) & (-pi > rc_tol), -pi, 0.0)
        viol = np.concatenate([viol_y, viol_s])
        if bland:
            cand = np.nonzero(viol > 0.0)[0]
            if cand.shape[0] == 0:
                return OPTIMAL_CODE, iters, status, basis
            col = int(cand[0])
        else:
            col = int(np.argmax(viol))
            if not (viol[col] > 0.0):
                return OPTIMAL_CODE, iters, status, basis
        # entering direction
        if col < M:
            from_upper = status[col] == 1
            dirn = -1.0 if from_upper else 1.0
            span = u[col]
            acol = R[col]
            w = np.zeros(d)
            for j in range(d):
                w += Binv[:, j] * acol[j]
        else:
            from_upper = False
            dirn = 1.0
            span = np.inf
            w = Binv[:, col - M].copy()
        # bounded ratio test over the d basic variables
        tbest = span
        leave = -1
        leave_up = False
        for i in range(d):
            dw = dirn * w[i]
            if dw > pivot_tol:
                t = xB[i] / dw
                if t < 0.0:
                    t = 0.0
                take = False
                if t < tbest:
                    take = True
                elif t == tbest:
                    if leave == -1:
                        take = True
                    elif bland and basis[i] < basis[leave]:
                        take = True
                if take:
                    tbest = t
                    leave = i
                    leave_up = False
            elif dw < -pivot_tol:
                bv = basis[i]
                if bv < M and u[bv] < np.inf:
                    t = (xB[i] - u[bv]) / dw
                    if t < 0.0:
                        t = 0.0
                    take = False
                    if t < tbest:
                        take = True
                    elif t == tbest:
                        if leave == -1:
                            take = True
                        elif bland and bv < basis[leave]:
                            take = True
                    if take:
                        tbest = t
                        leave = i
                        leave_up = True
        if leave == -1 and not np.isfinite(tbest):
            return NUMERICAL_CODE, iters, status, basis
        step = tbest * dirn
        xB -= step * w
        if leave == -1:
            # the entering variable runs to its opposite bound
            status[col] = 1 - status[col]
        else:
            lv = basis[leave]
            status[lv] = 1 if leave_up else 0
            if col < M:
                ev = (u[col] - tbest) if from_upper else tbest
            else:
                ev = tbest
            piv = w[leave]
            Binv[leave] /= piv
            factors = w.copy()
            factors[leave] = 0.0
            Binv -= np.outer(factors, Binv[leave])
            basis[leave] = col
            status[col] = 2
            cB[leave] = bobj[col] if col < M else 0.0
            xB[leave] = ev
        iters += 1
    return ITERATION_CODE, iters, status, basis
