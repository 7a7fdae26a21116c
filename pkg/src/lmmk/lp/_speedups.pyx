# cython: boundscheck=False, wraparound=False, cdivision=True, nonecheck=False
"""Compiled simplex inner loops.

Bit-identical twin of lmmk.lp._pyref: every floating-point operation happens
in the same per-element order (the build also disables FMA contraction), so
swapping backends never changes a single bit of the iterates.  Keep any
change mirrored in _pyref.py.
"""

import numpy as np

from libc.math cimport INFINITY

OPTIMAL_CODE = 0
UNBOUNDED_CODE = 1
ITERATION_CODE = 2
NUMERICAL_CODE = 3


def dense_loop(double[:, ::1] T, long[::1] basis, Py_ssize_t eligible_hi,
               double rc_tol, double pivot_tol, long bland_from, long max_iters):
    cdef Py_ssize_t m = T.shape[0] - 1
    cdef Py_ssize_t ncols = T.shape[1]
    cdef Py_ssize_t last = ncols - 1
    cdef long iters = 0
    cdef bint bland, has, take
    cdef Py_ssize_t col, row, j, r
    cdef double best, piv, rmin, ratio, val, f

    ratios_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] ratios = ratios_arr
    factors_arr = np.empty(m + 1, dtype=np.float64)
    cdef double[::1] factors = factors_arr
    newrow_arr = np.empty(ncols, dtype=np.float64)
    cdef double[::1] newrow = newrow_arr

    while iters < max_iters:
        bland = iters >= bland_from
        # entering column
        col = -1
        if bland:
            for j in range(eligible_hi):
                if T[m, j] < -rc_tol:
                    col = j
                    break
            if col < 0:
                return (OPTIMAL_CODE, iters, -1)
        else:
            best = T[m, 0]
            col = 0
            for j in range(1, eligible_hi):
                if T[m, j] < best:
                    best = T[m, j]
                    col = j
            if not (best < -rc_tol):
                return (OPTIMAL_CODE, iters, -1)
        # ratio test
        has = False
        for r in range(m):
            val = T[r, col]
            if val > pivot_tol:
                ratio = T[r, last] / val
                if ratio < 0.0:
                    ratio = 0.0
                ratios[r] = ratio
                has = True
            else:
                ratios[r] = INFINITY
        if not has:
            return (UNBOUNDED_CODE, iters, col)
        rmin = INFINITY
        for r in range(m):
            if ratios[r] < rmin:
                rmin = ratios[r]
        row = -1
        if bland:
            for r in range(m):
                if ratios[r] == rmin and (row < 0 or basis[r] < basis[row]):
                    row = r
        else:
            for r in range(m):
                if ratios[r] == rmin:
                    row = r
                    break
        # pivot
        piv = T[row, col]
        for j in range(ncols):
            T[row, j] = T[row, j] / piv
        for j in range(ncols):
            newrow[j] = T[row, j]
        for r in range(m + 1):
            factors[r] = T[r, col]
        factors[row] = 0.0
        for r in range(m + 1):
            f = factors[r]
            for j in range(ncols):
                T[r, j] = T[r, j] - f * newrow[j]
        for r in range(m + 1):
            T[r, col] = 0.0
        T[row, col] = 1.0
        basis[row] = col
        iters += 1
    return (ITERATION_CODE, iters, -1)


def bounded_dual_loop(const double[:, ::1] R, const double[::1] bobj,
                      const double[::1] cR, const double[::1] u,
                      double rc_tol, double pivot_tol,
                      long bland_from, long max_iters):
    cdef Py_ssize_t M = R.shape[0]
    cdef Py_ssize_t d = R.shape[1]
    cdef long iters = 0
    cdef bint bland, take, from_upper, leave_up
    cdef Py_ssize_t col, leave, i, j, r, mcol, mslack
    cdef long bv, lv
    cdef double bestv, v, dirn, span, tbest, dw, t, step, ev, piv, f

    status_arr = np.zeros(M + d, dtype=np.int8)
    status_arr[M:] = 2
    basis_arr = np.arange(M, M + d, dtype=np.int64)
    Binv_arr = np.eye(d)
    xB_arr = np.empty(d, dtype=np.float64)
    cB_arr = np.zeros(d)
    cdef signed char[::1] status = status_arr
    cdef long[::1] basis = basis_arr
    cdef double[:, ::1] Binv = Binv_arr
    cdef double[::1] xB = xB_arr
    cdef double[::1] cB = cB_arr
    for i in range(d):
        xB[i] = cR[i]

    pi_arr = np.empty(d, dtype=np.float64)
    rc_arr = np.empty(M, dtype=np.float64)
    w_arr = np.empty(d, dtype=np.float64)
    factors_arr = np.empty(d, dtype=np.float64)
    newrow_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] pi = pi_arr
    cdef double[::1] rc = rc_arr
    cdef double[::1] w = w_arr
    cdef double[::1] factors = factors_arr
    cdef double[::1] newrow = newrow_arr

    while iters < max_iters:
        bland = iters >= bland_from
        # simplex multipliers pi = cB . Binv, accumulated row by row
        for j in range(d):
            pi[j] = 0.0
        for i in range(d):
            for j in range(d):
                pi[j] = pi[j] + cB[i] * Binv[i, j]
        # reduced costs of the y columns, accumulated term by term
        for r in range(M):
            rc[r] = bobj[r]
        for mcol in range(d):
            for r in range(M):
                rc[r] = rc[r] - R[r, mcol] * pi[mcol]
        # entering column
        col = -1
        if bland:
            for r in range(M):
                if status[r] == 0:
                    if u[r] > 0.0 and rc[r] > rc_tol:
                        col = r
                        break
                elif status[r] == 1:
                    if rc[r] < -rc_tol:
                        col = r
                        break
            if col < 0:
                for mslack in range(d):
                    if status[M + mslack] == 0 and -pi[mslack] > rc_tol:
                        col = M + mslack
                        break
            if col < 0:
                return (OPTIMAL_CODE, iters, status_arr, basis_arr)
        else:
            bestv = 0.0
            for r in range(M):
                v = 0.0
                if status[r] == 0:
                    if u[r] > 0.0 and rc[r] > rc_tol:
                        v = rc[r]
                elif status[r] == 1:
                    if rc[r] < -rc_tol:
                        v = -rc[r]
                if v > bestv:
                    bestv = v
                    col = r
            for mslack in range(d):
                if status[M + mslack] == 0:
                    v = -pi[mslack]
                    if v > rc_tol and v > bestv:
                        bestv = v
                        col = M + mslack
            if col < 0:
                return (OPTIMAL_CODE, iters, status_arr, basis_arr)
        # entering direction
        if col < M:
            from_upper = status[col] == 1
            dirn = -1.0 if from_upper else 1.0
            span = u[col]
            for i in range(d):
                w[i] = 0.0
            for j in range(d):
                for i in range(d):
                    w[i] = w[i] + Binv[i, j] * R[col, j]
        else:
            from_upper = False
            dirn = 1.0
            span = INFINITY
            for i in range(d):
                w[i] = Binv[i, col - M]
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
                if bv < M and u[bv] < INFINITY:
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
        if leave == -1 and tbest == INFINITY:
            return (NUMERICAL_CODE, iters, status_arr, basis_arr)
        step = tbest * dirn
        for i in range(d):
            xB[i] = xB[i] - step * w[i]
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
            for j in range(d):
                Binv[leave, j] = Binv[leave, j] / piv
            for j in range(d):
                newrow[j] = Binv[leave, j]
            for i in range(d):
                factors[i] = w[i]
            factors[leave] = 0.0
            for i in range(d):
                f = factors[i]
                for j in range(d):
                    Binv[i, j] = Binv[i, j] - f * newrow[j]
            basis[leave] = col
            status[col] = 2
            cB[leave] = bobj[col] if col < M else 0.0
            xB[leave] = ev
        iters += 1
    return (ITERATION_CODE, iters, status_arr, basis_arr)
