"""Bounded-variable two-phase simplex kernel.

One flat function so numba can compile it as a unit; ``simplex_kernel_py``
is the plain source and ``simplex_kernel_jit`` the compiled twin (picked in
``lp.py`` via the backend flag).  Dense tableau with an explicitly
maintained basis inverse, Dantzig pricing with a Bland fallback after a
degeneracy stall, periodic refactorization through ``np.linalg.inv``.

Rows are ``A x (sense) b`` with sense codes 0 '=', 1 '<=', 2 '>='; variable
bounds ``lb <= x <= ub`` may be infinite.  Minimization only.

Return codes: 0 optimal, 1 infeasible, 2 unbounded, 3 pivot/iteration
failure.
"""

import numpy as np

# variable states
_AT_LOWER = 0
_AT_UPPER = 1
_FREE = 2
_BASIC = 3


def simplex_kernel_py(c, A, senses, b, lb, ub, tol_opt, max_iter):
    m, n = A.shape
    ntot = n + 2 * m  # structural | slacks | artificials (on demand)

    Aw = np.zeros((m, ntot))
    Aw[:, :n] = A
    lo = np.zeros(ntot)
    hi = np.zeros(ntot)
    lo[:n] = lb
    hi[:n] = ub
    for i in range(m):
        s = senses[i]
        if s == 0:
            lo[n + i] = 0.0
            hi[n + i] = 0.0
        elif s == 1:
            lo[n + i] = 0.0
            hi[n + i] = np.inf
        else:
            lo[n + i] = -np.inf
            hi[n + i] = 0.0
        Aw[i, n + i] = 1.0

    xval = np.zeros(ntot)
    vstat = np.zeros(ntot, dtype=np.int64)
    for j in range(n):
        if lo[j] == -np.inf and hi[j] == np.inf:
            vstat[j] = _FREE
            xval[j] = 0.0
        elif lo[j] == -np.inf:
            vstat[j] = _AT_UPPER
            xval[j] = hi[j]
        else:
            vstat[j] = _AT_LOWER
            xval[j] = lo[j]

    basis = np.empty(m, dtype=np.int64)
    Binv = np.zeros((m, m))
    r = b - np.dot(A, np.ascontiguousarray(xval[:n]))
    nart = 0
    art_used = np.zeros(m, dtype=np.int64)
    for i in range(m):
        sl = n + i
        if lo[sl] - 1e-12 <= r[i] <= hi[sl] + 1e-12:
            v = r[i]
            if v < lo[sl]:
                v = lo[sl]
            if v > hi[sl]:
                v = hi[sl]
            basis[i] = sl
            vstat[sl] = _BASIC
            xval[sl] = v
            Binv[i, i] = 1.0
        else:
            if r[i] > hi[sl]:
                xval[sl] = hi[sl]
                vstat[sl] = _AT_UPPER
            else:
                xval[sl] = lo[sl]
                vstat[sl] = _AT_LOWER
            res = r[i] - xval[sl]
            col = n + m + i
            sgn = 1.0 if res >= 0.0 else -1.0
            Aw[i, col] = sgn
            lo[col] = 0.0
            hi[col] = np.inf
            xval[col] = res * sgn
            vstat[col] = _BASIC
            basis[i] = col
            Binv[i, i] = sgn
            art_used[i] = 1
            nart += 1

    cost1 = np.zeros(ntot)
    cost2 = np.zeros(ntot)
    cost2[:n] = c
    for i in range(m):
        if art_used[i] == 1:
            cost1[n + m + i] = 1.0

    bmax = 0.0
    for i in range(m):
        if abs(b[i]) > bmax:
            bmax = abs(b[i])
    feas1 = 1e-7 * (1.0 + bmax)

    status = 0
    iters = 0
    for phase in range(2):
        if phase == 0 and nart == 0:
            continue
        if phase == 0:
            cost = cost1
        else:
            cost = cost2
        bland = False
        stall = 0
        while True:
            if iters >= max_iter:
                status = 3
                break
            iters += 1

            if iters % 128 == 0:
                # refactorize to shed accumulated pivot error
                B = np.empty((m, m))
                for i in range(m):
                    B[:, i] = Aw[:, basis[i]]
                Binv = np.ascontiguousarray(np.linalg.inv(B))
                rhs = b.copy()
                for j in range(ntot):
                    if vstat[j] != _BASIC and xval[j] != 0.0:
                        rhs -= Aw[:, j] * xval[j]
                xb = np.dot(Binv, np.ascontiguousarray(rhs))
                for i in range(m):
                    xval[basis[i]] = xb[i]

            cB = np.empty(m)
            for i in range(m):
                cB[i] = cost[basis[i]]
            y = np.dot(cB, Binv)
            d = cost - np.dot(y, Aw)

            q = -1
            tdir = 0.0
            if bland:
                for j in range(ntot):
                    vs = vstat[j]
                    if vs == _BASIC:
                        continue
                    if vs != _FREE and hi[j] - lo[j] <= 0.0:
                        continue
                    dj = d[j]
                    if vs == _AT_LOWER and dj < -tol_opt:
                        q = j
                        tdir = 1.0
                        break
                    if vs == _AT_UPPER and dj > tol_opt:
                        q = j
                        tdir = -1.0
                        break
                    if vs == _FREE and abs(dj) > tol_opt:
                        q = j
                        tdir = 1.0 if dj < 0.0 else -1.0
                        break
            else:
                best = tol_opt
                for j in range(ntot):
                    vs = vstat[j]
                    if vs == _BASIC:
                        continue
                    if vs != _FREE and hi[j] - lo[j] <= 0.0:
                        continue
                    dj = d[j]
                    if vs == _AT_LOWER:
                        score = -dj
                        dirj = 1.0
                    elif vs == _AT_UPPER:
                        score = dj
                        dirj = -1.0
                    else:
                        score = abs(dj)
                        dirj = 1.0 if dj < 0.0 else -1.0
                    if score > best:
                        best = score
                        q = j
                        tdir = dirj

            if q == -1:
                # phase optimal; leave the loop with a clean recompute
                B = np.empty((m, m))
                for i in range(m):
                    B[:, i] = Aw[:, basis[i]]
                Binv = np.ascontiguousarray(np.linalg.inv(B))
                rhs = b.copy()
                for j in range(ntot):
                    if vstat[j] != _BASIC and xval[j] != 0.0:
                        rhs -= Aw[:, j] * xval[j]
                xb = np.dot(Binv, np.ascontiguousarray(rhs))
                for i in range(m):
                    xval[basis[i]] = xb[i]
                break

            w = np.dot(Binv, np.ascontiguousarray(Aw[:, q]))

            flipd = np.inf
            if vstat[q] != _FREE:
                flipd = hi[q] - lo[q]

            # two-pass ratio test: the first pass finds the strict minimum
            # ratio and a slackened bound on it; the second picks the row
            # with the largest pivot among rows whose true ratio stays
            # within the slack, trading a <= feas bound violation for a
            # well-conditioned basis
            feas = 1e-9
            row_rmin = np.inf
            theta_max = np.inf
            for i in range(m):
                e = -tdir * w[i]
                if e > 1e-10:
                    cap = hi[basis[i]] - xval[basis[i]]
                    if cap < 0.0:
                        cap = 0.0
                    ae = e
                elif e < -1e-10:
                    cap = xval[basis[i]] - lo[basis[i]]
                    if cap < 0.0:
                        cap = 0.0
                    ae = -e
                else:
                    continue
                ratio = cap / ae
                if ratio < row_rmin:
                    row_rmin = ratio
                slack = (cap + feas) / ae
                if slack < theta_max:
                    theta_max = slack

            if flipd == np.inf and row_rmin == np.inf:
                status = 2 if phase == 1 else 3
                break

            if flipd <= row_rmin:
                # bound flip, basis unchanged
                step = flipd
                for i in range(m):
                    xval[basis[i]] -= tdir * step * w[i]
                if vstat[q] == _AT_LOWER:
                    xval[q] = hi[q]
                    vstat[q] = _AT_UPPER
                else:
                    xval[q] = lo[q]
                    vstat[q] = _AT_LOWER
            else:
                # Bland mode keeps the strict lowest-index rule its cycling
                # guarantee needs; otherwise any row within the slack is
                # eligible and pivot size decides
                tie = 1e-9 * (1.0 + row_rmin)
                if bland:
                    limit_r = row_rmin + tie
                else:
                    # the step may not exceed the entering variable's own
                    # range, or it would overshoot its opposite bound
                    limit_r = theta_max if theta_max < flipd else flipd
                rrow = -1
                piv_best = 0.0
                low_idx = np.int64(ntot + 1)
                step = row_rmin
                for i in range(m):
                    e = -tdir * w[i]
                    if e > 1e-10:
                        cap = hi[basis[i]] - xval[basis[i]]
                        if cap < 0.0:
                            cap = 0.0
                        ratio = cap / e
                    elif e < -1e-10:
                        cap = xval[basis[i]] - lo[basis[i]]
                        if cap < 0.0:
                            cap = 0.0
                        ratio = cap / (-e)
                    else:
                        continue
                    if ratio <= limit_r:
                        if bland:
                            if basis[i] < low_idx:
                                low_idx = basis[i]
                                rrow = i
                        else:
                            if abs(w[i]) > piv_best:
                                piv_best = abs(w[i])
                                rrow = i
                                step = ratio
                piv = w[rrow]
                newval = xval[q] + tdir * step
                for i in range(m):
                    xval[basis[i]] -= tdir * step * w[i]
                lv = basis[rrow]
                # snap the leaving variable onto the bound it hit
                dl = abs(xval[lv] - lo[lv]) if lo[lv] > -np.inf else np.inf
                du = abs(xval[lv] - hi[lv]) if hi[lv] < np.inf else np.inf
                if dl <= du:
                    xval[lv] = lo[lv]
                    vstat[lv] = _AT_LOWER
                else:
                    xval[lv] = hi[lv]
                    vstat[lv] = _AT_UPPER
                basis[rrow] = q
                vstat[q] = _BASIC
                xval[q] = newval
                inv_piv = 1.0 / piv
                Binv[rrow, :] *= inv_piv
                for i in range(m):
                    if i != rrow:
                        f = w[i]
                        if f != 0.0:
                            Binv[i, :] -= f * Binv[rrow, :]

            if step <= 1e-12:
                stall += 1
                if stall >= 25:
                    bland = True
            else:
                stall = 0
                bland = False

        if status != 0:
            break
        if phase == 0:
            p1 = 0.0
            for i in range(m):
                if art_used[i] == 1:
                    p1 += xval[n + m + i]
            if p1 > feas1:
                status = 1
                break
            for i in range(m):
                if art_used[i] == 1:
                    col = n + m + i
                    lo[col] = 0.0
                    hi[col] = 0.0

    x = np.empty(n)
    for j in range(n):
        v = xval[j]
        if lb[j] > -np.inf and v < lb[j]:
            v = lb[j]
        if ub[j] < np.inf and v > ub[j]:
            v = ub[j]
        x[j] = v
    y_out = np.zeros(m)
    dred = np.zeros(n)
    obj = np.nan
    if status == 0:
        cB = np.empty(m)
        for i in range(m):
            cB[i] = cost2[basis[i]]
        y_out = np.dot(cB, Binv)
        dfull = cost2 - np.dot(y_out, Aw)
        dred = dfull[:n].copy()
        obj = np.dot(c, x)
    return status, x, y_out, dred, obj, iters


simplex_kernel_jit = None
try:
    from numba import njit

    simplex_kernel_jit = njit(cache=True, nogil=True)(simplex_kernel_py)
except ImportError:
    pass
