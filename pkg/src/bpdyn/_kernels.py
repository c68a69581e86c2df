"""Compiled inner loop for long damped runs.

Mirrors ``linalg.weighted_l2_min`` on its Cholesky branch and
``dynamics.physarum_step``; whenever the reference code would leave that
branch (weight spread or a weak pivot) the loop stops and reports it so the
caller can continue with the reference implementation.
"""

import numpy as np
from numba import njit

from .linalg import RCOND, WEIGHT_SPREAD

OK, TARGET, BAIL = 0, 1, 2
_PIVOT = np.sqrt(RCOND)


@njit(cache=True)
def physarum_rows(A, b, y, w, h, xabs, target, nrows, advance_last, out):
    """Record up to ``nrows`` rows into ``out`` (nrows x 8), stepping in place.

    Columns: l1_w, l1_y, energy, b^T L^-1 b, barrier, max ratio, J, residual.
    Returns ``(rows_written, status)``.
    """
    m, n = A.shape
    L = np.empty((m, m))
    z = np.empty(m)
    q = np.empty(n)
    for r in range(nrows):
        wmax = 0.0
        wmin = np.inf
        for k in range(n):
            wmax = max(wmax, w[k])
            wmin = min(wmin, w[k])
        if not (wmin > 0.0) or wmin < WEIGHT_SPREAD * wmax:
            return r, BAIL
        for i in range(m):
            for j in range(i + 1):
                acc = 0.0
                for k in range(n):
                    acc += A[i, k] * w[k] * A[j, k]
                L[i, j] = acc
        dmax = 0.0
        dmin = np.inf
        for j in range(m):
            d = L[j, j]
            for k in range(j):
                d -= L[j, k] * L[j, k]
            if not (d > 0.0):
                return r, BAIL
            d = np.sqrt(d)
            L[j, j] = d
            dmax = max(dmax, d)
            dmin = min(dmin, d)
            for i in range(j + 1, m):
                acc = L[i, j]
                for k in range(j):
                    acc -= L[i, k] * L[j, k]
                L[i, j] = acc / d
        if dmin <= _PIVOT * dmax:
            return r, BAIL
        for i in range(m):
            acc = b[i]
            for k in range(i):
                acc -= L[i, k] * z[k]
            z[i] = acc / L[i, i]
        for i in range(m - 1, -1, -1):
            acc = z[i]
            for k in range(i + 1, m):
                acc -= L[k, i] * z[k]
            z[i] = acc / L[i, i]
        gram = 0.0
        for i in range(m):
            gram += b[i] * z[i]
        l1w = 0.0
        l1y = 0.0
        e = 0.0
        bar = 0.0
        ratio = 0.0
        jy = 0.0
        for k in range(n):
            acc = 0.0
            for i in range(m):
                acc += A[i, k] * z[i]
            q[k] = w[k] * acc
            l1w += w[k]
            l1y += abs(y[k])
            e += q[k] * q[k] / w[k]
            if xabs[k] != 0.0:
                bar += xabs[k] * np.log(w[k])
            ratio = max(ratio, abs(q[k]) / w[k])
            jy += y[k] * y[k] / w[k]
        res = 0.0
        for i in range(m):
            acc = -b[i]
            for k in range(n):
                acc += A[i, k] * y[k]
            res = max(res, abs(acc))
        out[r, 0] = l1w
        out[r, 1] = l1y
        out[r, 2] = e
        out[r, 3] = gram
        out[r, 4] = bar
        out[r, 5] = ratio
        out[r, 6] = jy + l1w
        out[r, 7] = res
        if l1w <= target:
            return r + 1, TARGET
        if r == nrows - 1 and not advance_last:
            return nrows, OK
        for k in range(n):
            w[k] = h * abs(q[k]) + (1.0 - h) * w[k]
            y[k] = (1.0 - h) * y[k] + h * q[k]
    return nrows, OK
