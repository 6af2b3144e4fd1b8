"""Compiled inner loops for the spectral and NIMFA fixed-point solvers."""

import numpy as np
from numba import njit


@njit(cache=True)
def power_iteration(a, tol, max_iter):
    """Dominant eigenvalue of symmetric nonnegative ``a`` via ``a + I``.

    Returns ``(lambda_1, iterations, converged)``. Starts from the all-ones
    vector and stops when successive Rayleigh quotients differ by < ``tol``.
    """
    n = a.shape[0]
    x = np.ones(n) / np.sqrt(n)
    y = np.empty(n)
    lam = 0.0
    for it in range(1, max_iter + 1):
        for i in range(n):
            s = x[i]
            for j in range(n):
                s += a[i, j] * x[j]
            y[i] = s
        rq = 0.0
        norm = 0.0
        for i in range(n):
            rq += x[i] * y[i]
            norm += y[i] * y[i]
        norm = np.sqrt(norm)
        for i in range(n):
            x[i] = y[i] / norm
        new = rq - 1.0
        if it > 1 and abs(new - lam) < tol:
            # Rayleigh quotient of the normalised iterate is one step sharper
            rq = 0.0
            for i in range(n):
                s = x[i]
                for j in range(n):
                    s += a[i, j] * x[j]
                rq += x[i] * s
            return rq - 1.0, it, True
        lam = new
    return lam, max_iter, False


@njit(cache=True)
def nimfa_fixed_point(a, tau, v, tol, max_iter):
    """Iterate ``v <- 1 - 1/(1 + tau * a @ v)`` in place.

    Returns ``(iterations, residual, converged)`` where ``residual`` is the
    max-norm defect ``|v - F(v)|`` of the vector left in ``v``.
    """
    n = a.shape[0]
    fv = np.empty(n)
    res = np.inf
    for it in range(1, max_iter + 1):
        res = 0.0
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += a[i, j] * v[j]
            fv[i] = 1.0 - 1.0 / (1.0 + tau * s)
            d = abs(fv[i] - v[i])
            if d > res:
                res = d
        if res < tol:
            return it, res, True
        for i in range(n):
            v[i] = fv[i]
    return max_iter, res, False
