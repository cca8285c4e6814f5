"""Compiled kernels for complex tridiagonal matrices.

``cs_ql`` is the implicit QL iteration with Wilkinson-type shifts carried out
in complex arithmetic with complex-orthogonal rotations (``c**2 + s**2 = 1``,
no conjugation). It keeps a complex *symmetric* tridiagonal matrix
tridiagonal, so the cost is O(N) per sweep and O(N**2) overall. The
rotations are not unitary; callers check residuals and fall back to a dense
solver when they are poor.
"""
import cmath

import numpy as np
from numba import njit

EPS = 2.220446049250313e-16


@njit(cache=True)
def cs_ql(d, e, maxit):
    """Eigenvalues of the symmetric tridiagonal matrix with diagonal ``d`` and
    off-diagonal ``e[:n-1]`` (``e`` has length ``n``; ``e[n-1]`` is ignored).

    Works in place on copies; returns ``(eigenvalues, iterations)`` where
    ``iterations[l] = -1`` marks an eigenvalue that did not converge within
    ``maxit`` sweeps.
    """
    n = d.size
    d = d.copy()
    e = e.copy()
    e[n - 1] = 0.0
    its = np.zeros(n, np.int64)
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd or (dd == 0.0 and e[m] == 0.0):
                    break
                m += 1
            if m == l:
                break
            if it >= maxit:
                its[l] = -1
                break
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = cmath.sqrt(g * g + 1.0)
            if abs(g - r) > abs(g + r):
                r = -r
            shift = d[l] - e[l] / (g + r)
            if it % 12 == 0:
                # exceptional shift to break cycles
                shift = shift + abs(e[l]) * (0.75 + 0.5j)
            g = d[m] - shift
            s = 1.0 + 0.0j
            c = 1.0 + 0.0j
            p = 0.0 + 0.0j
            restarted = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = cmath.sqrt(f * f + g * g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    restarted = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if restarted:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
        if its[l] == 0:
            its[l] = it
    return d, its


@njit(cache=True)
def _solve_shifted(diag, lower, upper, lam, rhs, tiny):
    """Solve ``(T - lam I) x = rhs`` for tridiagonal ``T`` by Gaussian
    elimination with partial pivoting; zero pivots are replaced by ``tiny``."""
    n = diag.size
    # U has up to two superdiagonals after pivoting
    u0 = np.empty(n, np.complex128)
    u1 = np.zeros(n, np.complex128)
    u2 = np.zeros(n, np.complex128)
    x = rhs.copy()
    for j in range(n):
        u0[j] = diag[j] - lam
    for j in range(n - 1):
        u1[j] = upper[j]
    sub = lower.copy()
    for j in range(n - 1):
        if abs(sub[j]) > abs(u0[j]):
            # swap rows j and j+1
            a0, a1, a2 = u0[j], u1[j], u2[j]
            b0 = sub[j]
            b1 = u0[j + 1]
            b2 = u1[j + 1]
            u0[j], u1[j], u2[j] = b0, b1, b2
            t = x[j]
            x[j] = x[j + 1]
            x[j + 1] = t
            mult = a0 / b0
            u0[j + 1] = a1 - mult * b1
            u1[j + 1] = a2 - mult * b2
            x[j + 1] -= mult * x[j]
        else:
            piv = u0[j]
            if piv == 0.0:
                piv = tiny
                u0[j] = tiny
            mult = sub[j] / piv
            u0[j + 1] -= mult * u1[j]
            x[j + 1] -= mult * x[j]
    if u0[n - 1] == 0.0:
        u0[n - 1] = tiny
    x[n - 1] /= u0[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - u1[n - 2] * x[n - 1]) / u0[n - 2]
    for j in range(n - 3, -1, -1):
        x[j] = (x[j] - u1[j] * x[j + 1] - u2[j] * x[j + 2]) / u0[j]
    return x


@njit(cache=True)
def _apply_shifted(diag, lower, upper, lam, x):
    n = diag.size
    y = np.empty(n, np.complex128)
    for j in range(n):
        y[j] = (diag[j] - lam) * x[j]
        if j > 0:
            y[j] += lower[j - 1] * x[j - 1]
        if j < n - 1:
            y[j] += upper[j] * x[j + 1]
    return y


@njit(cache=True)
def residuals(diag, lower, upper, lams, steps):
    """Relative residual ``||(T - lam)x|| / (||T||_inf ||x||)`` for each ``lam``,
    with ``x`` from ``steps`` rounds of inverse iteration (best round kept)."""
    n = diag.size
    norm = 0.0
    for j in range(n):
        row = abs(diag[j])
        if j > 0:
            row += abs(lower[j - 1])
        if j < n - 1:
            row += abs(upper[j])
        if row > norm:
            norm = row
    if norm == 0.0:
        norm = 1.0
    tiny = EPS * norm
    out = np.empty(lams.size, np.float64)
    start = np.empty(n, np.complex128)
    for j in range(n):
        # fixed, non-symmetric start vector
        start[j] = 1.0 + 0.5j * np.sin(0.7 * j + 0.3)
    for idx in range(lams.size):
        lam = lams[idx]
        x = start / np.sqrt(np.sum(np.abs(start) ** 2))
        best = np.inf
        for _ in range(steps):
            x = _solve_shifted(diag, lower, upper, lam, x, tiny)
            nx = np.sqrt(np.sum(np.abs(x) ** 2))
            if not np.isfinite(nx) or nx == 0.0:
                break
            x = x / nx
            y = _apply_shifted(diag, lower, upper, lam, x)
            res = np.sqrt(np.sum(np.abs(y) ** 2)) / norm
            if res < best:
                best = res
        out[idx] = best
    return out
