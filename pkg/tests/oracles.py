"""Reference computations that share no code with the package."""
import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import linear_sum_assignment


def charpoly_eigenvalues(diag, lower, upper):
    """Eigenvalues of a tridiagonal matrix from its characteristic polynomial.

    ``p_j(x) = (d_j - x) p_{j-1} - l_{j-1} u_{j-1} p_{j-2}`` with coefficient
    arrays in increasing degree, then ``np.roots``.
    """
    d = np.asarray(diag, dtype=complex)
    prev = np.array([1.0 + 0j])
    cur = np.array([d[0], -1.0 + 0j])
    for j in range(1, d.size):
        nxt = P.polymul(cur, [d[j], -1.0])
        nxt = P.polysub(nxt, lower[j - 1] * upper[j - 1] * prev)
        prev, cur = cur, nxt
    return np.roots(cur[::-1])


def random_tridiagonal(rng, n):
    diag = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * 2
    lower = rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1)
    upper = rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1)
    return diag, lower, upper


def match_distance(a, b):
    """Largest distance in the optimal one-to-one matching of two sets."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.size != b.size:
        return np.inf
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def delta_eigenvalue_reference(omega):
    """Eigenvalue of the single-site potential: the root of
    ``k**2 + omega k - 1 = 0`` inside the unit disk, mapped by ``k + 1/k``."""
    roots = np.roots([1.0, omega, -1.0])
    k = roots[np.argmin(np.abs(roots))]
    return complex(k + 1 / k), complex(k)
