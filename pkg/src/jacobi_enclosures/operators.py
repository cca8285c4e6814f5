"""Finite sections of the Jacobi operator, the free resolvent and the
Birman–Schwinger matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from . import _tridiag
from .domain import PotentialSpec, complex_pairs, dist_to_band, inverse_joukowsky

RESIDUAL_TOL = 1e-8
MAX_SECTION = 16384
QL_MAXIT = 60
INVERSE_STEPS = 3

DEFAULT_DELTA = 0.05
DEFAULT_EPS = 1e-4

SVD_MAX_DIM = 64
POWER_RTOL = 1e-12
POWER_MAXIT = 100_000


def canonical_order(z: np.ndarray) -> np.ndarray:
    """Indices sorting complex values by real part, then imaginary part."""
    z = np.asarray(z, dtype=complex)
    return np.lexsort((z.imag, z.real))


# --------------------------------------------------------------------------
# spectra
# --------------------------------------------------------------------------

@dataclass
class SpectrumResult:
    """Eigenvalue approximations with per-eigenvalue quality data.

    ``residuals[j]`` is a relative backward-error estimate for
    ``eigenvalues[j]``; ``converged[j]`` is False when the iteration cap was hit
    or the residual exceeds the tolerance (such values are still reported).
    """

    eigenvalues: np.ndarray
    residuals: np.ndarray
    method: str
    section_size: int | None = None
    converged: np.ndarray | None = None
    warnings: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=complex)
        self.residuals = np.asarray(self.residuals, dtype=float)
        if self.converged is None:
            self.converged = np.ones(self.eigenvalues.size, dtype=bool)
        self.converged = np.asarray(self.converged, dtype=bool)

    def __len__(self) -> int:
        return self.eigenvalues.size

    def to_dict(self) -> dict:
        d = {
            "method": self.method,
            "section_size": self.section_size,
            "eigenvalues": complex_pairs(self.eigenvalues),
            "residuals": [float(r) for r in self.residuals],
        }
        if not np.all(self.converged):
            d["converged"] = [bool(c) for c in self.converged]
        if self.warnings:
            d["warnings"] = list(self.warnings)
        for key, val in self.extra.items():
            if isinstance(val, np.ndarray):
                val = complex_pairs(val) if np.iscomplexobj(val) else val.tolist()
            d[key] = val
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumResult":
        ev = np.array([complex(a, b) for a, b in d["eigenvalues"]], dtype=complex)
        return cls(
            eigenvalues=ev,
            residuals=np.array(d["residuals"], dtype=float),
            method=d["method"],
            section_size=d.get("section_size"),
            converged=d.get("converged"),
            warnings=list(d.get("warnings", [])),
        )


@dataclass
class JacobiSection:
    """N×N truncation of the Jacobi operator: complex diagonal, unit off-diagonals.

    ``first_site`` is the lattice index of row 0.
    """

    diagonal: np.ndarray
    first_site: int = 0

    def __post_init__(self) -> None:
        self.diagonal = np.ascontiguousarray(self.diagonal, dtype=complex).ravel()
        if self.diagonal.size == 0:
            raise ValueError("section must have size >= 1")

    @property
    def size(self) -> int:
        return self.diagonal.size

    @classmethod
    def from_potential(cls, v: PotentialSpec, N: int) -> "JacobiSection":
        """Section of size ``N`` centred on the potential's stored window."""
        N = int(N)
        if N < len(v):
            raise ValueError(f"section size {N} is smaller than the potential window {len(v)}")
        start = (v.offset + v.last) // 2 - (N - 1) // 2
        start = min(max(start, v.last - N + 1), v.offset)
        diag = np.zeros(N, dtype=complex)
        diag[v.offset - start:v.offset - start + len(v)] = v.values
        return cls(diag, start)

    def dense(self) -> np.ndarray:
        N = self.size
        H = np.diag(self.diagonal)
        if N > 1:
            idx = np.arange(N - 1)
            H[idx, idx + 1] = 1.0
            H[idx + 1, idx] = 1.0
        return H


def tridiagonal_eigvals(diag, lower, upper, tol: float = RESIDUAL_TOL,
                        with_residuals: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[str]]:
    """All eigenvalues of a general complex tridiagonal matrix.

    The matrix is made complex symmetric by a diagonal similarity
    (off-diagonal ``sqrt(lower*upper)``) and handed to the QL kernel. If any
    eigenvalue fails to converge or has residual above ``tol``, the dense
    LAPACK solver is used instead and the event is recorded in the warnings.

    Returns
    -------
    eigenvalues, residuals, converged, warnings
    """
    diag = np.ascontiguousarray(diag, dtype=complex)
    lower = np.ascontiguousarray(lower, dtype=complex)
    upper = np.ascontiguousarray(upper, dtype=complex)
    n = diag.size
    if n == 0:
        raise ValueError("empty matrix")
    if lower.size != n - 1 or upper.size != n - 1:
        raise ValueError("off-diagonals must have length n - 1")
    if n > MAX_SECTION:
        raise ValueError(f"size {n} exceeds the supported maximum {MAX_SECTION}")
    if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise ValueError("matrix entries must be finite")
    warnings: list[str] = []
    e = np.zeros(n, dtype=complex)
    e[:n - 1] = np.sqrt(lower * upper)
    lam, its = _tridiag.cs_ql(diag, e, QL_MAXIT)
    ok = its >= 0
    if with_residuals:
        res = _tridiag.residuals(diag, lower, upper, lam, INVERSE_STEPS)
        ok &= res <= tol
    else:
        res = np.full(n, np.nan)
    if not np.all(ok):
        warnings.append(f"QL: {int(np.count_nonzero(~ok))} eigenvalue(s) unconverged or above "
                        f"tolerance; recomputed with dense LAPACK")
        T = np.diag(diag)
        if n > 1:
            T += np.diag(lower, -1) + np.diag(upper, 1)
        lam = scipy.linalg.eigvals(T)
        res = _tridiag.residuals(diag, lower, upper, lam, INVERSE_STEPS)
        ok = res <= tol
        if not np.all(ok):
            warnings.append(f"{int(np.count_nonzero(~ok))} eigenvalue(s) above residual tolerance {tol:g}")
    order = canonical_order(lam)
    return lam[order], res[order], ok[order], warnings


def tridiagonal_eigenvalues(H: JacobiSection, tol: float = RESIDUAL_TOL) -> SpectrumResult:
    """All eigenvalues of a finite section, with residuals."""
    off = np.ones(H.size - 1, dtype=complex)
    lam, res, ok, warnings = tridiagonal_eigvals(H.diagonal, off, off, tol)
    return SpectrumResult(lam, res, "finite-section", H.size, ok, warnings)


def section_size_for(v: PotentialSpec, delta: float = DEFAULT_DELTA, target: float = 1e-9) -> int:
    """Section size at which truncation errors of eigenvalues with band
    distance above ``delta`` are expected to fall below ``target``.

    Eigenvectors decay like ``|k|**n`` away from the support, and the slowest
    decay at band distance ``delta`` occurs at ``lam = i*delta``.
    """
    kmax = abs(inverse_joukowsky(1j * delta))
    pad = math.ceil(math.log(target) / math.log(kmax))
    return max(4 * len(v), len(v) + pad)


def stable_discrete_eigenvalues(v: PotentialSpec, N: int | None = None,
                                delta: float = DEFAULT_DELTA, eps: float = DEFAULT_EPS,
                                tol: float = RESIDUAL_TOL) -> SpectrumResult:
    """Eigenvalues of the size-``N`` section lying farther than ``delta`` from
    [-2, 2] that reappear, within ``eps``, in the size-``2N`` section.

    Band discretisation artifacts move with ``N``; genuine discrete
    eigenvalues do not. The matching ``2N`` values are in
    ``extra["partners"]`` and their residuals in ``extra["partner_residuals"]``.
    """
    if N is None:
        N = section_size_for(v, delta)
    N = int(N)
    if delta <= 0 or eps <= 0:
        raise ValueError("delta and eps must be positive")
    sec1 = JacobiSection.from_potential(v, N)
    sec2 = JacobiSection.from_potential(v, 2 * N)
    empty = SpectrumResult([], [], "finite-section", N,
                           extra={"partners": np.empty(0, complex), "partner_residuals": []})
    if v.is_zero():
        return empty

    def off_band(sec: JacobiSection, cutoff: float):
        off = np.ones(sec.size - 1, dtype=complex)
        lam, _, ok, warnings = tridiagonal_eigvals(sec.diagonal, off, off, tol, with_residuals=False)
        keep = np.array([dist_to_band(z) > cutoff for z in lam], dtype=bool)
        lam = lam[keep]
        res = _tridiag.residuals(sec.diagonal, off, off, lam, INVERSE_STEPS)
        return lam, res, warnings

    lam1, res1, w1 = off_band(sec1, delta)
    lam2, res2, w2 = off_band(sec2, max(delta - eps, 0.0))
    warnings = w1 + w2
    if lam1.size == 0 or lam2.size == 0:
        empty.warnings = warnings
        return empty
    cost = np.abs(lam1[:, None] - lam2[None, :])
    rows, cols = linear_sum_assignment(cost)
    good = cost[rows, cols] <= eps
    rows, cols = rows[good], cols[good]
    order = canonical_order(lam1[rows])
    rows, cols = rows[order], cols[order]
    ok = (res1[rows] <= tol) & (res2[cols] <= tol)
    if not np.all(ok):
        warnings.append(f"{int(np.count_nonzero(~ok))} stable eigenvalue(s) above residual tolerance")
    return SpectrumResult(
        lam1[rows], res1[rows], "finite-section", N, ok, warnings,
        extra={"partners": lam2[cols], "partner_residuals": [float(r) for r in res2[cols]]},
    )


# --------------------------------------------------------------------------
# resolvent and Birman–Schwinger matrix
# --------------------------------------------------------------------------

def _off_band_k(lam: complex) -> complex:
    lam = complex(lam)
    if dist_to_band(lam) == 0.0:
        raise ValueError(f"lambda = {lam} lies on the band [-2, 2]")
    return inverse_joukowsky(lam)


def free_resolvent_entry(m: int, n: int, lam: complex) -> complex:
    """Matrix element ``(H0 - lam)^{-1}_{m,n} = k**|m-n| / (k - 1/k)``."""
    k = _off_band_k(lam)
    return k ** abs(int(m) - int(n)) / (k - 1.0 / k)


@dataclass
class BSMatrix:
    """Birman–Schwinger matrix restricted to the support of the potential.

    ``entries[a, b] = sqrt|v_m| (H0 - lam)^{-1}_{m,n} sqrt|v_n| sgn(v_n)`` with
    ``m = sites[a]``, ``n = sites[b]``.
    """

    sites: np.ndarray
    entries: np.ndarray
    lam: complex
    k: complex

    @property
    def dimension(self) -> int:
        return self.sites.size

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.entries)


def build_bs_matrix(v: PotentialSpec, lam: complex) -> BSMatrix:
    k = _off_band_k(lam)
    sites = v.support()
    if sites.size == 0:
        raise ValueError("the zero potential has no Birman–Schwinger matrix")
    vals = np.array([v.at(int(s)) for s in sites], dtype=complex)
    root = np.sqrt(np.abs(vals))
    sgn = vals / np.abs(vals)
    gaps = np.abs(sites[:, None] - sites[None, :])
    green = np.power(k, gaps) / (k - 1.0 / k)
    K = root[:, None] * green * (root * sgn)[None, :]
    return BSMatrix(sites, K, complex(lam), k)


def _power_norm(A: np.ndarray) -> float:
    """Largest singular value by power iteration on ``A^H A``."""
    G = A.conj().T @ A
    n = G.shape[0]
    x = np.ones(n, dtype=complex) + 0.1j * np.cos(np.arange(n))
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(POWER_MAXIT):
        y = G @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        new = float(np.real(np.vdot(x, y)))
        x = y / ny
        if abs(new - est) <= POWER_RTOL * abs(new):
            est = new
            break
        est = new
    return math.sqrt(max(est, 0.0))


def matrix_norm(A: np.ndarray) -> float:
    """Operator 2-norm: SVD for small matrices, power iteration otherwise."""
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 0.0
    if max(A.shape) <= SVD_MAX_DIM:
        return float(np.linalg.norm(A, 2))
    return _power_norm(A)


def bs_operator_norm(K: BSMatrix) -> float:
    return matrix_norm(K.entries)
