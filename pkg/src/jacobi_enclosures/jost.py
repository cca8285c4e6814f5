"""Jost solutions of the eigenvalue recurrence and exact eigenvalue location
for finitely supported potentials.

For ``lam = k + 1/k`` the recurrence

    phi[n+1] + (v[n] - lam) phi[n] + phi[n-1] = 0

has a solution equal to ``k**n`` to the right of the support (the right Jost
solution) and one equal to ``k**-n`` to the left of it. For ``0 < |k| < 1``
both decay on their side, so ``lam`` is an eigenvalue exactly when their
Wronskian vanishes.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .domain import PotentialSpec, joukowsky
from .operators import SpectrumResult, canonical_order

K_FLOOR = 0.02
K_CEIL = 0.995
DEDUP_TOL = 1e-8
NEWTON_MAXIT = 60


@dataclass
class JostSolution:
    """Samples ``phi[first_site + j] = samples[j]`` of a Jost solution."""

    k: complex
    first_site: int
    samples: np.ndarray
    side: str

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.first_site, self.first_site + self.samples.size)

    def at(self, n: int) -> complex:
        return complex(self.samples[n - self.first_site])


def _check_k(k: complex, allow_unit: bool = True) -> complex:
    k = complex(k)
    if not (math.isfinite(k.real) and math.isfinite(k.imag)):
        raise ValueError("k must be finite")
    r = abs(k)
    if r == 0.0:
        raise ValueError("k = 0 is excluded")
    if r > 1.0 + 1e-15 or (not allow_unit and r >= 1.0):
        raise ValueError(f"|k| = {r} is outside the allowed disk")
    if k == 1.0 or k == -1.0:
        raise ValueError("k = ±1 is excluded (degenerate Wronskian)")
    return k


def _right_local(vals: np.ndarray, k, pad: int):
    """Right Jost solution in support-local coordinates (first entry at site 0).

    ``k`` may be an array; the result has shape ``(L + 2*pad,) + k.shape``
    and covers sites ``-pad .. L - 1 + pad``.
    """
    k = np.asarray(k, dtype=complex)
    L = vals.size
    lam = k + 1.0 / k
    out = np.empty((L + 2 * pad,) + k.shape, dtype=complex)
    # sites L-1+pad and L-2+pad lie beyond the support (pad >= 1)
    top = L - 1 + pad
    out[top + pad] = k ** (top)
    out[top - 1 + pad] = k ** (top - 1)
    for n in range(top - 1, -pad, -1):
        vn = vals[n] if 0 <= n < L else 0.0
        out[n - 1 + pad] = (lam - vn) * out[n + pad] - out[n + 1 + pad]
    return out


def jost_right(v: PotentialSpec, k: complex, pad: int = 2) -> JostSolution:
    """Right Jost solution on sites ``v.offset - pad .. v.last + pad``.

    Seeded with ``k**n`` beyond the right edge and run backwards through the
    recurrence.
    """
    k = _check_k(k)
    pad = max(int(pad), 1)
    local = _right_local(v.values, k, pad)
    # phi[n] = k**offset * local[n - offset]
    return JostSolution(k, v.offset - pad, local * k ** v.offset, "right")


def jost_left(v: PotentialSpec, k: complex, pad: int = 2) -> JostSolution:
    """Left Jost solution: ``k**-n`` below the support, run forwards.

    Obtained from the right solution of the reflected potential, since
    ``n -> -n`` maps the recurrence onto itself.
    """
    k = _check_k(k)
    pad = max(int(pad), 1)
    r = v.reversed()
    local = _right_local(r.values, k, pad)[::-1]
    return JostSolution(k, v.offset - pad, local * k ** r.offset, "left")


def recurrence_residual(v: PotentialSpec, sol: JostSolution) -> float:
    """``max |phi[n+1] + (v[n] - lam) phi[n] + phi[n-1]|`` over interior sites."""
    lam = sol.k + 1.0 / sol.k
    phi = sol.samples
    sites = sol.sites
    vn = np.array([v.at(int(n)) for n in sites[1:-1]])
    r = phi[2:] + (vn - lam) * phi[1:-1] + phi[:-2]
    return float(np.max(np.abs(r))) if r.size else 0.0


def wronskian_pair(phi: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """``phi[n] psi[n+1] - phi[n+1] psi[n]`` for each consecutive pair."""
    return phi[:-1] * psi[1:] - phi[1:] * psi[:-1]


def wronskian_profile(v: PotentialSpec, k: complex, pad: int = 2) -> np.ndarray:
    """Wronskian of the right and left Jost solutions at every window site."""
    return wronskian_pair(jost_right(v, k, pad).samples, jost_left(v, k, pad).samples)


def _w_local(vals: np.ndarray, k):
    """Vectorised Wronskian in local coordinates.

    The left solution equals 1 at site 0 and ``k`` at site -1, so the
    Wronskian taken at site -1 is ``phi_right[-1] - k * phi_right[0]``.
    The value is translation invariant.
    """
    k = np.asarray(k, dtype=complex)
    phi = _right_local(vals, k, 1)
    return phi[0] - k * phi[1]


def wronskian(v: PotentialSpec, k: complex) -> complex:
    """Wronskian ``W(k)`` of the right and left Jost solutions."""
    k = _check_k(k)
    return complex(_w_local(v.values, k))


def conjugate_pair_wronskian(v: PotentialSpec, k: complex, pad: int = 2) -> np.ndarray:
    """Wronskian of the right Jost solutions at ``k`` and ``conj(k)`` at every
    window site.

    For ``|k| = 1`` and real ``v`` both solve the same real recurrence, and
    beyond the support the pair is ``k**n, conj(k)**n``, so the Wronskian is
    ``conj(k) - k = -2i Im k`` everywhere.
    """
    k = _check_k(k)
    return wronskian_pair(jost_right(v, k, pad).samples, jost_right(v, k.conjugate(), pad).samples)


# --------------------------------------------------------------------------
# zero search
# --------------------------------------------------------------------------

def _winding(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Winding numbers of closed loops sampled along ``axis`` (last point wraps)."""
    ang = np.angle(values)
    d = np.diff(np.concatenate([ang, np.take(ang, [0], axis=axis)], axis=axis), axis=axis)
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return np.rint(d.sum(axis=axis) / (2 * np.pi)).astype(int)


def _newton(vals: np.ndarray, k0: complex, tol: float,
            known: tuple[complex, ...] = ()) -> tuple[complex, bool, float]:
    """Newton iteration on ``W`` with a central-difference derivative.

    With ``known`` roots the iteration runs on the deflated function
    ``W(k) / prod(k - known)``, which steers it away from zeros already found.
    Stops once the Newton correction drops below ``tol * |k|``. Returns
    ``(k, converged, |f/f'|)``.
    """
    known_arr = np.asarray(known, dtype=complex)

    def f(z):
        w = _w_local(vals, z)
        return w / np.prod(z - known_arr) if known_arr.size else w

    k = complex(k0)
    step_mag = math.inf
    for _ in range(NEWTON_MAXIT):
        if not 0.0 < abs(k) < 1.0:
            return k, False, step_mag
        h = 1e-7 * (1.0 + abs(k))
        w = complex(f(k))
        dw = complex(f(k + h) - f(k - h)) / (2.0 * h)
        if dw == 0 or not cmath.isfinite(w / dw):
            break
        step = w / dw
        step_mag = abs(step)
        k -= step
        if step_mag <= tol * abs(k):
            break
    return k, 0.0 < abs(k) < 1.0 and step_mag <= tol * abs(k), step_mag


def _deflate(vals: np.ndarray, roots: list[tuple[complex, float]], tol: float,
             k_floor: float, k_ceil: float, want: int) -> None:
    """Look for zeros hiding next to known ones (close pairs in a single
    grid cell) by deflated Newton started beside each known zero; new zeros
    are polished on ``W`` itself and appended to ``roots``."""
    progress = True
    while progress and len(roots) < want:
        progress = False
        for k_known, _ in list(roots):
            known = tuple(k for k, _ in roots)
            start = k_known * (1.0 + 1e-3 * cmath.exp(0.25j * math.pi))
            # the deflated stage only has to land near the new zero; the
            # polish on W enforces the real tolerance
            k, ok, _ = _newton(vals, start, max(tol, 1e-9), known)
            if not ok:
                continue
            k, ok, step = _newton(vals, k, tol)
            if not ok or not k_floor <= abs(k) <= k_ceil:
                continue
            if any(abs(k - kk) <= DEDUP_TOL for kk, _ in roots):
                continue
            roots.append((k, step))
            progress = True
            if len(roots) >= want:
                return


def _cell_candidates(vals: np.ndarray, r: np.ndarray, th: np.ndarray,
                     W: np.ndarray, depth: int) -> list[complex]:
    """Starting points from grid cells with nonzero winding of ``arg W``.

    Cells winding more than once are subdivided (``depth`` levels) so close
    pairs of zeros each get their own start.
    """
    c00, c01 = W[:-1, :-1], W[:-1, 1:]
    c11, c10 = W[1:, 1:], W[1:, :-1]
    loop = np.stack([c00, c01, c11, c10], axis=-1)
    wind = _winding(loop)
    out: list[complex] = []
    for i, j in zip(*np.nonzero(wind)):
        rm = 0.5 * (r[i] + r[i + 1])
        tm = 0.5 * (th[j] + th[j + 1])
        if abs(wind[i, j]) == 1 or depth == 0:
            out.append(rm * cmath.exp(1j * tm))
            if abs(wind[i, j]) > 1:
                for a in (r[i], r[i + 1]):
                    for b in (th[j], th[j + 1]):
                        out.append(0.5 * (a + rm) * cmath.exp(0.5j * (b + tm)))
            continue
        rs = np.linspace(r[i], r[i + 1], 5)
        ts = np.linspace(th[j], th[j + 1], 5)
        sub = _w_local(vals, rs[:, None] * np.exp(1j * ts[None, :]))
        out.extend(_cell_candidates(vals, rs, ts, sub, depth - 1))
    return out


def _annulus_count(vals: np.ndarray, r_in: float, r_out: float, m: int) -> int:
    th = 2 * np.pi * np.arange(m) / m
    outer = _w_local(vals, r_out * np.exp(1j * th))
    inner = _w_local(vals, r_in * np.exp(1j * th))
    return int(_winding(outer) - _winding(inner))


def locate_eigenvalues_wronskian(v: PotentialSpec, grid: int = 256, refine_tol: float = 1e-13,
                                 k_floor: float = K_FLOOR, k_ceil: float = K_CEIL,
                                 retries: int = 2) -> SpectrumResult:
    """Eigenvalues ``lam = k + 1/k`` from zeros of the Jost Wronskian in
    the annulus ``k_floor <= |k| <= k_ceil``.

    ``grid`` is the number of angular nodes (``grid // 2`` radial nodes).
    Cells whose boundary winds ``arg W`` are Newton-refined until the
    derivative-normalised residual ``|W/W'|`` is at most ``refine_tol * |k|``
    (raw ``|W|`` has no natural scale: it inherits the growth of the Jost
    solutions across the support). The number of
    distinct zeros is checked against the argument principle on the annulus
    boundary. A shortfall first triggers deflated Newton next to the known
    zeros (close pairs sharing a cell), then a doubled grid (``retries``
    times); any remaining discrepancy is reported in ``warnings``.

    ``residuals`` hold ``|W/W'| * |1 - 1/k**2|``, a first-order estimate of
    the error in ``lam``.
    """
    grid = int(grid)
    if grid < 64:
        raise ValueError("grid must be >= 64")
    if refine_tol <= 0:
        raise ValueError("refine_tol must be positive")
    vals = v.trimmed().values
    warnings: list[str] = []
    roots: list[tuple[complex, float]] = []
    if not np.any(vals):
        return SpectrumResult([], [], "wronskian", None,
                              extra={"k": np.empty(0, complex), "grid": grid})

    expected = _annulus_count(vals, k_floor, k_ceil, 16 * grid)
    for attempt in range(retries + 1):
        n_th = grid * 2 ** attempt
        n_r = max(n_th // 2, 2)
        r = np.linspace(k_floor, k_ceil, n_r)
        th = 2 * np.pi * np.arange(n_th + 1) / n_th
        W = _w_local(vals, r[:, None] * np.exp(1j * th[None, :]))
        starts = _cell_candidates(vals, r, th, W, depth=3)
        roots = []
        failed = 0
        for k0 in starts:
            k, ok, step = _newton(vals, k0, refine_tol)
            if not ok:
                failed += 1
                continue
            if not k_floor <= abs(k) <= k_ceil:
                continue
            if any(abs(k - kk) <= DEDUP_TOL for kk, _ in roots):
                continue
            roots.append((k, step))
        if len(roots) < expected:
            _deflate(vals, roots, refine_tol, k_floor, k_ceil, expected)
        if len(roots) == expected:
            break
        if attempt < retries:
            continue
        warnings.append(f"found {len(roots)} zero(s) but the argument principle counts {expected}")
        if failed:
            warnings.append(f"{failed} candidate(s) failed to converge")

    ks = np.array([k for k, _ in roots], dtype=complex)
    lam = np.array([joukowsky(k) for k in ks], dtype=complex)
    res = np.array([step * abs(1.0 - 1.0 / k ** 2) for k, step in roots], dtype=float)
    order = canonical_order(lam)
    return SpectrumResult(lam[order], res[order], "wronskian", None, None, warnings,
                          extra={"k": ks[order], "grid": grid})


def delta_k(omega: complex) -> complex:
    """The ``k`` with ``1/k - k = omega`` and ``|k| <= 1``.

    Roots of ``k**2 + omega k - 1 = 0``; their product is ``-1``, so at most
    one lies strictly inside the unit disk.
    """
    omega = complex(omega)
    s = cmath.sqrt(omega * omega + 4.0)
    # form the larger root without cancellation, then invert
    big = (-omega - s) / 2.0 if abs(-omega - s) >= abs(-omega + s) else (-omega + s) / 2.0
    return -1.0 / big
