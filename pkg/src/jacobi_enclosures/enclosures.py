"""Eigenvalue enclosure regions and their boundary curves.

Three regions, each controlled by a norm ``Q`` of the potential:

``L1``
    ``lam`` outside the open interval (-2, 2) with ``|lam**2 - 4| <= Q**2``.
``Lp``
    ``lam = k + 1/k`` with ``|k - 1/k| * ((1 - |k|**q)/(1 + |k|**q))**(1/q) <= Q``;
    ``q`` is the Hölder dual of the potential's exponent.
``Interp``
    ``|lam**2 - 4| * dist(lam, [-2, 2])**(2p - 2) <= Q**(2p)``, or
    ``dist <= Q`` when ``p = inf``.

All three are symmetric under ``lam -> -lam`` and ``lam -> conj(lam)``, so
boundary samplers only return the closed first quadrant.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import cosdg, sindg

from .domain import INF, dist_to_band, holder_dual, inverse_joukowsky

KINDS = ("L1", "Lp", "Interp")

# radicands of the Gamma(t) formulas in [-RADICAND_GUARD, 0) are roundoff
RADICAND_GUARD = 1e-13
BRACKET_LO = 1e-8
BRACKET_HI = 1.0
MAX_DOUBLINGS = 64


class BracketError(RuntimeError):
    """No sign change found while bracketing a boundary root."""


# --------------------------------------------------------------------------
# boundary functions and membership
# --------------------------------------------------------------------------

def l1_boundary_lhs(lam: complex) -> float:
    """``|lam**2 - 4|``."""
    lam = complex(lam)
    return abs((lam - 2.0) * (lam + 2.0))


def lp_boundary_lhs(lam: complex, q: float) -> float:
    """``|k - 1/k| * ((1 - |k|**q)/(1 + |k|**q))**(1/q)`` at ``k = inverse_joukowsky(lam)``.

    Zero on the segment [-2, 2], where ``|k| = 1``. Uses
    ``|k - 1/k| = sqrt|lam**2 - 4|`` and ``(1 - r**q)/(1 + r**q) = tanh(q*t/2)``
    with ``r = |k| = exp(-t)``, which stay accurate as ``|k| -> 1``.
    """
    lam = complex(lam)
    if lam.imag == 0.0 and abs(lam.real) <= 2.0:
        return 0.0
    r = abs(inverse_joukowsky(lam))
    if r >= 1.0:
        return 0.0
    t = -math.log(r)
    return math.sqrt(l1_boundary_lhs(lam)) * math.tanh(q * t / 2.0) ** (1.0 / q)


def interp_boundary_lhs(lam: complex, p: float) -> float:
    """``(|lam**2 - 4| * dist**(2p-2))**(1/(2p))``; ``dist`` itself for ``p = inf``.

    The ``2p``-th root keeps the function on the same scale as ``Q``, so
    comparisons and residuals do not overflow for large ``p``.
    """
    d = dist_to_band(lam)
    if p == INF:
        return d
    if d == 0.0:
        return 0.0
    return l1_boundary_lhs(lam) ** (1.0 / (2.0 * p)) * d ** (1.0 - 1.0 / p)


def _check_Q(Q: float) -> float:
    Q = float(Q)
    if not Q >= 0.0:
        raise ValueError(f"Q must be >= 0, got {Q}")
    return Q


def l1_region_contains(lam: complex, Q: float) -> bool:
    Q = _check_Q(Q)
    lam = complex(lam)
    if lam.imag == 0.0 and -2.0 < lam.real < 2.0:
        return False
    return l1_boundary_lhs(lam) <= Q * Q


def lp_region_contains(lam: complex, Q: float, q: float) -> bool:
    Q = _check_Q(Q)
    if not q >= 1.0:
        raise ValueError(f"q must be >= 1, got {q}")
    return lp_boundary_lhs(lam, q) <= Q


def interp_region_contains(lam: complex, Q: float, p: float) -> bool:
    Q = _check_Q(Q)
    if not p > 1.0:
        raise ValueError(f"p must be > 1 or inf, got {p}")
    return interp_boundary_lhs(lam, p) <= Q


def intersection_contains(lam: complex, Q: float, p: float) -> bool:
    """Membership in both the ``Lp`` (with ``q`` dual to ``p``) and ``Interp`` regions."""
    return lp_region_contains(lam, Q, holder_dual(p)) and interp_region_contains(lam, Q, p)


@dataclass(frozen=True)
class EnclosureRegion:
    """One of the three regions with its parameters.

    ``q`` is used by the ``Lp`` kind and ``p`` by ``Interp``.
    """

    kind: str
    Q: float
    q: float | None = None
    p: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        if not self.Q >= 0.0:
            raise ValueError("Q must be >= 0")
        if self.kind == "Lp" and (self.q is None or not self.q >= 1.0):
            raise ValueError("Lp region needs q >= 1")
        if self.kind == "Interp" and (self.p is None or not self.p > 1.0):
            raise ValueError("Interp region needs p > 1 or p = inf")

    @classmethod
    def l1(cls, Q: float) -> "EnclosureRegion":
        return cls("L1", Q)

    @classmethod
    def lp(cls, Q: float, q: float) -> "EnclosureRegion":
        return cls("Lp", Q, q=q)

    @classmethod
    def interp(cls, Q: float, p: float) -> "EnclosureRegion":
        return cls("Interp", Q, p=p)

    def lhs(self, lam: complex) -> float:
        """Left side of the defining inequality, on the scale of ``rhs``."""
        if self.kind == "L1":
            return l1_boundary_lhs(lam)
        if self.kind == "Lp":
            return lp_boundary_lhs(lam, self.q)
        return interp_boundary_lhs(lam, self.p)

    @property
    def rhs(self) -> float:
        return self.Q * self.Q if self.kind == "L1" else self.Q

    def margin(self, lam: complex) -> float:
        """``lhs - rhs``; nonpositive inside the region."""
        return self.lhs(lam) - self.rhs

    def contains(self, lam: complex) -> bool:
        if self.kind == "L1":
            return l1_region_contains(lam, self.Q)
        if self.kind == "Lp":
            return lp_region_contains(lam, self.Q, self.q)
        return interp_region_contains(lam, self.Q, self.p)

    def sample_boundary(self, n: int) -> "BoundaryCurve":
        if self.kind == "L1":
            return sample_l1_boundary(self.Q, n)
        if self.kind == "Lp":
            return sample_lp_boundary(self.Q, self.q, n)
        return sample_interp_boundary(self.Q, self.p, n)


# --------------------------------------------------------------------------
# boundary curves
# --------------------------------------------------------------------------

@dataclass
class BoundaryCurve:
    """First-quadrant sample of a region boundary.

    ``params`` holds the curve parameter of each point: the angle θ for L1,
    ``t`` for Lp, and for Interp a chart coordinate ``s`` in [0, 2] (``s < 1``
    on the vertical rays ``Re lam = 2s``, ``s >= 1`` on the rays from ``lam = 2``
    at angle ``(2 - s)·π/2``). ``residuals`` are boundary-equation residuals
    ``lhs - rhs`` in the region's own units.
    """

    kind: str
    Q: float
    exponent: float | None
    params: np.ndarray
    points: np.ndarray
    residuals: np.ndarray
    t_range: tuple[float, float] | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.points.size

    def quadrant_pieces(self) -> list[np.ndarray]:
        """The sampled arc reflected into all four quadrants."""
        P = self.points
        return [P, -P.conj(), -P, P.conj()]

    def full_curve(self) -> np.ndarray:
        """All four reflected pieces concatenated into one array."""
        return np.concatenate(self.quadrant_pieces())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_or_theta", "re", "im", "residual"])
        for s, z, r in zip(self.params, self.points, self.residuals):
            w.writerow([repr(float(s)), repr(float(z.real)), repr(float(z.imag)), repr(float(r))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        exponent = self.exponent
        if exponent == INF:
            exponent = "inf"
        return {
            "kind": self.kind,
            "Q": self.Q,
            "exponent": exponent,
            "t_range": list(self.t_range) if self.t_range is not None else None,
            "params": [float(s) for s in self.params],
            "points": [[float(z.real), float(z.imag)] for z in self.points],
            "residuals": [float(r) for r in self.residuals],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoundaryCurve":
        exponent = d.get("exponent")
        if exponent == "inf":
            exponent = INF
        tr = d.get("t_range")
        return cls(
            kind=d["kind"],
            Q=float(d["Q"]),
            exponent=exponent,
            params=np.array(d["params"], dtype=float),
            points=np.array([complex(a, b) for a, b in d["points"]], dtype=complex),
            residuals=np.array(d["residuals"], dtype=float),
            t_range=tuple(tr) if tr is not None else None,
        )

    @staticmethod
    def read_csv(text: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Parse CSV output back into ``(params, points, residuals)``."""
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["t_or_theta", "re", "im", "residual"]:
            raise ValueError("unexpected CSV header")
        data = np.array([[float(x) for x in row] for row in rows[1:]], dtype=float).reshape(-1, 4)
        return data[:, 0], data[:, 1] + 1j * data[:, 2], data[:, 3]


def _check_samples(n: int) -> int:
    n = int(n)
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    return n


def sample_l1_boundary(Q: float, n: int) -> BoundaryCurve:
    """Points ``sqrt(4 + Q**2 e^{iθ})`` for θ evenly spaced in [0, π]."""
    Q = float(Q)
    if not Q > 0.0:
        raise ValueError("L1 boundary needs Q > 0")
    n = _check_samples(n)
    deg = np.linspace(0.0, 180.0, n)
    # degree-based trig is exact at 0 and 180, so Q = 2 hits lam = 0 exactly
    w = cosdg(deg) + 1j * sindg(deg)
    pts = np.sqrt(4.0 + Q * Q * w)
    res = np.abs((pts - 2.0) * (pts + 2.0)) - Q * Q
    return BoundaryCurve("L1", Q, None, np.deg2rad(deg), pts, res)


# --------------------------------------------------------------------------
# bisection
# --------------------------------------------------------------------------

def bisect_increasing(f: Callable[[float], float], lo: float, hi: float,
                      max_doublings: int = MAX_DOUBLINGS, max_iter: int = 400) -> tuple[float, float]:
    """Bracket and bisect the sign change of an increasing function.

    ``f(lo)`` must be negative. ``hi`` is doubled until ``f(hi) >= 0`` (at most
    ``max_doublings`` times), then the bracket is halved down to adjacent
    floating-point numbers. Returns the final ``(lo, hi)`` with
    ``f(lo) < 0 <= f(hi)``.
    """
    flo = f(lo)
    if not flo < 0.0:
        raise BracketError(f"f(lo) = {flo} is not negative at lo = {lo}")
    for _ in range(max_doublings + 1):
        if f(hi) >= 0.0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise BracketError(f"no sign change up to hi = {hi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return lo, hi


# --------------------------------------------------------------------------
# Lp boundary: explicit parametrization
# --------------------------------------------------------------------------

def _coth_term(t: float | np.ndarray, Q: float, q: float):
    """``(Q**2/4) * coth(q t/2)**(2/q)``."""
    return (Q * Q / 4.0) * np.exp(-(2.0 / q) * np.log(np.tanh(q * np.asarray(t) / 2.0)))


def solve_t_range(Q: float, q: float) -> tuple[float, float]:
    """Positive roots ``t_min`` of ``cosh(t)**2 = C(t)`` and ``t_max`` of
    ``sinh(t)**2 = C(t)``, with ``C(t) = (Q**2/4) coth(q t/2)**(2/q)``.

    ``t_min`` is taken from the side where ``cosh**2 >= C`` and ``t_max`` from
    the side where ``sinh**2 <= C``, so both radicands of the parametrization
    are nonnegative on ``[t_min, t_max]``.
    """
    Q = float(Q)
    q = float(q)
    if not Q > 0.0:
        raise ValueError("Q must be > 0")
    if not q >= 1.0:
        raise ValueError("q must be >= 1")

    def f_min(t: float) -> float:
        return math.cosh(t) ** 2 - float(_coth_term(t, Q, q))

    def f_max(t: float) -> float:
        return math.sinh(t) ** 2 - float(_coth_term(t, Q, q))

    _, t_min = bisect_increasing(f_min, BRACKET_LO, BRACKET_HI)
    t_max, _ = bisect_increasing(f_max, BRACKET_LO, BRACKET_HI)
    return t_min, t_max


def gamma_point(t: float, Q: float, q: float, at_min: bool = False, at_max: bool = False) -> complex:
    """First-quadrant boundary point of the Lp region at parameter ``t``."""
    C = float(_coth_term(t, Q, q))
    ch, sh = math.cosh(t), math.sinh(t)
    ra = 0.0 if at_min else ch * ch - C
    rb = 0.0 if at_max else C - sh * sh
    for r in (ra, rb):
        if r < -RADICAND_GUARD:
            raise ValueError(f"t = {t} lies outside [t_min, t_max] (radicand {r})")
    return complex(2.0 * ch * math.sqrt(max(ra, 0.0)), 2.0 * sh * math.sqrt(max(rb, 0.0)))


def sample_lp_boundary(Q: float, q: float, n: int) -> BoundaryCurve:
    """Boundary of the Lp region at ``n`` values of ``t`` uniform in ``[t_min, t_max]``.

    The first point is on the imaginary axis, the last on the real axis.
    """
    n = _check_samples(n)
    t_min, t_max = solve_t_range(Q, q)
    ts = np.linspace(t_min, t_max, n)
    ts[0], ts[-1] = t_min, t_max
    pts = np.empty(n, dtype=complex)
    for j, t in enumerate(ts):
        pts[j] = gamma_point(t, Q, q, at_min=(j == 0), at_max=(j == n - 1))
    res = np.array([lp_boundary_lhs(z, q) - Q for z in pts])
    return BoundaryCurve("Lp", float(Q), float(q), ts, pts, res, t_range=(t_min, t_max))


# --------------------------------------------------------------------------
# Interp boundary: ray bisection on two chart families
# --------------------------------------------------------------------------

def _interp_chart_points(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Chart layout: vertical rays over Re lam in [0, 2), then rays from 2."""
    n_vert = n // 2
    n_polar = n - n_vert
    xs = 2.0 * np.arange(n_vert) / n_vert if n_vert else np.empty(0)
    betas = np.linspace(math.pi / 2, 0.0, n_polar) if n_polar > 1 else np.array([0.0])
    s = np.concatenate([xs / 2.0, 1.0 + (math.pi / 2 - betas) / (math.pi / 2)])
    return xs, betas, s


def sample_interp_boundary(Q: float, p: float, n: int) -> BoundaryCurve:
    """Boundary of the Interp region, first quadrant, from the imaginary axis to the real axis.

    For ``0 <= Re lam < 2`` the crossing is searched on vertical rays
    ``x + iy``; beyond that on rays ``2 + rho e^{iβ}``, ``β`` from π/2 down
    to 0. Along either family the boundary function is strictly increasing
    (``|lam - 2|``, ``|lam + 2|`` and the band distance all grow), so each
    ray crosses the boundary exactly once. For ``p = inf`` the crossing is
    ``y = Q`` resp. ``rho = Q`` and is emitted in closed form.
    """
    Q = float(Q)
    p = float(p)
    if not Q > 0.0:
        raise ValueError("Interp boundary needs Q > 0")
    if not p > 1.0:
        raise ValueError("p must be > 1 or inf")
    n = _check_samples(n)
    xs, betas, s = _interp_chart_points(n)
    pts = np.empty(n, dtype=complex)
    j = 0
    for x in xs:
        if p == INF:
            y = Q
        else:
            def f(y: float, x: float = x) -> float:
                return interp_boundary_lhs(complex(x, y), p) - Q
            try:
                _, y = bisect_increasing(f, 0.0, 1.0)
            except BracketError as exc:
                raise BracketError(f"vertical ray Re lam = {x}: {exc}") from exc
        pts[j] = complex(x, y)
        j += 1
    for beta in betas:
        e = complex(math.cos(beta), math.sin(beta))
        if beta == 0.0:
            e = 1.0 + 0j
        elif beta == math.pi / 2:
            e = 1j
        if p == INF:
            rho = Q
        else:
            def g(rho: float, e: complex = e) -> float:
                return interp_boundary_lhs(2.0 + rho * e, p) - Q
            try:
                _, rho = bisect_increasing(g, 0.0, 1.0)
            except BracketError as exc:
                raise BracketError(f"ray from 2 at angle {beta}: {exc}") from exc
        pts[j] = 2.0 + rho * e
        j += 1
    res = np.array([interp_boundary_lhs(z, p) - Q for z in pts])
    return BoundaryCurve("Interp", Q, p, s, pts, res)
