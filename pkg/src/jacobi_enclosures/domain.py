"""Shared vocabulary: the Joukowsky map, band distance, complex signum,
sequence norms and the compactly supported potential type.

The spectral parameter ``lam`` and the disk parameter ``k`` are related by
``lam = k + 1/k`` with ``0 < |k| <= 1``. Plain Python ``complex`` is used for
both; ``math.inf`` is the sentinel for the exponent ``p = inf``.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

INF = math.inf


def _check_finite(z: complex, name: str) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{name} must be finite, got {z!r}")
    return z


def joukowsky(k: complex) -> complex:
    """Return ``k + 1/k``.

    Raises
    ------
    ValueError
        If ``k == 0`` or ``k`` is not finite.
    """
    k = _check_finite(k, "k")
    if k == 0:
        raise ValueError("k = 0 is not in the punctured disk")
    return k + 1.0 / k


def inverse_joukowsky(lam: complex) -> complex:
    """Root of ``k**2 - lam*k + 1 = 0`` with ``|k| <= 1``.

    Off the segment [-2, 2] the root is unique and ``|k| < 1``. On the
    segment both roots lie on the unit circle and the one with ``Im k <= 0``
    is returned (so ``lam = 0`` gives ``k = -1j``).

    The large root ``(lam + w)/2`` is formed first, with the square root
    ``w`` of ``lam**2 - 4`` chosen so that ``Re(conj(lam) * w) >= 0``; the
    small root is its reciprocal. This never subtracts nearly equal numbers.
    """
    lam = _check_finite(lam, "lam")
    if lam.imag == 0.0 and abs(lam.real) <= 2.0:
        x = lam.real
        return complex(x / 2.0, -math.sqrt(max(0.0, 4.0 - x * x)) / 2.0)
    w = cmath.sqrt((lam - 2.0) * (lam + 2.0))
    if (lam.conjugate() * w).real < 0.0:
        w = -w
    big = (lam + w) / 2.0
    return 1.0 / big


def dist_to_band(lam: complex) -> float:
    """Euclidean distance from ``lam`` to the real segment [-2, 2]."""
    lam = complex(lam)
    x = abs(lam.real)
    if x <= 2.0:
        return abs(lam.imag)
    return math.hypot(x - 2.0, lam.imag)


def complex_sgn(z: complex) -> complex:
    """``z/|z|``, with ``sgn(0) = 0``."""
    z = complex(z)
    if z == 0:
        return 0j
    return z / abs(z)


def holder_dual(p: float) -> float:
    """Hölder conjugate ``q`` of ``p`` (``1/p + 1/q = 1``); ``q(inf) = 1``."""
    p = float(p)
    if math.isnan(p) or p <= 1.0:
        raise ValueError(f"holder_dual needs p > 1, got {p}")
    if p == INF:
        return 1.0
    return p / (p - 1.0)


def lp_norm_array(values: np.ndarray, p: float) -> float:
    """ℓᵖ norm of a finite array; ``p = inf`` gives the sup norm."""
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(np.asarray(values, dtype=complex))
    if a.size == 0:
        return 0.0
    if p == INF:
        return float(a.max())
    if p == 1.0:
        return float(a.sum())
    if p == 2.0:
        return float(np.linalg.norm(a))
    # scale by the max entry to keep a**p representable
    m = a.max()
    if m == 0.0:
        return 0.0
    return float(m * np.sum((a / m) ** p) ** (1.0 / p))


@dataclass(eq=False)
class PotentialSpec:
    """Finitely supported complex sequence on ℤ.

    ``values[j]`` is the entry at site ``offset + j``; all other sites are
    zero.
    """

    offset: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.offset = int(self.offset)
        vals = np.array(self.values, dtype=complex).ravel()
        if vals.size == 0:
            raise ValueError("potential window must be nonempty")
        if not np.all(np.isfinite(vals)):
            raise ValueError("potential entries must be finite")
        vals.setflags(write=False)
        self.values = vals

    @classmethod
    def delta(cls, omega: complex, site: int = 0) -> "PotentialSpec":
        """The single-site potential ``omega`` at ``site``."""
        return cls(site, [omega])

    @classmethod
    def zero(cls) -> "PotentialSpec":
        return cls(0, [0.0])

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PotentialSpec):
            return NotImplemented
        return self.offset == other.offset and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"PotentialSpec(offset={self.offset}, values={self.values.tolist()!r})"

    @property
    def last(self) -> int:
        """Index of the last stored entry."""
        return self.offset + self.values.size - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.values.size)

    def at(self, n: int) -> complex:
        j = n - self.offset
        if 0 <= j < self.values.size:
            return complex(self.values[j])
        return 0j

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def support(self) -> np.ndarray:
        """Sites carrying a nonzero entry."""
        return self.indices[self.values != 0]

    def trimmed(self) -> "PotentialSpec":
        """Drop leading and trailing zeros (keeps one zero for the zero potential)."""
        nz = np.flatnonzero(self.values)
        if nz.size == 0:
            return PotentialSpec(self.offset, [0.0])
        return PotentialSpec(self.offset + int(nz[0]), self.values[nz[0]:nz[-1] + 1])

    def shifted(self, s: int) -> "PotentialSpec":
        return PotentialSpec(self.offset + s, self.values)

    def reversed(self) -> "PotentialSpec":
        """The reflected sequence ``n -> v[-n]``."""
        return PotentialSpec(-self.last, self.values[::-1])

    def norm(self, p: float) -> float:
        return lp_norm_array(self.values, p)

    def to_dict(self) -> dict:
        return {"offset": self.offset,
                "values": [[float(z.real), float(z.imag)] for z in self.values]}

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        try:
            offset = d["offset"]
            raw = d["values"]
        except (KeyError, TypeError) as exc:
            raise ValueError("potential JSON needs 'offset' and 'values'") from exc
        if isinstance(offset, bool) or not isinstance(offset, int):
            raise ValueError("'offset' must be an integer")
        vals = []
        for pair in raw:
            if len(pair) != 2:
                raise ValueError(f"expected [re, im] pair, got {pair!r}")
            vals.append(complex(float(pair[0]), float(pair[1])))
        return cls(offset, vals)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PotentialSpec":
        return cls.from_dict(json.loads(text))


def lp_norm(v: PotentialSpec | Sequence[complex], p: float) -> float:
    """ℓᵖ norm of a potential (or of a plain sequence of entries)."""
    if isinstance(v, PotentialSpec):
        return v.norm(p)
    return lp_norm_array(np.asarray(v, dtype=complex), p)


def parse_complex(text: str) -> complex:
    """Parse the ``re,im`` flag format (a lone number is taken as real)."""
    parts = [s.strip() for s in text.split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) != 2:
        raise ValueError(f"expected 're,im', got {text!r}")
    return complex(float(parts[0]), float(parts[1]))


def complex_pairs(zs: Iterable[complex]) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in zs]
