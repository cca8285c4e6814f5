"""Verification campaigns over potentials: enclosure containment, sharpness
of the ℓ¹ region, and Birman–Schwinger norm bound audits.

Every campaign returns a :class:`VerificationReport`; ``violations == 0`` is
the pass condition.
"""
from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import __version__
from .domain import INF, PotentialSpec, complex_pairs, dist_to_band, holder_dual, inverse_joukowsky
from .enclosures import (EnclosureRegion, interp_region_contains, lp_region_contains,
                         sample_interp_boundary, sample_lp_boundary)
from .jost import delta_k, locate_eigenvalues_wronskian
from .operators import (DEFAULT_DELTA, bs_operator_norm, build_bs_matrix, section_size_for,
                        stable_discrete_eigenvalues)

WORKERS_ENV = "JACOBI_ENCLOSURES_WORKERS"
DEFAULT_P_VALUES = (4.0 / 3.0, 2.0, 4.0, INF)

CONTAINMENT_TOL = 1e-9
MATCH_TOL = 1e-6
DISAGREE_TOL = 1e-5
BOUND_SLACK = 1e-8
SHARP_BOUNDARY_TOL = 1e-9
SHARP_VALUE_TOL = 1e-10
BAND_SKIP = 1e-6


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _pmap(fn: Callable, items: Sequence, workers: int | None) -> list:
    """Order-preserving map, in worker processes when ``workers > 1``."""
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _p_key(p: float) -> str:
    if p == INF:
        return "inf"
    return format(p, ".6g")


def _json_float(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


# --------------------------------------------------------------------------
# ensembles
# --------------------------------------------------------------------------

@dataclass
class EnsembleConfig:
    """Random potential ensemble: ``count`` potentials, entries uniform in the
    disk of radius ``magnitude_cap`` on a centred window of odd width."""

    seed: int = 0
    count: int = 0
    support_width: int = 21
    magnitude_cap: float = 3.0
    p_values: tuple[float, ...] = DEFAULT_P_VALUES

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValueError("count must be >= 0")
        if self.support_width < 1 or self.support_width % 2 == 0:
            raise ValueError("support_width must be a positive odd number")
        if not self.magnitude_cap > 0:
            raise ValueError("magnitude_cap must be positive")
        self.p_values = tuple(float(p) for p in self.p_values)
        for p in self.p_values:
            if not p > 1.0:
                raise ValueError("p values must be > 1 or inf")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p_values"] = [_json_float(p) for p in self.p_values]
        return d


def potential_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for potential ``index``: independent of how many
    potentials are drawn or in what order."""
    key = np.array([seed % 2 ** 64, index % 2 ** 64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def generate_ensemble(cfg: EnsembleConfig) -> list[PotentialSpec]:
    out = []
    half = cfg.support_width // 2
    for i in range(cfg.count):
        rng = potential_rng(cfg.seed, i)
        u = rng.random((2, cfg.support_width))
        vals = cfg.magnitude_cap * np.sqrt(u[0]) * np.exp(2j * np.pi * u[1])
        out.append(PotentialSpec(-half, vals))
    return out


def truncate_potential(entry: Callable[[int], complex], half_width: int,
                       p_values: Iterable[float] = DEFAULT_P_VALUES,
                       tail_cutoff: int = 10 ** 6) -> tuple[PotentialSpec, dict[str, float]]:
    """Window a non-compact sequence to ``|n| <= half_width``.

    Also returns the ℓᵖ norm of the discarded tail for each ``p``, summed out
    to ``|n| <= tail_cutoff`` (``sup`` for ``p = inf``). Adding it to the
    window norm gives a conservative norm for the full sequence.
    """
    n = np.arange(-half_width, half_width + 1)
    window = PotentialSpec(-half_width, [entry(int(j)) for j in n])
    far = np.arange(half_width + 1, tail_cutoff + 1)
    tail = np.abs(np.concatenate([[entry(int(j)) for j in far], [entry(int(-j)) for j in far]]))
    tails = {}
    for p in p_values:
        if tail.size == 0:
            tails[_p_key(p)] = 0.0
        elif p == INF:
            tails[_p_key(p)] = float(tail.max())
        else:
            tails[_p_key(p)] = float(np.sum(tail ** p) ** (1.0 / p))
    return window, tails


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

@dataclass
class VerificationReport:
    """Outcome of a campaign. ``records`` has one entry per work item."""

    kind: str
    config: dict
    records: list[dict] = field(default_factory=list)
    violations: int = 0
    diagnostics: list[str] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    version: str = __version__
    timestamp: str = field(default_factory=lambda: time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()))

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "version": self.version,
            "timestamp": self.timestamp,
            "config": self.config,
            "violations": self.violations,
            "summary": self.summary,
            "diagnostics": self.diagnostics,
            "records": self.records,
        }

    def to_json(self, indent: int | None = 1) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=False)

    def summary_table(self) -> str:
        lines = [f"{self.kind} report (version {self.version})"]
        width = max([len(k) for k in self.summary] + [10])
        for key, val in self.summary.items():
            if isinstance(val, float):
                val = f"{val:.6g}"
            lines.append(f"  {key:<{width}}  {val}")
        lines.append(f"  {'violations':<{width}}  {self.violations}")
        lines.append("  result" + " " * (width - 4) + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


# --------------------------------------------------------------------------
# enclosure containment
# --------------------------------------------------------------------------

def _regions(v: PotentialSpec, p_values: Sequence[float], tails: dict | None) -> list[tuple[str, EnclosureRegion]]:
    tails = tails or {}
    q1 = v.norm(1.0) + tails.get(_p_key(1.0), 0.0)
    out = [("L1", EnclosureRegion.l1(q1))]
    for p in p_values:
        Q = v.norm(p) + tails.get(_p_key(p), 0.0)
        out.append((f"Lp[p={_p_key(p)}]", EnclosureRegion.lp(Q, holder_dual(p))))
        out.append((f"Interp[p={_p_key(p)}]", EnclosureRegion.interp(Q, p)))
    return out


def _match(a: np.ndarray, b: np.ndarray):
    if a.size == 0 or b.size == 0:
        return np.empty(0, int), np.empty(0, int), np.empty(0)
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return rows, cols, cost[rows, cols]


@dataclass
class _VerifyJob:
    index: int
    potential: PotentialSpec
    delta: float
    p_values: tuple
    section_size: int | None
    grid: int
    tails: dict | None


def _verify_one(job: _VerifyJob) -> dict:
    v, delta = job.potential, job.delta
    rec: dict = {"index": job.index, "potential": v.to_dict(),
                 "norms": {_p_key(p): v.norm(p) for p in (1.0,) + tuple(job.p_values)}}
    if job.tails:
        rec["tails"] = job.tails
    wr = locate_eigenvalues_wronskian(v, grid=job.grid)
    # filter the finite section slightly below delta so values straddling
    # the cutoff still find their partner
    N = job.section_size or section_size_for(v, delta)
    fs = stable_discrete_eigenvalues(v, N, delta=0.9 * delta)
    fs_vals = fs.extra["partners"]
    wr_vals = wr.eigenvalues
    rec["section_size"] = fs.section_size
    rec["warnings"] = wr.warnings + fs.warnings

    wr_far = np.array([dist_to_band(z) > delta for z in wr_vals], dtype=bool)
    rec["excluded_near_band"] = int(np.count_nonzero(~wr_far))
    rows, cols, dist = _match(wr_vals, fs_vals)
    matched_wr = set()
    pairs = []
    disagreements = []
    for r, c, d in zip(rows, cols, dist):
        if not wr_far[r]:
            continue
        if d <= DISAGREE_TOL:
            matched_wr.add(int(r))
            pairs.append((wr_vals[r], fs_vals[c], float(d)))
        else:
            disagreements.append(f"wronskian {wr_vals[r]:.10g} vs finite-section {fs_vals[c]:.10g}: {d:.3g}")
    for r in np.flatnonzero(wr_far):
        if int(r) not in matched_wr and int(r) not in set(rows.tolist()):
            disagreements.append(f"wronskian eigenvalue {wr_vals[r]:.10g} has no finite-section partner")
    fs_matched = {int(c) for r, c, d in zip(rows, cols, dist) if d <= DISAGREE_TOL}
    for c, z in enumerate(fs_vals):
        if c not in fs_matched and dist_to_band(z) > delta:
            disagreements.append(f"finite-section eigenvalue {z:.10g} has no wronskian partner")

    regions = _regions(v, job.p_values, job.tails)
    margins = {name: [] for name, _ in regions}
    violations = []
    for lam, _, _ in pairs:
        for name, reg in regions:
            m = reg.margin(lam)
            margins[name].append(m)
            inside = reg.contains(lam) or m <= CONTAINMENT_TOL * max(1.0, reg.rhs)
            if not inside:
                violations.append(f"{lam:.10g} outside {name} (margin {m:.3g})")
    rec["eigenvalues"] = complex_pairs([p[0] for p in pairs])
    rec["cross_method_distance"] = [p[2] for p in pairs]
    rec["margins"] = margins
    rec["disagreements"] = disagreements
    rec["violations"] = violations
    return rec


def verify_enclosures(vs: Sequence[PotentialSpec], delta: float = DEFAULT_DELTA,
                      p_values: Sequence[float] = DEFAULT_P_VALUES, section_size: int | None = None,
                      grid: int = 256, tails: Sequence[dict] | None = None,
                      workers: int | None = None, config: dict | None = None) -> VerificationReport:
    """Check every cross-validated eigenvalue against all enclosures.

    Eigenvalues are computed by Wronskian root finding and by stable finite
    sections. Pairs within ``DISAGREE_TOL`` are tested (using the Wronskian
    value) against the L1 region with ``‖v‖₁`` and, for each ``p``, the Lp
    region (``q`` dual to ``p``) and the Interp region with ``‖v‖_p``.
    Eigenvalues within ``delta`` of the band are excluded and counted;
    method disagreements are reported separately and do not enter the
    containment statistics.
    """
    p_values = tuple(float(p) for p in p_values)
    jobs = [_VerifyJob(i, v, delta, p_values, section_size, grid, tails[i] if tails else None)
            for i, v in enumerate(vs)]
    records = _pmap(_verify_one, jobs, workers)
    cfg = {"delta": delta, "p_values": [_json_float(p) for p in p_values],
           "section_size": section_size, "grid": grid, "count": len(vs)}
    if config:
        cfg.update(config)
    report = VerificationReport("verify", cfg, records)
    n_eig = sum(len(r["eigenvalues"]) for r in records)
    close = sum(sum(d <= MATCH_TOL for d in r["cross_method_distance"]) for r in records)
    agree_instances = sum(1 for r in records
                          if not r["disagreements"] and all(d <= MATCH_TOL for d in r["cross_method_distance"]))
    worst = {}
    for r in records:
        for name, ms in r["margins"].items():
            if ms:
                worst[name] = max(worst.get(name, -math.inf), max(ms))
        report.violations += len(r["violations"])
        report.diagnostics.extend(f"potential {r['index']}: {d}" for d in r["disagreements"])
        report.diagnostics.extend(f"potential {r['index']}: {w}" for w in r["warnings"])
    report.summary = {
        "potentials": len(records),
        "eigenvalues_tested": n_eig,
        "excluded_near_band": sum(r["excluded_near_band"] for r in records),
        "pairs_within_1e-6": close,
        "instances_agreeing": agree_instances,
        "agreement_fraction": agree_instances / len(records) if records else 1.0,
        "method_disagreements": sum(len(r["disagreements"]) for r in records),
        "max_cross_method_distance": max((d for r in records for d in r["cross_method_distance"]), default=0.0),
    }
    for name, m in worst.items():
        report.summary[f"max_margin {name}"] = m
    return report


# --------------------------------------------------------------------------
# sharpness of the L1 region
# --------------------------------------------------------------------------

def delta_eigenvalue(omega: complex) -> complex:
    """``k + 1/k`` with ``1/k - k = omega``: the eigenvalue of the
    single-site potential ``omega`` (when ``|k| < 1``)."""
    k = delta_k(omega)
    return k + 1.0 / k


def sharpness_sweep(Q: float, count: int, grid: int = 256) -> VerificationReport:
    """Locate the eigenvalue of ``omega * delta_0`` for ``omega = Q e^{iθ}``,
    ``θ = 2πj/count``, and check that it lies on the L1 boundary
    ``|lam**2 - 4| = Q**2`` and equals ``k + 1/k`` with ``1/k - k = omega``.

    Couplings within ``BAND_SKIP`` of the segment [-2i, 2i] have no
    eigenvalue and are skipped with a reason.
    """
    Q = float(Q)
    if not Q > 0:
        raise ValueError("Q must be positive")
    if count < 1:
        raise ValueError("count must be >= 1")
    report = VerificationReport("sharpness", {"Q": Q, "count": count, "grid": grid})
    skipped = 0
    worst_boundary = 0.0
    worst_value = 0.0
    for j in range(count):
        theta = 2 * math.pi * j / count
        omega = Q * complex(math.cos(theta), math.sin(theta))
        rec: dict = {"theta": theta, "omega": [omega.real, omega.imag]}
        if abs(omega.real) <= BAND_SKIP and abs(omega.imag) <= 2.0 + BAND_SKIP:
            rec["skipped"] = "omega lies on [-2i, 2i]: the eigenvalue is absorbed by the band"
            skipped += 1
            report.records.append(rec)
            continue
        ref = delta_eigenvalue(omega)
        res = locate_eigenvalues_wronskian(PotentialSpec.delta(omega), grid=grid)
        rec["reference"] = [ref.real, ref.imag]
        if len(res) != 1:
            rec["error"] = f"expected one eigenvalue, found {len(res)}"
            report.violations += 1
            report.diagnostics.append(f"theta={theta:.6g}: {rec['error']}")
            report.records.append(rec)
            continue
        lam = complex(res.eigenvalues[0])
        boundary = abs(abs((lam - 2) * (lam + 2)) - Q * Q)
        value = abs(lam - ref)
        rec.update(eigenvalue=[lam.real, lam.imag], boundary_residual=boundary, reference_error=value)
        worst_boundary = max(worst_boundary, boundary)
        worst_value = max(worst_value, value)
        if boundary > SHARP_BOUNDARY_TOL or value > SHARP_VALUE_TOL:
            report.violations += 1
            report.diagnostics.append(f"theta={theta:.6g}: boundary {boundary:.3g}, value {value:.3g}")
        report.records.append(rec)
    report.summary = {"phases": count, "boundary_hits": count - skipped - report.violations,
                      "skipped": skipped, "max_boundary_residual": worst_boundary,
                      "max_reference_error": worst_value}
    return report


# --------------------------------------------------------------------------
# Birman–Schwinger bound audit
# --------------------------------------------------------------------------

def bs_bounds(v: PotentialSpec, lam: complex, p_values: Sequence[float] = DEFAULT_P_VALUES) -> dict[str, float]:
    """Upper bounds on ``‖K(lam)‖``.

    ``l1``: ``‖v‖₁ / sqrt|lam²-4|``; ``geom[p]``: ``‖v‖_p/|k-1/k| *
    ((1+|k|^q)/(1-|k|^q))^{1/q}`` (``p = inf`` is the ``q = 1`` case);
    ``interp[p]``: ``‖v‖_p / (|lam²-4|^{1/2p} dist^{1-1/p})``.
    """
    lam = complex(lam)
    k = inverse_joukowsky(lam)
    r = abs(k)
    t = -math.log(r)
    root = math.sqrt(abs((lam - 2) * (lam + 2)))
    d = dist_to_band(lam)
    out = {"l1": v.norm(1.0) / root}
    for p in p_values:
        q = holder_dual(p)
        # (1 + r^q)/(1 - r^q) = coth(q t / 2)
        out[f"geom[p={_p_key(p)}]"] = v.norm(p) / root / math.tanh(q * t / 2.0) ** (1.0 / q)
        if p == INF:
            out[f"interp[p={_p_key(p)}]"] = v.norm(p) / d
        else:
            out[f"interp[p={_p_key(p)}]"] = v.norm(p) / (root ** (1.0 / p) * d ** (1.0 - 1.0 / p))
    return out


def default_lambda_grid(n: int = 200, seed: int = 0, min_dist: float = 0.1,
                        box: tuple[float, float] = (6.0, 4.0)) -> list[complex]:
    """``n`` deterministic points in ``|Re| <= box[0]``, ``|Im| <= box[1]``
    at band distance at least ``min_dist``."""
    rng = potential_rng(seed, 2 ** 63)
    pts: list[complex] = []
    while len(pts) < n:
        x, y = (rng.random(2) * 2 - 1) * np.array(box)
        z = complex(x, y)
        if dist_to_band(z) >= min_dist:
            pts.append(z)
    return pts


def _audit_one(args) -> dict:
    idx, v, lams, p_values = args
    rec = {"index": idx, "norms": {_p_key(p): v.norm(p) for p in (1.0,) + tuple(p_values)},
           "points": [], "violations": []}
    if v.is_zero():
        return rec
    for lam in lams:
        K = build_bs_matrix(v, lam)
        nrm = bs_operator_norm(K)
        bounds = bs_bounds(v, lam, p_values)
        margins = {name: nrm - b for name, b in bounds.items()}
        rec["points"].append({"lambda": [lam.real, lam.imag], "norm": nrm, "margins": margins})
        for name, b in bounds.items():
            if nrm > b * (1.0 + BOUND_SLACK):
                rec["violations"].append(f"lambda={lam:.6g}: norm {nrm:.12g} > {name} bound {b:.12g}")
    return rec


def audit_bs_bounds(vs: Sequence[PotentialSpec], lam_grid: Sequence[complex],
                    p_values: Sequence[float] = DEFAULT_P_VALUES,
                    workers: int | None = None) -> VerificationReport:
    """Compare ``‖K(lam)‖`` with every bound of :func:`bs_bounds`; a violation
    is ``norm > bound * (1 + 1e-8)``. Margins are ``norm - bound``."""
    p_values = tuple(float(p) for p in p_values)
    lam_grid = [complex(z) for z in lam_grid]
    for z in lam_grid:
        if dist_to_band(z) == 0.0:
            raise ValueError(f"grid point {z} lies on the band")
    jobs = [(i, v, lam_grid, p_values) for i, v in enumerate(vs)]
    records = _pmap(_audit_one, jobs, workers)
    report = VerificationReport("bs-bounds", {"potentials": len(vs), "grid_points": len(lam_grid),
                                              "p_values": [_json_float(p) for p in p_values]}, records)
    worst: dict[str, float] = {}
    for r in records:
        report.violations += len(r["violations"])
        report.diagnostics.extend(f"potential {r['index']}: {d}" for d in r["violations"])
        for pt in r["points"]:
            for name, m in pt["margins"].items():
                rel = m / (pt["norm"] - m) if pt["norm"] - m > 0 else m
                worst[name] = max(worst.get(name, -math.inf), rel)
    report.summary = {"checks": sum(len(r["points"]) for r in records) * (1 + 2 * len(p_values))}
    for name, m in worst.items():
        report.summary[f"max_relative_margin {name}"] = m
    return report


# --------------------------------------------------------------------------
# non-inclusion of the Lp and Interp regions
# --------------------------------------------------------------------------

def non_inclusion_search(p: float, Q: float, resolution: float = 0.005) -> dict:
    """Grid search of the first quadrant for points in one of the Lp
    (``q`` dual to ``p``) and Interp regions but not the other.

    Returns counts and, when they exist, the witness in each difference
    that lies deepest inside its own region.
    """
    q = holder_dual(p)
    lp_curve = sample_lp_boundary(Q, q, 400)
    in_curve = sample_interp_boundary(Q, p, 400)
    pts = np.concatenate([lp_curve.points, in_curve.points])
    xmax = float(pts.real.max()) * 1.02 + resolution
    ymax = float(pts.imag.max()) * 1.02 + resolution
    xs = np.arange(0.0, xmax + resolution, resolution)
    ys = np.arange(0.0, ymax + resolution, resolution)
    lp_reg = EnclosureRegion.lp(Q, q)
    in_reg = EnclosureRegion.interp(Q, p)
    best_a = best_b = None
    count_a = count_b = 0
    for x in xs:
        for y in ys:
            lam = complex(x, y)
            a = lp_region_contains(lam, Q, q)
            b = interp_region_contains(lam, Q, p)
            if a and not b:
                count_a += 1
                depth = -lp_reg.margin(lam) + in_reg.margin(lam)
                if best_a is None or depth > best_a[1]:
                    best_a = (lam, depth)
            elif b and not a:
                count_b += 1
                depth = -in_reg.margin(lam) + lp_reg.margin(lam)
                if best_b is None or depth > best_b[1]:
                    best_b = (lam, depth)

    def witness(best):
        if best is None:
            return None
        lam = best[0]
        return {"lambda": [lam.real, lam.imag], "lp_margin": lp_reg.margin(lam),
                "interp_margin": in_reg.margin(lam)}

    return {
        "p": _json_float(float(p)), "q": q, "Q": Q, "resolution": resolution,
        "grid_shape": [int(xs.size), int(ys.size)],
        "lp_minus_interp_count": count_a, "interp_minus_lp_count": count_b,
        "lp_minus_interp_witness": witness(best_a),
        "interp_minus_lp_witness": witness(best_b),
        "mutually_non_inclusive": count_a > 0 and count_b > 0,
    }
