import json
import math

import numpy as np
import pytest

from jacobi_enclosures.domain import INF, PotentialSpec, inverse_joukowsky
from jacobi_enclosures.experiments import (EnsembleConfig, VerificationReport, audit_bs_bounds,
                                           bs_bounds, default_lambda_grid, delta_eigenvalue,
                                           generate_ensemble, non_inclusion_search,
                                           sharpness_sweep, truncate_potential, verify_enclosures)

SQRT5 = 2.23606797749978969641


class TestEnsemble:
    def test_empty(self):
        assert generate_ensemble(EnsembleConfig(seed=1, count=0)) == []

    def test_deterministic(self):
        cfg = EnsembleConfig(seed=42, count=5, support_width=7, magnitude_cap=2)
        a, b = generate_ensemble(cfg), generate_ensemble(cfg)
        assert all(x == y for x, y in zip(a, b))
        assert all(np.max(np.abs(x.values)) <= 2 for x in a)
        assert all(x.offset == -3 and len(x) == 7 for x in a)

    def test_prefix_stable_and_seed_sensitive(self):
        small = generate_ensemble(EnsembleConfig(seed=9, count=3))
        big = generate_ensemble(EnsembleConfig(seed=9, count=10))
        assert all(x == y for x, y in zip(small, big))
        other = generate_ensemble(EnsembleConfig(seed=10, count=1))
        assert not other[0] == small[0]

    def test_uniform_in_disk(self):
        vs = generate_ensemble(EnsembleConfig(seed=3, count=400, support_width=21, magnitude_cap=1))
        z = np.concatenate([v.values for v in vs])
        # |z|**2 is uniform on [0, 1] for a uniform disk
        assert abs(np.mean(np.abs(z) ** 2) - 0.5) < 0.01
        assert abs(np.mean(z)) < 0.02

    def test_validation(self):
        with pytest.raises(ValueError):
            EnsembleConfig(count=1, support_width=4)
        with pytest.raises(ValueError):
            EnsembleConfig(count=1, magnitude_cap=0)
        with pytest.raises(ValueError):
            EnsembleConfig(count=-1)
        with pytest.raises(ValueError):
            EnsembleConfig(count=1, p_values=(1.0,))


class TestVerify:
    def test_delta_one_on_boundary(self):
        r = verify_enclosures([PotentialSpec.delta(1)], p_values=(2.0,))
        rec = r.records[0]
        assert rec["eigenvalues"] == [[pytest.approx(SQRT5, abs=1e-12), pytest.approx(0, abs=1e-12)]]
        assert abs(rec["margins"]["L1"][0]) <= 1e-9
        assert r.violations == 0

    def test_zero_potential(self):
        r = verify_enclosures([PotentialSpec.zero()])
        assert r.violations == 0
        assert r.records[0]["eigenvalues"] == []

    def test_small_ensemble(self):
        vs = generate_ensemble(EnsembleConfig(seed=7, count=6))
        r = verify_enclosures(vs)
        assert r.passed
        assert r.summary["method_disagreements"] == 0
        assert r.summary["max_cross_method_distance"] <= 1e-6
        names = set(r.records[0]["margins"])
        assert {"L1", "Lp[p=2]", "Interp[p=inf]", "Lp[p=1.33333]"} <= names

    def test_detects_violation_when_norm_is_understated(self):
        # claiming a tail of -1 shrinks every region below the true eigenvalue
        v = PotentialSpec.delta(3)
        tails = [{"1": -2.0, "2": -2.0}]
        r = verify_enclosures([v], p_values=(2.0,), tails=tails)
        assert r.violations > 0 and not r.passed

    def test_report_json(self):
        vs = generate_ensemble(EnsembleConfig(seed=1, count=2, support_width=5))
        r = verify_enclosures(vs, config={"note": "x"})
        d = json.loads(r.to_json())
        assert d["violations"] == 0 and d["config"]["note"] == "x"
        assert {"version", "timestamp", "records", "summary"} <= set(d)
        assert "PASS" in r.summary_table()

    def test_deterministic_modulo_timestamp(self):
        vs = generate_ensemble(EnsembleConfig(seed=2, count=2, support_width=5))
        a = verify_enclosures(vs).to_dict()
        b = verify_enclosures(vs).to_dict()
        a.pop("timestamp"), b.pop("timestamp")
        assert json.dumps(a) == json.dumps(b)

    def test_parallel_matches_serial(self):
        vs = generate_ensemble(EnsembleConfig(seed=4, count=3, support_width=5))
        a = verify_enclosures(vs, workers=1).to_dict()
        b = verify_enclosures(vs, workers=2).to_dict()
        a.pop("timestamp"), b.pop("timestamp")
        assert json.dumps(a) == json.dumps(b)

    def test_truncated_slowly_decaying(self):
        v, tails = truncate_potential(lambda n: 1.5 / (1 + abs(n)) ** 1.2, 10, tail_cutoff=10_000)
        assert tails["inf"] == pytest.approx(1.5 / 12 ** 1.2)
        assert tails["2"] > 0
        r = verify_enclosures([v], tails=[tails])
        assert r.passed


class TestSharpness:
    def test_reference_formula(self):
        assert delta_eigenvalue(3j) == pytest.approx(SQRT5 * 1j, abs=1e-15)
        assert delta_eigenvalue(2.0) == pytest.approx(math.sqrt(8), abs=1e-15)

    def test_real_phase_on_boundary(self):
        r = sharpness_sweep(1.3, 1)
        rec = r.records[0]
        assert rec["eigenvalue"][0] == pytest.approx(math.sqrt(4 + 1.69), abs=1e-12)
        assert r.passed

    def test_skips_band_couplings(self):
        r = sharpness_sweep(1.0, 4)
        skipped = [rec for rec in r.records if "skipped" in rec]
        assert len(skipped) == 2  # omega = i and omega = -i
        assert r.summary["skipped"] == 2 and r.passed

    def test_sweep(self):
        r = sharpness_sweep(2.75, 24)
        assert r.passed and r.summary["boundary_hits"] == 24
        assert r.summary["max_boundary_residual"] <= 1e-9

    def test_validation(self):
        with pytest.raises(ValueError):
            sharpness_sweep(0, 3)
        with pytest.raises(ValueError):
            sharpness_sweep(1, 0)


class TestAudit:
    def test_delta_equals_building_block(self):
        omega = 2 - 1j
        lam = 3.0
        k = inverse_joukowsky(lam)
        b = bs_bounds(PotentialSpec.delta(omega), lam, (2.0, INF))
        assert b["l1"] == pytest.approx(abs(omega) / abs(k - 1 / k), rel=1e-14)
        r = audit_bs_bounds([PotentialSpec.delta(omega)], [lam])
        pt = r.records[0]["points"][0]
        assert pt["norm"] == pytest.approx(abs(omega) / abs(k - 1 / k), rel=1e-14)
        assert pt["margins"]["l1"] <= 0
        assert r.passed

    def test_tiny_entry(self):
        r = audit_bs_bounds([PotentialSpec(0, [1e-12, 0])], [2 + 1j], (2.0,))
        pt = r.records[0]["points"][0]
        assert pt["norm"] < 1e-11
        assert all(m < 0 for m in pt["margins"].values())

    def test_small_audit(self):
        vs = generate_ensemble(EnsembleConfig(seed=5, count=4))
        r = audit_bs_bounds(vs, default_lambda_grid(30, seed=1))
        assert r.passed

    def test_grid(self):
        g = default_lambda_grid(50, seed=3)
        assert len(g) == 50
        assert g == default_lambda_grid(50, seed=3)
        with pytest.raises(ValueError):
            audit_bs_bounds([PotentialSpec.delta(1)], [0.5])


def test_report_summary_table_fail():
    r = VerificationReport("x", {}, violations=2)
    assert not r.passed and "FAIL" in r.summary_table()


def test_non_inclusion_p_inf_regions_coincide_on_real_axis():
    out = non_inclusion_search(INF, 0.5, resolution=0.02)
    assert out["grid_shape"][0] > 10
    assert set(out) >= {"lp_minus_interp_count", "interp_minus_lp_count", "mutually_non_inclusive"}
