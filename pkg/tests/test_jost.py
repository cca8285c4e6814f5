import cmath
import math

import numpy as np
import pytest

from jacobi_enclosures.domain import PotentialSpec, dist_to_band
from jacobi_enclosures.jost import (conjugate_pair_wronskian, delta_k, jost_left, jost_right,
                                    locate_eigenvalues_wronskian, recurrence_residual, wronskian,
                                    wronskian_profile)
from jacobi_enclosures.operators import stable_discrete_eigenvalues

from oracles import delta_eigenvalue_reference, match_distance

SQRT5 = 2.23606797749978969641


def random_potential(rng, width, cap=3.0, offset=None):
    vals = cap * np.sqrt(rng.random(width)) * np.exp(2j * np.pi * rng.random(width))
    return PotentialSpec(-(width // 2) if offset is None else offset, vals)


class TestJostSolutions:
    def test_free_solutions(self):
        k = 0.4 + 0.3j
        z = PotentialSpec(-2, np.zeros(5))
        r = jost_right(z, k)
        l = jost_left(z, k)
        assert np.allclose(r.samples, k ** r.sites.astype(float), rtol=1e-13)
        assert np.allclose(l.samples, k ** (-l.sites.astype(float)), rtol=1e-13)

    def test_normalisation_beyond_support(self):
        v = PotentialSpec(1, [1 - 1j, 2, 0.5j])
        k = 0.3 - 0.6j
        r = jost_right(v, k, pad=4)
        for n in range(v.last + 1, v.last + 5):
            assert r.at(n) * k ** (-n) == pytest.approx(1, abs=1e-14)
        l = jost_left(v, k, pad=4)
        for n in range(v.offset - 4, v.offset):
            assert l.at(n) * k ** n == pytest.approx(1, abs=1e-14)

    def test_recurrence_residuals(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            v = random_potential(rng, 9)
            k = 0.95 * cmath.rect(rng.random(), 2 * math.pi * rng.random()) + 0.02
            for sol in (jost_right(v, k), jost_left(v, k)):
                scale = np.max(np.abs(sol.samples))
                assert recurrence_residual(v, sol) <= 1e-13 * scale

    def test_reflection_consistency(self):
        v = PotentialSpec(-1, [1, 2j, -0.5, 0.25])
        k = 0.5 + 0.2j
        l = jost_left(v, k)
        r = jost_right(v.reversed(), k)
        assert np.allclose(l.samples, r.samples[::-1], rtol=1e-14, atol=0)
        assert l.first_site == -(r.first_site + r.samples.size - 1)

    def test_rejects_bad_k(self):
        v = PotentialSpec.delta(1)
        for k in (0, 1, -1, 1.5j, complex(math.nan, 0)):
            with pytest.raises(ValueError):
                jost_right(v, k)


class TestWronskian:
    def test_free(self):
        k = 0.3 + 0.1j
        assert wronskian(PotentialSpec.zero(), k) == pytest.approx(1 / k - k, abs=1e-14)

    def test_translation_and_site_independence(self):
        rng = np.random.default_rng(2)
        v = random_potential(rng, 7)
        k = 0.6 - 0.2j
        prof = wronskian_profile(v, k, pad=5)
        assert np.max(np.abs(prof - prof[0])) <= 1e-12 * abs(prof[0])
        assert prof[0] == pytest.approx(wronskian(v, k), rel=1e-12)
        assert wronskian(v.shifted(13), k) == pytest.approx(wronskian(v, k), rel=1e-12)

    def test_delta_zero(self):
        omega = 3j
        k = delta_k(omega)
        assert k == pytest.approx(1j * (math.sqrt(5) - 3) / 2, abs=1e-16)
        assert abs(wronskian(PotentialSpec.delta(omega), k)) <= 1e-15

    def test_unit_circle_identity(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            v = PotentialSpec(-3, rng.standard_normal(7) * 2)
            theta = rng.uniform(0.05, math.pi - 0.05) * rng.choice([-1, 1])
            k = cmath.exp(1j * theta)
            w = conjugate_pair_wronskian(v, k)
            assert np.max(np.abs(np.abs(w) - 2 * abs(k.imag))) <= 1e-10


class TestLocator:
    def test_zero_potential(self):
        assert len(locate_eigenvalues_wronskian(PotentialSpec.zero())) == 0
        assert len(locate_eigenvalues_wronskian(PotentialSpec(-2, np.zeros(4)))) == 0

    def test_delta_one(self):
        r = locate_eigenvalues_wronskian(PotentialSpec.delta(1))
        assert len(r) == 1
        assert r.eigenvalues[0] == pytest.approx(SQRT5, abs=1e-13)
        assert not r.warnings

    def test_delta_random_omegas(self):
        rng = np.random.default_rng(4)
        n = 0
        while n < 100:
            omega = complex(*(rng.uniform(-4, 4, 2)))
            if abs(omega.real) < 0.15 and abs(omega.imag) < 2.2:
                continue  # on or close to [-2i, 2i]: no eigenvalue in the annulus
            n += 1
            r = locate_eigenvalues_wronskian(PotentialSpec.delta(omega))
            assert len(r) == 1
            k = r.extra["k"][0]
            assert abs(1 / k - k - omega) <= 1e-10
            lam_ref, _ = delta_eigenvalue_reference(omega)
            assert abs(r.eigenvalues[0] - lam_ref) <= 1e-10

    def test_matches_finite_section_bidirectionally(self):
        rng = np.random.default_rng(5)
        for width in (3, 5, 7, 9):
            for _ in range(3):
                v = random_potential(rng, width)
                wr = locate_eigenvalues_wronskian(v)
                assert not wr.warnings
                fs = stable_discrete_eigenvalues(v)
                far = np.array([z for z in wr.eigenvalues if dist_to_band(z) > 0.06])
                near_ok = all(np.min(np.abs(wr.eigenvalues - z)) <= 1e-6 for z in fs.eigenvalues)
                assert near_ok
                assert all(np.min(np.abs(fs.eigenvalues - z)) <= 1e-6 for z in far)

    def test_close_pair_resolved(self):
        # symmetric two-site potential: eigenvalues come in close pairs for
        # widely separated sites
        v = PotentialSpec(0, [3] + [0] * 8 + [3])
        r = locate_eigenvalues_wronskian(v)
        assert not r.warnings
        fs = stable_discrete_eigenvalues(v)
        assert match_distance(r.eigenvalues, fs.eigenvalues) <= 1e-8

    def test_canonical_order_and_residuals(self):
        rng = np.random.default_rng(6)
        r = locate_eigenvalues_wronskian(random_potential(rng, 11))
        keys = list(zip(r.eigenvalues.real, r.eigenvalues.imag))
        assert keys == sorted(keys)
        assert np.all(r.residuals <= 1e-8)

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            locate_eigenvalues_wronskian(PotentialSpec.delta(1), grid=8)
        with pytest.raises(ValueError):
            locate_eigenvalues_wronskian(PotentialSpec.delta(1), refine_tol=0)


def test_delta_k_branch():
    for omega in (1, 3j, -2.5 + 0.3j, 0.2 - 4j):
        k = delta_k(omega)
        assert abs(k) < 1
        assert abs(1 / k - k - omega) <= 1e-14 * (1 + abs(omega))
        _, k_ref = delta_eigenvalue_reference(omega)
        assert k == pytest.approx(k_ref, abs=1e-14)
