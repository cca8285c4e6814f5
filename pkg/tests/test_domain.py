import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_enclosures.domain import (INF, PotentialSpec, complex_sgn, dist_to_band, holder_dual,
                                      inverse_joukowsky, joukowsky, lp_norm, parse_complex)

# mpmath, 40 digits: small root of k**2 - 2.5i k + 1 = 0
K_2P5I = -0.35078105935821217162j
# mpmath, 40 digits: joukowsky(-0.35078i)
LAM_K035078 = 2.50000966873824066869j


finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def test_joukowsky_examples():
    assert joukowsky(0.5) == 2.5
    assert joukowsky(1j) == 0
    assert joukowsky(-0.35078j) == pytest.approx(LAM_K035078, abs=1e-15)


def test_joukowsky_rejects_zero_and_nonfinite():
    with pytest.raises(ValueError):
        joukowsky(0)
    with pytest.raises(ValueError):
        joukowsky(complex(math.nan, 0))


def test_inverse_joukowsky_examples():
    assert inverse_joukowsky(2.5) == pytest.approx(0.5, abs=1e-16)
    assert inverse_joukowsky(0) == -1j
    assert inverse_joukowsky(2.5j) == pytest.approx(K_2P5I, abs=1e-16)
    assert joukowsky(inverse_joukowsky(2.5j)) == pytest.approx(2.5j, abs=1e-15)


@pytest.mark.parametrize("x", [-2.0, -1.3, 0.0, 0.7, 2.0])
def test_inverse_joukowsky_segment_branch(x):
    k = inverse_joukowsky(x)
    assert abs(k) == pytest.approx(1.0, abs=1e-15)
    assert k.imag <= 0.0
    assert joukowsky(k) == pytest.approx(x, abs=1e-15)


def test_inverse_joukowsky_large_lambda_no_cancellation():
    # k ~ 1/lam: the naive (lam - w)/2 loses every digit here
    lam = 1e9 + 1e9j
    k = inverse_joukowsky(lam)
    assert abs(k * lam - 1) < 1e-15
    assert abs(joukowsky(k) - lam) <= 1e-12 * abs(lam)


@settings(max_examples=300, deadline=None)
@given(finite, finite)
def test_inverse_joukowsky_properties(x, y):
    lam = complex(x, y)
    if dist_to_band(lam) == 0.0:
        return
    k = inverse_joukowsky(lam)
    assert abs(k) <= 1.0
    if dist_to_band(lam) > 1e-12:
        # closer to the band 1 - |k| is below the double resolution
        assert abs(k) < 1.0
    assert abs(joukowsky(k) - lam) <= 1e-12 * (1 + abs(lam))
    # the other root is 1/k
    assert abs(k * (lam - k) - 1) <= 1e-12 * (1 + abs(lam))
    kc = inverse_joukowsky(lam.conjugate())
    assert abs(kc - k.conjugate()) <= 1e-15 * (1 + abs(k))


def test_dist_to_band_examples():
    assert dist_to_band(3) == 1
    assert dist_to_band(1 + 1j) == 1
    assert dist_to_band(3 + 4j) == pytest.approx(math.sqrt(17), rel=1e-15)
    assert dist_to_band(-1.5) == 0


@given(finite, finite)
def test_dist_to_band_symmetry(x, y):
    lam = complex(x, y)
    d = dist_to_band(lam)
    assert d == dist_to_band(-lam) == dist_to_band(lam.conjugate())


def test_complex_sgn():
    assert complex_sgn(0) == 0
    assert complex_sgn(-4) == -1
    assert complex_sgn(3 + 4j) == pytest.approx(0.6 + 0.8j, abs=1e-16)


def test_lp_norm_examples():
    w = 2 - 1j
    assert lp_norm(PotentialSpec.delta(w), 1) == pytest.approx(abs(w), rel=1e-15)
    assert lp_norm([1, 1j, -1], 2) == pytest.approx(math.sqrt(3), rel=1e-15)
    assert lp_norm([1, -2j, 0.5], INF) == 2
    with pytest.raises(ValueError):
        lp_norm([1], 0.5)


def test_lp_norm_large_p_no_overflow():
    v = [300.0, 200.0]
    assert lp_norm(v, 400) == pytest.approx(300.0, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=12),
       st.floats(1, 8), st.floats(0, 8), st.integers(-20, 20))
def test_lp_norm_nesting_and_translation(vals, p, dp, shift):
    r = p + dp
    v = PotentialSpec(0, vals)
    assert v.norm(r) <= v.norm(p) * (1 + 1e-12) + 1e-300
    assert v.norm(INF) <= v.norm(p) * (1 + 1e-12) + 1e-300
    assert v.shifted(shift).norm(p) == v.norm(p)


def test_holder_dual():
    assert holder_dual(2) == 2
    assert holder_dual(INF) == 1
    assert holder_dual(4 / 3) == pytest.approx(4, rel=1e-14)
    for bad in (1, 0.5, math.nan):
        with pytest.raises(ValueError):
            holder_dual(bad)


class TestPotentialSpec:
    def test_json_round_trip(self):
        v = PotentialSpec(-3, [1, 2j, -0.5 + 0.25j])
        text = v.to_json()
        assert PotentialSpec.from_json(text) == v
        assert '"offset": -3' in text

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            PotentialSpec(0, [])
        with pytest.raises(ValueError):
            PotentialSpec(0, [math.inf])
        with pytest.raises(ValueError):
            PotentialSpec.from_dict({"offset": 0.5, "values": [[1, 0]]})
        with pytest.raises(ValueError):
            PotentialSpec.from_dict({"values": [[1, 0]]})
        with pytest.raises(ValueError):
            PotentialSpec.from_dict({"offset": 0, "values": [[1, 0, 2]]})

    def test_values_read_only(self):
        v = PotentialSpec(0, [1, 2])
        with pytest.raises(ValueError):
            v.values[0] = 5

    def test_accessors(self):
        v = PotentialSpec(2, [0, 3, 0, 1j, 0])
        assert v.last == 6
        assert v.at(3) == 3 and v.at(5) == 1j and v.at(100) == 0
        assert list(v.support()) == [3, 5]
        t = v.trimmed()
        assert t.offset == 3 and list(t.values) == [3, 0, 1j]
        r = v.reversed()
        assert all(r.at(-n) == v.at(n) for n in range(-2, 10))
        assert PotentialSpec.zero().is_zero()
        assert not v.is_zero()


def test_parse_complex():
    assert parse_complex("3,0") == 3
    assert parse_complex(" -1.5 , 2e-3 ") == complex(-1.5, 2e-3)
    assert parse_complex("4") == 4
    with pytest.raises(ValueError):
        parse_complex("1,2,3")
    with pytest.raises(ValueError):
        parse_complex("a,b")


def test_cmath_branch_reference():
    # independent check of the branch on a few points: |k| < 1 root of the quadratic
    for lam in (3 + 1j, -0.1 + 0.01j, -5 - 2j):
        r1 = (lam + cmath.sqrt(lam * lam - 4)) / 2
        r2 = (lam - cmath.sqrt(lam * lam - 4)) / 2
        small = r1 if abs(r1) < abs(r2) else r2
        assert inverse_joukowsky(lam) == pytest.approx(small, abs=1e-14)
