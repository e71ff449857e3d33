from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from metricjet.cantor import cantor_distance, cantor_distance_array, cantor_locate, triadic_code

ORACLE_DEPTH = 20


def oracle_intervals(depth: int = ORACLE_DEPTH) -> tuple[np.ndarray, np.ndarray]:
    """Level intervals of 9K at absolute width 3^-depth, plus the point 18.

    K is contained in 3K, so on [0, 10] the set K_inf coincides with
    9K together with 18, the left end of the next copy.
    """
    lo = np.array([0.0])
    w = 1.0
    for _ in range(depth + 2):
        w /= 3.0
        lo = np.concatenate([lo, lo + 2 * w])
    lo = np.sort(lo) * 9.0
    width = 9.0 * w
    return np.append(lo, 18.0), np.append(lo + width, 18.0)


def oracle_distance(x: np.ndarray, iv) -> np.ndarray:
    lo, hi = iv
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    neg = x < 0
    out[neg] = -x[neg]
    xp = x[~neg]
    i = np.searchsorted(lo, xp, side="right") - 1  # interval starting at or left of x
    left = np.maximum(xp - hi[i], 0.0)
    right = lo[np.minimum(i + 1, len(lo) - 1)] - xp
    out[~neg] = np.minimum(left, right)
    return out


@pytest.fixture(scope="module")
def pts():
    return oracle_intervals()


def test_distance_examples():
    assert cantor_distance(-2) == 2
    assert cantor_distance(1) == 0
    assert cantor_distance(Fraction(1, 2)) == Fraction(1, 6)
    assert cantor_distance(0.5) == pytest.approx(1 / 6, abs=1e-15)


def test_oracle_itself_on_known_values(pts):
    np.testing.assert_allclose(oracle_distance(np.array([0.5, 1.0, 1.5, 4.5, 0.25]), pts),
                               [1 / 6, 0, 1 / 2, 3 / 2, 0], atol=3.0**-ORACLE_DEPTH)


def test_matches_oracle_on_uniform_samples(pts):
    x = np.random.default_rng(7).uniform(-1, 10, 10_000)
    got = cantor_distance_array(x)
    want = oracle_distance(x, pts)
    assert np.max(np.abs(got - want)) <= 3.0**-ORACLE_DEPTH


def test_locate_examples():
    loc = cantor_locate(0)
    assert loc.in_kinf and loc.distance == 0
    loc = cantor_locate(Fraction(1, 3))
    assert loc.in_kinf and loc.in_kminus and not loc.in_kplus
    loc = cantor_locate(0.5)
    assert not loc.in_kinf and loc.bracket == (Fraction(1, 3), Fraction(2, 3))
    assert loc.distance == Fraction(1, 6)
    assert cantor_locate(2 / 3).in_kplus
    assert cantor_locate(Fraction(1, 4)).in_kinf and not cantor_locate(Fraction(1, 4)).in_kplus


def test_locate_serializes():
    d = cantor_locate(0.5).to_dict()
    assert d["in_Kinf"] is False and d["bracket"] == pytest.approx([1 / 3, 2 / 3])


def test_triadic_code_periodic():
    c = triadic_code(Fraction(1, 4))  # 0.020202..._3
    assert c.period and set(c.period) == {0, 2} and c.k is None
    c = triadic_code(Fraction(7, 1))  # 21_3
    assert c.digit(1) == 2 and c.digit(0) == 1 and c.k == 0
    with pytest.raises(ValueError):
        triadic_code(Fraction(-1, 2))


rationals = st.fractions(min_value=0, max_value=30, max_denominator=3**6 * 8)


@given(rationals)
def test_self_similarity_exact(q):
    assert cantor_distance(q / 3) == cantor_distance(q) / 3
    assert cantor_distance(q * 3) == cantor_distance(q) * 3


@given(rationals, rationals)
def test_one_lipschitz_exact(p, q):
    assert abs(cantor_distance(p) - cantor_distance(q)) <= abs(p - q)


@given(rationals)
def test_float_path_agrees_with_exact(q):
    assert cantor_distance(float(q)) == pytest.approx(float(cantor_distance(q)), abs=1e-12 * (1 + float(q)))


@given(st.floats(-5, 50, allow_nan=False))
def test_distance_nonnegative_and_bounded(x):
    d = cantor_distance(x)
    assert d >= 0
    if x >= 0:
        assert d <= max(x, 1.0) / 2 + 1e-12
