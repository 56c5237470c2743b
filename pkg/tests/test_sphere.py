import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zonecover import (
    Arrangement,
    DimensionMismatch,
    InvalidCount,
    InvalidDimension,
    UnitVector,
    ZeroVector,
    ZoneSet,
    apple_peel,
    circle_distance,
    hyperplane_distance,
    normalize,
    random_arrangement,
)

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


def vectors(d):
    return st.lists(finite, min_size=d, max_size=d).filter(lambda v: np.linalg.norm(v) > 1e-6)


def test_normalize_examples():
    np.testing.assert_allclose(normalize([3, 4]).coords, [0.6, 0.8], rtol=0, atol=1e-15)
    assert normalize([1, 0, 0]).coords.tolist() == [1.0, 0.0, 0.0]
    with pytest.raises(ZeroVector):
        normalize([0, 0])


def test_unit_vector_rejects_bad_input():
    with pytest.raises(InvalidDimension):
        UnitVector([1.0])
    with pytest.raises(ZeroVector):
        UnitVector([1e-301, 0.0])
    with pytest.raises(ZeroVector):
        UnitVector([np.nan, 1.0])


def test_unit_vector_is_immutable():
    u = normalize([1, 2, 3])
    with pytest.raises(ValueError):
        u.coords[0] = 5.0


@pytest.mark.parametrize(
    "u, v, expected",
    [
        ((1, 0), (0, 1), 0.0),
        ((0, 0, 1), (0, 0, 1), 1.0),
        ((1 / math.sqrt(2), 0, 1 / math.sqrt(2)), (0, 0, 1), 1 / math.sqrt(2)),
    ],
)
def test_hyperplane_distance_examples(u, v, expected):
    assert hyperplane_distance(u, v) == pytest.approx(expected, abs=1e-15)


def test_distance_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        hyperplane_distance([1, 0], [0, 0, 1])
    with pytest.raises(DimensionMismatch):
        circle_distance([1, 0], [0, 0, 1])


def test_circle_distance_examples():
    assert circle_distance((1, 0, 0), (0, 0, 1)) == 0.0
    assert circle_distance((0, 0, 1), (0, 0, 1)) == pytest.approx(math.pi / 2, abs=1e-15)
    lam = math.pi / 6
    # oracle: arcsin|sin lam| evaluated directly
    oracle = math.asin(abs(math.sin(lam)))
    assert oracle == pytest.approx(lam, abs=1e-15)
    assert circle_distance((math.cos(lam), math.sin(lam), 0), (0, 1, 0)) == pytest.approx(oracle, abs=1e-15)


def test_apple_peel_small():
    np.testing.assert_allclose(apple_peel(1).matrix, [[0, 1, 0]], atol=1e-15)
    a2 = apple_peel(2)
    np.testing.assert_allclose(a2.matrix, [[0, 1, 0], [-1, 0, 0]], atol=1e-15)
    for v in a2.normals:
        assert np.dot(v.coords, [0, 0, 1]) == 0.0


def test_apple_peel_four_angles_are_multiples_of_quarter_pi():
    V = apple_peel(4).matrix
    ang = np.arccos(np.clip(V @ V.T, -1, 1))
    k = ang / (math.pi / 4)
    np.testing.assert_allclose(k, np.round(k), atol=1e-12)
    off = ang[~np.eye(4, dtype=bool)]
    assert off.min() > 0.7


@pytest.mark.parametrize("n", [1, 2, 5, 8, 13])
def test_apple_peel_passes_through_poles(n):
    V = apple_peel(n).matrix
    assert np.all(V @ np.array([0.0, 0.0, 1.0]) == 0.0)
    assert np.all(V @ np.array([0.0, 0.0, -1.0]) == 0.0)


@pytest.mark.parametrize("n", [0, -3])
def test_apple_peel_invalid(n):
    with pytest.raises(InvalidCount):
        apple_peel(n)


def test_random_arrangement_deterministic():
    a, b = random_arrangement(3, 5, 7), random_arrangement(3, 5, 7)
    assert np.array_equal(a.matrix, b.matrix)
    assert not np.array_equal(a.matrix, random_arrangement(3, 5, 8).matrix)


def test_random_arrangement_unit_norms():
    a = random_arrangement(4, 50, 3)
    np.testing.assert_allclose(np.linalg.norm(a.matrix, axis=1), 1.0, atol=1e-12)


def test_random_arrangement_centered():
    # 1e4 uniform directions on S^1: each coordinate mean has sd ~ 0.007
    a = random_arrangement(2, 10_000, 1)
    assert np.all(np.abs(a.matrix.mean(axis=0)) <= 0.05)


def test_random_arrangement_invalid():
    with pytest.raises(InvalidDimension):
        random_arrangement(1, 3, 0)
    with pytest.raises(InvalidCount):
        random_arrangement(3, 0, 0)


def test_arrangement_validation():
    with pytest.raises(DimensionMismatch):
        Arrangement(3, (normalize([1, 0]),))
    with pytest.raises(InvalidCount):
        Arrangement(3, ())
    with pytest.raises(ZeroVector):
        Arrangement.from_array([[0, 0, 0]])


def test_antipodal_normals_kept():
    a = Arrangement.from_array([[0, 0, 1], [0, 0, -1]])
    assert a.n == 2


def test_zoneset_validation():
    arr = apple_peel(2)
    assert ZoneSet.equal(arr, 0.3).half_widths == (0.3, 0.3)
    with pytest.raises(InvalidCount):
        ZoneSet(arr, (0.1,))
    with pytest.raises(ValueError):
        ZoneSet(arr, (0.0, 0.1))
    with pytest.raises(ValueError):
        ZoneSet(arr, (0.1, 2.0))


@settings(max_examples=200, deadline=None)
@given(vectors(3), vectors(3))
def test_circle_distance_is_arcsin_of_hyperplane_distance(u, v):
    assert circle_distance(u, v) == pytest.approx(math.asin(hyperplane_distance(u, v)), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(vectors(4), vectors(4))
def test_hyperplane_distance_sign_invariant(u, v):
    u, v = normalize(u), normalize(v)
    h = hyperplane_distance(u, v)
    for a, b in [(-u, v), (u, -v), (-u, -v)]:
        assert hyperplane_distance(a, b) == pytest.approx(h, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 6).flatmap(vectors))
def test_normalize_idempotent(v):
    once = normalize(v)
    twice = normalize(once.coords)
    np.testing.assert_allclose(twice.coords, once.coords, rtol=0, atol=1e-15)
    assert abs(np.linalg.norm(once.coords) - 1.0) <= 1e-12
