import itertools

import numpy as np
import pytest

from capra.l0core import SupportSet, l0, level_set_contains, project, support


@pytest.mark.parametrize("x, tol, expected", [([0, 0, 0], 0, 0), ([0, 5, 0], 0, 1), ([1e-12, 2, -3], 1e-9, 2)])
def test_l0_fixtures(x, tol, expected):
    assert l0(x, tol) == expected


@pytest.mark.parametrize("x, expected", [([0, 5, 0], (2,)), ([0, 0], ()), ([1, 0, -2], (1, 3))])
def test_support_fixtures(x, expected):
    K = support(x)
    assert K.indices == expected and len(K) == l0(x)
    assert K.to_json() == list(expected)


def test_project_fixtures():
    np.testing.assert_array_equal(project([1, 2, 3], SupportSet((1, 3), 3)), [1, 0, 3])
    np.testing.assert_array_equal(project([1, 2], SupportSet((), 2)), [0, 0])
    np.testing.assert_array_equal(project([4, -1], SupportSet((1, 2), 2)), [4, -1])
    with pytest.raises(ValueError):
        project([1, 2], SupportSet((1,), 3))


def test_project_idempotent_and_self_dual(rng):
    for _ in range(50):
        d = int(rng.integers(1, 7))
        x, y = rng.normal(size=d), rng.normal(size=d)
        K = SupportSet.from_iterable(np.flatnonzero(rng.random(d) < 0.5) + 1, d)
        px = project(x, K)
        np.testing.assert_array_equal(project(px, K), px)
        assert np.isclose(px @ y, x @ project(y, K))


def test_level_set_fixtures_and_errors():
    assert level_set_contains([0, 5, 0], 1)
    assert not level_set_contains([1, 1, 1], 2)
    assert level_set_contains([0, 0, 0], 0)
    with pytest.raises(ValueError):
        level_set_contains([1, 2], 3)
    with pytest.raises(ValueError):
        l0([1, 2], tol=-1)


def test_support_set_validation():
    with pytest.raises(ValueError):
        SupportSet((2, 1), 3)
    with pytest.raises(ValueError):
        SupportSet((0, 1), 3)
    with pytest.raises(ValueError):
        SupportSet((4,), 3)
    assert SupportSet.from_iterable([3, 1, 3], 3).indices == (1, 3)


def test_invariants(rng):
    for _ in range(200):
        d = int(rng.integers(1, 9))
        x = rng.normal(size=d) * (rng.random(d) < 0.6)
        y = rng.normal(size=d) * (rng.random(d) < 0.6)
        for rho in (-3.0, -0.5, 0.5, 3.0):
            assert l0(rho * x) == l0(x)
        assert l0(x + y) <= l0(x) + l0(y)
        for k in range(d + 1):
            by_enum = any(
                np.array_equal(project(x, SupportSet(K, d)), x)
                for size in range(k + 1)
                for K in itertools.combinations(range(1, d + 1), size)
            )
            assert level_set_contains(x, k) == by_enum


def test_vector_validation():
    with pytest.raises(ValueError):
        l0([])
    with pytest.raises(ValueError):
        l0([[1, 2]])
    with pytest.raises(ValueError):
        l0([1, float("nan")])
