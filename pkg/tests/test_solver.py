import math

import numpy as np
import pytest

from capra.conjugacy import PhiSpec, capra_biconjugate
from capra.norms import TopNormGauge, coordinate_norm
from capra.solver import (NonConvergenceError, SolverConfig, SolverError, concave_ascent,
                          decomposition_min, gauge_bisection, support_function_over_ball)

L2 = TopNormGauge(2, 2.0)
LINF = TopNormGauge(1, 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(max_iters=0)
    with pytest.raises(ValueError):
        SolverConfig(tol=0)
    with pytest.raises(ValueError):
        SolverConfig(step_rule="newton")
    err = NonConvergenceError("x", residual=0.5)
    assert isinstance(err, SolverError) and err.residual == 0.5


def test_support_function_fixtures():
    res = support_function_over_ball([1, 0], L2)
    assert res.value == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(res.argmax, [1, 0], atol=1e-6)
    assert res.gap <= 1e-8
    assert support_function_over_ball([1, 1], LINF).value == pytest.approx(2.0, abs=1e-9)
    res = support_function_over_ball([2, 1, 1], TopNormGauge(2, 1.0))
    assert res.value == pytest.approx(2.0, abs=1e-8)
    assert res.lower <= res.value <= res.upper + 1e-12
    assert support_function_over_ball([0, 0], L2).value == 0.0


def test_support_function_intersection_and_errors(rng):
    gauges = [TopNormGauge(1, 2.0), TopNormGauge(2, 2.0, scale=1 / math.sqrt(2))]
    x = np.array([1.0, 1.0])
    assert support_function_over_ball(x, gauges).value == pytest.approx(2.0, abs=1e-8)

    class NotSymmetric:
        def __call__(self, y):
            return abs(y[0])

    with pytest.raises(ValueError):
        support_function_over_ball(x, NotSymmetric())
    for _ in range(10):
        z = rng.normal(size=4)
        r = support_function_over_ball(z, TopNormGauge(2, 3.0))
        assert r.value == pytest.approx(coordinate_norm(z, 2, 1.5), rel=1e-7)


def quadratic(y):
    e1 = np.zeros_like(y)
    e1[0] = 1.0
    return -0.5 * float(y @ y) + y[0], e1 - y


def tent(y):
    a, b = y[0], 1.0 - y[0]
    return (a, np.array([1.0])) if a <= b else (b, np.array([-1.0]))


@pytest.mark.parametrize("rule", ["cutting-plane", "subgradient"])
def test_concave_ascent_fixtures(rule):
    cfg = SolverConfig(step_rule=rule, max_iters=4000)
    res = concave_ascent(quadratic, np.zeros(3), cfg)
    assert res.value == pytest.approx(0.5, abs=1e-5)
    np.testing.assert_allclose(res.y, [1, 0, 0], atol=5e-3)
    res = concave_ascent(tent, np.array([3.0]), cfg)
    assert res.value == pytest.approx(0.5, abs=1e-4)
    if rule == "cutting-plane":
        assert res.upper >= res.value - 1e-12
        assert res.upper - res.value <= 1e-8


def test_concave_ascent_rejects_nonfinite():
    with pytest.raises(SolverError):
        concave_ascent(lambda y: (math.nan, np.zeros_like(y)), np.zeros(2))


def test_biconjugate_objective_fixture():
    # grid oracle: max over y in [-5, 5]^2 step 0.01 of y1 - conj(y) with conj(y) = max(0, |y|_inf - 1, |y|_2 - 2)
    ax = np.arange(-500, 501) * 0.01
    Y1, Y2 = np.meshgrid(ax, ax, indexing="ij")
    conj = np.maximum.reduce([np.zeros_like(Y1), np.maximum(abs(Y1), abs(Y2)) - 1, np.hypot(Y1, Y2) - 2])
    assert float(np.max(Y1 - conj)) == pytest.approx(1.0, abs=1e-9)
    res = capra_biconjugate(PhiSpec.identity(2), [1, 0], 2)
    assert res.ascent == pytest.approx(1.0, abs=1e-7)


def test_decomposition_fixtures():
    res = decomposition_min([1, 0], [0, 1, 2], 2.0)
    assert res.value == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose(res.blocks[0], [1, 0], atol=1e-6)
    assert res.residual_sum <= 1e-7
    tiny = decomposition_min([1e-3, 2e-3], [0, 1, 2], 2.0, budget=math.hypot(1e-3, 2e-3))
    big = decomposition_min([1.0, 2.0], [0, 1, 2], 2.0, budget=math.hypot(1, 2))
    assert tiny.value == pytest.approx(1e-3 * big.value, rel=1e-4)
    x = np.array([1.0, 1.0])
    dec = decomposition_min(x, [0, 1, 2], 2.0, budget=math.sqrt(2))
    bic = capra_biconjugate(PhiSpec.identity(2), x, 2, variational=False)
    assert dec.value == pytest.approx(math.sqrt(2) * bic.ascent, rel=1e-5)
    assert dec.residual_budget <= 1e-6
    with pytest.raises(ValueError):
        decomposition_min(x, [0, 1], 2.0)
    with pytest.raises(ValueError):
        decomposition_min(x, [0, -1, 2], 2.0)


def test_gauge_bisection_fixtures():
    assert gauge_bisection([2, 0], L2) == pytest.approx(2.0)
    assert gauge_bisection([0, 0], L2) == 0.0
    assert gauge_bisection([1, 1], TopNormGauge(1, 2.0)) == pytest.approx(1.0)
    ball = lambda y: np.linalg.norm(y) <= 1.0
    assert gauge_bisection([2, 0], contains=ball) == pytest.approx(2.0, rel=1e-11)
    assert gauge_bisection([1e-5, 0], contains=ball) == pytest.approx(1e-5, rel=1e-11)
    with pytest.raises(ValueError):
        gauge_bisection([1, 0])
