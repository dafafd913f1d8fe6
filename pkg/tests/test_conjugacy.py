import math

import numpy as np
import pytest

from capra.conjugacy import (PhiSpec, biconjugate_levelset_indicator, capra_biconjugate,
                             capra_conjugate, capra_convexity_check, conditional_infimum,
                             coupling, normalize, subdiff_at_zero_contains, subdiff_membership)
from capra.extreal import NEG_INF, POS_INF, ZERO, ExtReal
from capra.l0core import l0
from capra.norms import dual_coordinate_norm
from capra.oracle import GridSpec, dual_norm_by_subsets, legendre_transform

INF = math.inf


def test_phi_spec():
    assert PhiSpec.identity(3).floats().tolist() == [0, 1, 2, 3]
    assert PhiSpec.parse("sqrt", 2).floats()[2] == pytest.approx(math.sqrt(2))
    assert PhiSpec.parse("power:2", 2).floats().tolist() == [0, 1, 4]
    assert PhiSpec.parse("levelset:1", 2).values == (ZERO, ZERO, POS_INF)
    assert PhiSpec.parse('[0, 1, "inf"]', 2).values[2] is POS_INF
    assert PhiSpec.parse("l0", 2) == PhiSpec.identity(2)
    phi = PhiSpec.identity(2)
    assert phi.is_finite and phi.is_nonneg_zero_at_zero and phi.is_norm_weight
    lv = PhiSpec.levelset(2, 1)
    assert not lv.is_finite and not lv.is_nonneg_zero_at_zero
    assert PhiSpec((0, -1, 2)).is_finite and not PhiSpec((0, -1, 2)).is_nonneg_zero_at_zero
    assert lv.to_json() == [0.0, 0.0, "inf"]
    for bad in ("cube", "[0, 1]", "levelset:5"):
        with pytest.raises(ValueError):
            PhiSpec.parse(bad, 2)
    with pytest.raises(ValueError):
        PhiSpec((0,))


def test_normalize_and_coupling_fixtures():
    np.testing.assert_allclose(normalize([3, 4], 2), [0.6, 0.8])
    np.testing.assert_array_equal(normalize([0, 0], 2), [0, 0])
    np.testing.assert_array_equal(normalize([0, -2], 1), [0, -1])
    assert coupling([0, 0], [1, 9], 2) == 0.0
    assert coupling([2, 0], [1, 1], 2) == 1.0
    assert coupling([1, 1], [1, 1], 1) == 1.0
    with pytest.raises(ValueError):
        coupling([1, 0], [1, 0, 0], 2)


def test_coupling_is_ray_constant(rng):
    for _ in range(20):
        x, y = rng.normal(size=4), rng.normal(size=4)
        for lam in (1e-3, 0.5, 7.0):
            assert coupling(lam * x, y, 2) == pytest.approx(coupling(x, y, 2), rel=1e-12)


def test_conjugate_fixtures(rng):
    for p in (1, 2, INF):
        assert capra_conjugate(PhiSpec.identity(3), np.zeros(3), p) == ZERO
    # direct enumeration over l of top-(l, 2) minus l
    y = np.array([3.0, 0.0])
    tops = [dual_norm_by_subsets(y, l, 2) for l in range(3)]
    assert tops == [0.0, 3.0, 3.0]
    assert capra_conjugate(PhiSpec.identity(2), y, 2) == ExtReal.of(max(t - l for l, t in enumerate(tops)))
    assert capra_conjugate(PhiSpec.identity(2), y, 2) == ExtReal.of(2.0)
    for _ in range(30):
        d = int(rng.integers(1, 7))
        w = rng.normal(size=d)
        k = int(rng.integers(0, d + 1))
        assert float(capra_conjugate(PhiSpec.levelset(d, k), w, 2)) == pytest.approx(
            dual_coordinate_norm(w, k, 2), abs=1e-12)
    assert capra_conjugate(PhiSpec((0, -INF, 1)), [1, 1], 2) is POS_INF
    assert capra_conjugate(PhiSpec((INF, INF)), [1.0], 2) is NEG_INF
    with pytest.raises(ValueError):
        capra_conjugate(PhiSpec.identity(3), [1, 1], 2)


def test_biconjugate_fixtures():
    res = capra_biconjugate(PhiSpec.identity(2), [1, 0], 2)
    assert float(res.value) == pytest.approx(1.0, abs=1e-7)
    assert res.variational == pytest.approx(1.0, abs=1e-6)
    assert res.to_json()["value"] == pytest.approx(1.0, abs=1e-7)
    assert capra_biconjugate(PhiSpec.identity(2), [0, 0], 2).value == ZERO
    assert capra_biconjugate(PhiSpec((0, -INF, 1)), [1, 1], 2).value is NEG_INF
    assert capra_biconjugate(PhiSpec((INF, INF, INF)), [1, 1], 2).value is POS_INF


def test_biconjugate_levelset_is_infinite_off_the_level_set():
    # The conjugate of the indicator of {l0 <= 1} is max(0, |y|_inf). Along
    # y = (t, t) the biconjugate objective at (1, 1)/sqrt2 is (sqrt2 - 1) t,
    # so a grid reconstruction grows linearly with the grid half-width.
    n = normalize([1, 1], 2)
    grid_values = []
    for R in (5.0, 10.0, 20.0):
        ys = GridSpec(-R, R, 0.1, 2).points()
        conj = np.maximum(0.0, np.abs(ys).max(axis=1))
        grid_values.append(float(legendre_transform(ys, conj, n[None, :])[0]))
    slopes = np.diff(grid_values) / np.diff([5.0, 10.0, 20.0])
    np.testing.assert_allclose(slopes, math.sqrt(2) - 1, atol=0.02)
    assert capra_biconjugate(PhiSpec.levelset(2, 1), [1, 1], 2).value is POS_INF
    assert biconjugate_levelset_indicator(1, [1, 1], 2) is POS_INF


def test_levelset_indicator_fixtures(rng):
    assert biconjugate_levelset_indicator(1, [5, 0], 2) == ZERO
    assert biconjugate_levelset_indicator(1, [1, 1], 2) is POS_INF
    for _ in range(10):
        x = rng.normal(size=4)
        assert biconjugate_levelset_indicator(4, x, 2) == ZERO
    assert biconjugate_levelset_indicator(0, [0, 0], 2) == ZERO
    assert biconjugate_levelset_indicator(0, [1, 0], 2) is POS_INF
    with pytest.raises(ValueError):
        biconjugate_levelset_indicator(3, [1, 0], 2)


def test_subdiff_at_zero_fixtures():
    y = [1.0, 1.0]
    assert [dual_norm_by_subsets(y, l, 2) for l in (1, 2)] == pytest.approx([1.0, math.sqrt(2)])
    assert subdiff_at_zero_contains(PhiSpec.identity(2), y, 2).member
    assert dual_norm_by_subsets([2, 0], 1, 2) == 2.0
    assert not subdiff_at_zero_contains(PhiSpec.identity(2), [2, 0], 2).member
    top = PhiSpec((0, INF, INF))
    assert subdiff_at_zero_contains(top, [1e6, -3e5], 2).member
    assert not subdiff_at_zero_contains(PhiSpec((0, -1, 2)), [0, 0], 2).member


def test_subdiff_membership_fixtures():
    phi = PhiSpec.identity(2)
    cert = subdiff_membership(phi, [1, 0], [2, 0], 2)
    assert cert.member and cert.case_tag == "nonzero_finite" and 1 in cert.argmax_set
    assert cert.residual_coupling_eq == 0.0 and cert.residual_argmax == 0.0
    cert = subdiff_membership(phi, [1, 0], [0, 1], 2)
    assert not cert.member
    empty = PhiSpec((0, INF, INF))
    for y in ([2, 0], [0, 1], [-5, 3]):
        cert = subdiff_membership(empty, [1, 0], y, 2)
        assert not cert.member and cert.case_tag == "nonzero_empty"
    assert subdiff_membership(PhiSpec((INF, INF, INF)), [1, 0], [0, 1], 2).case_tag == "nonzero_infinite_all"
    assert subdiff_membership(phi, [1, 0], [2, 0], 2).to_json()["argmax_set"] == [1]
    with pytest.raises(ValueError):
        subdiff_membership(phi, [0, 0], [1, 0], 2)


def test_subdiff_fenchel_young(rng):
    from capra.checks import sparse_vector, subgradient_candidate
    members = 0
    for _ in range(60):
        d = int(rng.integers(2, 6))
        x = sparse_vector(rng, d, int(rng.integers(1, d + 1)))
        phi = PhiSpec.identity(d)
        y = subgradient_candidate(x, phi, 2.0, rng)
        cert = subdiff_membership(phi, x, y, 2)
        if cert.member:
            members += 1
            lhs = float(capra_conjugate(phi, y, 2))
            rhs = coupling(x, y, 2) - l0(x)
            assert abs(lhs - rhs) <= 1e-6 * (1 + abs(lhs))
    assert members > 30


def test_conditional_infimum_fixtures():
    f = lambda v: float(l0(v))
    assert conditional_infimum(f, [0.6, 0.8], 2, ray_constant=True) == ExtReal.of(2)
    assert conditional_infimum(f, [2, 0], 2) is POS_INF
    inf_sq = conditional_infimum(lambda v: float(v @ v), [1, 0], 2)
    assert 0.0 <= float(inf_sq) <= 1e-12
    assert conditional_infimum(f, [0, 0], 2) == ZERO


def test_convexity_check_fixtures():
    pts = np.array([[1.0, 1.0], [1.0, 0.0], [0.3, -2.0]])
    ratio = lambda v: 0.0 if not np.any(v) else float(np.abs(v).sum() / np.linalg.norm(v))
    assert capra_convexity_check(ratio, 2, pts, ray_constant=True).max_residual <= 1e-9
    assert capra_convexity_check(lambda v: 0.0, 2, pts).max_residual <= 1e-12
    rep = capra_convexity_check(lambda v: float(l0(v)), 2, [[1.0, 1.0]], ray_constant=True)
    assert rep.max_residual >= 0.0 and rep.to_json()["residuals"] == [rep.max_residual]
    with pytest.raises(ValueError):
        capra_convexity_check(ratio, 2, [[1.0, 1.0, 1.0]])
