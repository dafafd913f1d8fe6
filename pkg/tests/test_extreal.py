import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from capra.extreal import NEG_INF, POS_INF, ZERO, ExtReal, Kind, ext_max, lower_add, upper_add

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
ext = st.one_of(st.just(POS_INF), st.just(NEG_INF), finite.map(ExtReal.of))


def close(a, b):
    if a.is_finite and b.is_finite:
        return math.isclose(a.value, b.value, rel_tol=1e-12, abs_tol=1e-9)
    return a == b


@pytest.mark.parametrize(
    "a, b, lower, upper",
    [
        (2, 3, 5, 5),
        (POS_INF, NEG_INF, NEG_INF, POS_INF),
        (NEG_INF, POS_INF, NEG_INF, POS_INF),
        (NEG_INF, 7, NEG_INF, NEG_INF),
        (POS_INF, 7, POS_INF, POS_INF),
    ],
)
def test_additions_fixtures(a, b, lower, upper):
    assert lower_add(a, b) == ExtReal.of(lower)
    assert upper_add(a, b) == ExtReal.of(upper)


@given(ext, ext, ext)
def test_commutative_associative(a, b, c):
    for add in (lower_add, upper_add):
        assert add(a, b) == add(b, a)
        assert close(add(add(a, b), c), add(a, add(b, c)))


def test_lattice_exhaustive():
    pool = [POS_INF, NEG_INF, ExtReal.of(-1.5), ZERO, ExtReal.of(2.0)]
    for a, b in itertools.product(pool, repeat=2):
        assert float(lower_add(a, b)) <= float(upper_add(a, b))
        if a.is_finite or b.is_finite:
            assert lower_add(a, b) == upper_add(a, b)


def test_parsing_and_json_round_trip():
    assert ExtReal.of("inf") is POS_INF
    assert ExtReal.of("-inf") is NEG_INF
    assert ExtReal.of(float("inf")) is POS_INF
    assert ExtReal.of(2).to_json() == 2.0
    for v in (POS_INF, NEG_INF, ExtReal.of(-3.25)):
        assert ExtReal.of(v.to_json()) == v
    with pytest.raises(ValueError):
        ExtReal.of(float("nan"))
    with pytest.raises(ValueError):
        ExtReal(Kind.FINITE, math.inf)


def test_order_negation_scaling():
    assert NEG_INF < ExtReal.of(-1e300) < ZERO < POS_INF
    assert -POS_INF == NEG_INF and -ExtReal.of(2) == ExtReal.of(-2)
    assert POS_INF.scale(3) is POS_INF
    assert ExtReal.of(2).scale(0.5) == ExtReal.of(1)
    with pytest.raises(ValueError):
        POS_INF.scale(0)
    with pytest.raises(ValueError):
        ZERO.scale(-1)
    assert ext_max([ZERO, NEG_INF, ExtReal.of(4)]) == ExtReal.of(4)
    assert ext_max([]) == NEG_INF
    assert {ExtReal.of(1.0), ExtReal.of(1)} == {ExtReal.of(1)}
