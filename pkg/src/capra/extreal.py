"""Extended reals with Moreau's lower and upper additions.

IEEE floats give ``inf + (-inf) = nan``, which silently breaks sup/inf
bookkeeping. :class:`ExtReal` keeps the two infinite values as tags so the
two conventions stay distinguishable:

* lower addition: ``(+inf) ⊥+ (-inf) = -inf``
* upper addition: ``(+inf) ⊤+ (-inf) = +inf``
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import total_ordering


class Kind(Enum):
    NEG_INF = -1
    FINITE = 0
    POS_INF = 1


@total_ordering
@dataclass(frozen=True)
class ExtReal:
    """A value in ``[-inf, +inf]``.

    Build with :meth:`of` (accepts floats, ints, ``"inf"``/``"-inf"`` and other
    ``ExtReal`` instances) or with the :data:`POS_INF`/:data:`NEG_INF`
    constants.
    """

    kind: Kind
    value: float = 0.0

    def __post_init__(self):
        if self.kind is Kind.FINITE:
            if not math.isfinite(self.value):
                raise ValueError(f"finite ExtReal needs a finite value, got {self.value!r}")
        elif self.value != 0.0:
            object.__setattr__(self, "value", 0.0)

    @classmethod
    def of(cls, x) -> "ExtReal":
        if isinstance(x, ExtReal):
            return x
        if isinstance(x, str):
            token = x.strip().lower()
            if token in ("inf", "+inf", "infinity", "+infinity"):
                return POS_INF
            if token in ("-inf", "-infinity"):
                return NEG_INF
            x = float(token)
        x = float(x)
        if math.isnan(x):
            raise ValueError("NaN is not an extended real")
        if x == math.inf:
            return POS_INF
        if x == -math.inf:
            return NEG_INF
        return cls(Kind.FINITE, x)

    @property
    def is_finite(self) -> bool:
        return self.kind is Kind.FINITE

    @property
    def is_pos_inf(self) -> bool:
        return self.kind is Kind.POS_INF

    @property
    def is_neg_inf(self) -> bool:
        return self.kind is Kind.NEG_INF

    def __float__(self) -> float:
        if self.kind is Kind.POS_INF:
            return math.inf
        if self.kind is Kind.NEG_INF:
            return -math.inf
        return self.value

    def __neg__(self) -> "ExtReal":
        if self.kind is Kind.POS_INF:
            return NEG_INF
        if self.kind is Kind.NEG_INF:
            return POS_INF
        return ExtReal(Kind.FINITE, -self.value)

    def __lt__(self, other) -> bool:
        return float(self) < float(ExtReal.of(other))

    def __eq__(self, other) -> bool:
        try:
            o = ExtReal.of(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.kind is o.kind and self.value == o.value

    def __hash__(self):
        return hash((self.kind, self.value))

    def scale(self, lam: float) -> "ExtReal":
        """Nonnegative scaling; ``0 * (±inf)`` is left to callers and raises."""
        if lam < 0:
            raise ValueError("only nonnegative scalings are defined")
        if self.is_finite:
            return ExtReal(Kind.FINITE, lam * self.value)
        if lam == 0:
            raise ValueError("0 * infinity must be resolved by the caller")
        return self

    def to_json(self):
        if self.kind is Kind.POS_INF:
            return "inf"
        if self.kind is Kind.NEG_INF:
            return "-inf"
        return self.value

    def __repr__(self):
        return f"ExtReal({self.to_json()!r})"


POS_INF = ExtReal(Kind.POS_INF)
NEG_INF = ExtReal(Kind.NEG_INF)
ZERO = ExtReal(Kind.FINITE, 0.0)


def lower_add(a, b) -> ExtReal:
    """Moreau lower addition: ``-inf`` wins whenever it appears."""
    a, b = ExtReal.of(a), ExtReal.of(b)
    if a.is_neg_inf or b.is_neg_inf:
        return NEG_INF
    if a.is_pos_inf or b.is_pos_inf:
        return POS_INF
    return ExtReal(Kind.FINITE, a.value + b.value)


def upper_add(a, b) -> ExtReal:
    """Moreau upper addition: ``+inf`` wins whenever it appears."""
    a, b = ExtReal.of(a), ExtReal.of(b)
    if a.is_pos_inf or b.is_pos_inf:
        return POS_INF
    if a.is_neg_inf or b.is_neg_inf:
        return NEG_INF
    return ExtReal(Kind.FINITE, a.value + b.value)


def ext_max(values) -> ExtReal:
    """Supremum of a finite, nonempty collection."""
    values = [ExtReal.of(v) for v in values]
    if not values:
        return NEG_INF
    return max(values, key=float)
