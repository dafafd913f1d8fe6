"""phi-norms and the lower bounds they give on l0.

For ``phi(0) = 0`` and ``phi(l) > 0`` the set ``{y : top_l(y) <= phi(l), l = 1..d}``
is the unit ball of a norm; the phi-norm is its dual (support function), or
equivalently the inf-convolution ``inf { sum_l phi(l) |||z_l|||_(l) : sum_l z_l = x }``.
Since ``|||x|||_phi <= phi(l0(x)) ||x||``, the ratio ``|||x|||_phi / ||x||``
certifies ``l0(x) >= min { l : phi(l) >= ratio }`` when phi is increasing.
With ``phi(l) = l^(1/q)`` the phi-norm is the l1 norm and the bound is
``(||x||_1 / ||x||_p)^q <= l0(x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .conjugacy import PhiSpec
from .l0core import as_vector, l0
from .norms import TopNormGauge, as_source, source_norm
from .solver import SolverConfig, SupportResult, decomposition_min, support_function_over_ball

INTEGER_BOUND_SLACK = 1e-9


def _require_norm_weight(phi: PhiSpec, d: int):
    if phi.d != d:
        raise ValueError(f"phi has {phi.d + 1} entries, expected d + 1 = {d + 1}")
    if not phi.is_norm_weight:
        raise ValueError("phi must satisfy phi(0) = 0 and 0 < phi(l) < inf for l >= 1")


def dual_phi_norm(y, phi: PhiSpec, src) -> float:
    """``max_{l >= 1} top_l(y) / phi(l)``."""
    w = as_vector(y)
    _require_norm_weight(phi, w.size)
    tops = _backend.top_norm_sequence(w, as_source(src).q)[1:]
    return float(np.max(tops / phi.floats()[1:]))


def phi_gauges(phi: PhiSpec, src) -> list:
    q = as_source(src).q
    return [TopNormGauge(l, q, scale=1.0 / float(phi(l))) for l in range(1, phi.d + 1)]


def phi_norm_result(x, phi: PhiSpec, src, cfg: SolverConfig | None = None) -> SupportResult:
    v = as_vector(x)
    _require_norm_weight(phi, v.size)
    return support_function_over_ball(v, phi_gauges(phi, src), cfg)


def phi_norm(x, phi: PhiSpec, src, cfg: SolverConfig | None = None, method: str = "support") -> float:
    """phi-norm of ``x``.

    ``method="support"`` maximizes ``<x, y>`` over the dual phi-ball;
    ``method="infconv"`` solves the inf-convolution program instead.
    """
    v = as_vector(x)
    _require_norm_weight(phi, v.size)
    if not np.any(v):
        return 0.0
    if method == "support":
        return phi_norm_result(v, phi, src, cfg).value
    if method == "infconv":
        return decomposition_min(v, phi.floats(), as_source(src).p, budget=None, cfg=cfg).value
    raise ValueError(f"unknown method {method!r}")


@dataclass
class BoundReport:
    phi_norm_value: float
    source_norm_value: float
    ratio: float
    phi_at_l0: float
    slack: float
    integer_bound: int | None = None
    certificate_gap: float = 0.0

    def to_json(self):
        return {
            "phi_norm": self.phi_norm_value,
            "source_norm": self.source_norm_value,
            "ratio": self.ratio,
            "phi_at_l0": self.phi_at_l0,
            "slack": self.slack,
            "integer_bound": self.integer_bound,
            "certificate_gap": self.certificate_gap,
        }


def l0_lower_bound(x, phi: PhiSpec, src, cfg: SolverConfig | None = None, l0_tol: float = 0.0
                   ) -> BoundReport:
    """Ratio ``|||x|||_phi / ||x||`` against ``phi(l0(x))``.

    The integer bound is ``min { l : phi(l) >= ratio - 1e-9 }``, reported
    when phi is strictly increasing.
    """
    v = as_vector(x)
    if not np.any(v):
        raise ValueError("l0_lower_bound needs x != 0")
    _require_norm_weight(phi, v.size)
    res = phi_norm_result(v, phi, src, cfg)
    nx = source_norm(v, src)
    ratio = res.value / nx
    f = phi.floats()
    at = float(f[l0(v, l0_tol)])
    integer_bound = None
    if phi.is_strictly_increasing:
        integer_bound = int(np.argmax(f >= ratio - INTEGER_BOUND_SLACK))
    return BoundReport(res.value, nx, ratio, at, at - ratio, integer_bound, res.gap / nx)


def holder_ratio_bound(x, p) -> float:
    """``(||x||_1 / ||x||_p) ** q``, a real lower bound on l0(x) for p > 1."""
    v = as_vector(x)
    src = as_source(p)
    if src.p == 1.0:
        raise ValueError("the ratio bound is trivial for p = 1")
    if not np.any(v):
        raise ValueError("holder_ratio_bound needs x != 0")
    r = float(np.abs(v).sum()) / source_norm(v, src)
    return r if math.isinf(src.p) else r**src.q
