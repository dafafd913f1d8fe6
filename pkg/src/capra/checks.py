"""Randomized property suite run by ``capra check``.

Each check draws its own instances from a generator seeded by ``(seed,
check index)``, so reports are reproducible and independent of the order in
which checks run. Reports contain no timings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import conjugacy as cj
from .bounds import holder_ratio_bound, l0_lower_bound
from .extreal import NEG_INF, POS_INF, ExtReal, lower_add, upper_add
from .l0core import l0, level_set_contains
from .norms import (SourceNorm, coordinate_norm, coordinate_norm_argmax, dual_coordinate_norm,
                    dual_norm, norm_sequence, source_norm, sparsity_from_grading)
from .oracle import dual_norm_by_subsets, gauge_by_sampled_atoms


@dataclass
class CheckOutcome:
    name: str
    trials: int
    worst: float
    passed: bool
    counterexample: list | None = None

    def to_json(self):
        return {
            "name": self.name,
            "trials": self.trials,
            "worst_residual": _round(self.worst),
            "passed": self.passed,
            "counterexample": self.counterexample,
        }


def _round(r: float):
    if math.isinf(r):
        return "inf" if r > 0 else "-inf"
    return float(f"{r:.6e}")


def _vec(v):
    return [float(t) for t in np.asarray(v, dtype=float)]


def sparse_vector(rng, d, nnz, sep=0.1):
    """Random vector with ``nnz`` nonzeros of magnitude >= ``sep`` and random signs."""
    x = np.zeros(d)
    idx = rng.choice(d, size=nnz, replace=False)
    x[idx] = rng.choice([-1.0, 1.0], size=nnz) * (sep + rng.random(nnz) * 2.0)
    return x


class _Tracker:
    def __init__(self, name, tol):
        self.name, self.tol = name, tol
        self.trials, self.worst, self.counter = 0, 0.0, None

    def record(self, residual, example):
        self.trials += 1
        residual = float(residual)
        if residual > self.worst or math.isnan(residual):
            self.worst = residual if not math.isnan(residual) else math.inf
        if self.counter is None and not residual <= self.tol:
            self.counter = _vec(example) if not isinstance(example, list) else example

    def outcome(self):
        return CheckOutcome(self.name, self.trials, self.worst, self.counter is None, self.counter)


def _same(a, b):
    if a.is_finite and b.is_finite:
        return abs(a.value - b.value) <= 1e-12 * (1 + abs(a.value))
    return a == b


def check_extreal(rng, n):
    t = _Tracker("extreal_additions", 0.0)
    pool = [POS_INF, NEG_INF] + [ExtReal.of(v) for v in rng.normal(size=4)]
    for a in pool:
        for b in pool:
            for c in pool:
                bad = 0.0
                for add in (lower_add, upper_add):
                    if not (_same(add(a, b), add(b, a)) and _same(add(add(a, b), c), add(a, add(b, c)))):
                        bad = 1.0
                if float(lower_add(a, b)) > float(upper_add(a, b)):
                    bad = 1.0
                t.record(bad, [a.to_json(), b.to_json(), c.to_json()])
    return t.outcome()


def check_l0(rng, n):
    t = _Tracker("l0_homogeneity_subadditivity_levelsets", 0.0)
    for _ in range(n):
        d = int(rng.integers(1, 9))
        x = sparse_vector(rng, d, int(rng.integers(1, d + 1)))
        y = sparse_vector(rng, d, int(rng.integers(1, d + 1)))
        bad = 0.0
        for rho in (-3.0, -0.5, 0.5, 3.0):
            bad += l0(rho * x) != l0(x)
        bad += l0(x + y) > l0(x) + l0(y)
        for k in range(d + 1):
            bad += level_set_contains(x, k) != (l0(x) <= k)
        t.record(bad, x)
    return t.outcome()


def check_dual_closed_form(rng, n):
    t = _Tracker("dual_norm_closed_form_vs_subsets", 1e-12)
    for _ in range(n):
        d = int(rng.integers(1, 9))
        y = rng.normal(size=d)
        p = [1.0, 1.5, 2.0, 3.0, math.inf][int(rng.integers(5))]
        worst = max(abs(dual_coordinate_norm(y, k, p) - dual_norm_by_subsets(y, k, p)) for k in range(d + 1))
        t.record(worst, y)
    return t.outcome()


def check_monotone(rng, n):
    t = _Tracker("monotone_sequences_and_collapse", 1e-9)
    for _ in range(n):
        d = int(rng.integers(1, 9))
        x = rng.normal(size=d)
        p = [1.0, 1.5, 2.0, 3.0, math.inf][int(rng.integers(5))]
        seq = norm_sequence(x, p)
        v, w = seq.values, seq.dual_values
        r = max(0.0, float(np.max(np.diff(v), initial=0.0)), float(np.max(-np.diff(w), initial=0.0)))
        r = max(r, abs(v[-1] - source_norm(x, p)), abs(w[-1] - dual_norm(x, p)))
        t.record(r, x)
    return t.outcome()


def check_cauchy_schwarz(rng, n):
    t = _Tracker("generalized_cauchy_schwarz", 1e-12)
    for _ in range(n):
        d = int(rng.integers(1, 9))
        x, y = rng.normal(size=d), rng.normal(size=d)
        p = [1.0, 2.0, 3.0, math.inf][int(rng.integers(4))]
        r = max(float(x @ y) - coordinate_norm(x, k, p) * dual_coordinate_norm(y, k, p)
                for k in range(1, d + 1))
        t.record(max(r, 0.0) / (1 + abs(float(x @ y))), x)
    return t.outcome()


def check_closed_vs_solver(rng, n):
    t = _Tracker("coordinate_norm_closed_form_vs_solver", 1e-7)
    for _ in range(n):
        d = int(rng.integers(1, 7))
        x = rng.normal(size=d)
        p = [1.0, 1.5, 2.0, 3.0, math.inf][int(rng.integers(5))]
        k = int(rng.integers(1, d + 1))
        a, b = coordinate_norm(x, k, p), coordinate_norm(x, k, p, method="solver")
        t.record(abs(a - b) / max(1.0, a), x)
    return t.outcome()


def check_atom_bracket(rng, n):
    t = _Tracker("sampled_atom_bracket_contains_norm", 1e-9)
    for _ in range(max(1, n // 5)):
        d = int(rng.integers(2, 5))
        x = rng.normal(size=d)
        p = [1.5, 2.0, 3.0, math.inf][int(rng.integers(4))]
        k = int(rng.integers(1, d + 1))
        br = gauge_by_sampled_atoms(x, k, p, n_atoms=2000, seed=int(rng.integers(2**31)))
        val = coordinate_norm(x, k, p)
        slack = 1e-9 * max(1.0, val)
        t.record(0.0 if br.contains(val, slack) else min(abs(val - br.lower), abs(val - br.upper)), x)
    return t.outcome()


def check_grading(rng, n):
    t = _Tracker("grading_strict_for_p2_lower_bound_otherwise", 0.0)
    for _ in range(n):
        d = int(rng.integers(2, 7))
        x = sparse_vector(rng, d, int(rng.integers(1, d + 1)))
        bad = float(sparsity_from_grading(x, 2.0) != l0(x))
        for p in (1.0, math.inf):
            bad += float(sparsity_from_grading(x, p) > l0(x))
        t.record(bad, x)
    return t.outcome()


def check_conjugate(rng, n):
    t = _Tracker("levelset_conjugate_and_midpoint_convexity", 1e-12)
    for _ in range(n):
        d = int(rng.integers(1, 7))
        y, z = rng.normal(size=d), rng.normal(size=d)
        p = [1.0, 2.0, math.inf][int(rng.integers(3))]
        k = int(rng.integers(0, d + 1))
        r = abs(float(cj.capra_conjugate(cj.PhiSpec.levelset(d, k), y, p)) - dual_coordinate_norm(y, k, p))
        phi = cj.PhiSpec.identity(d)
        fy, fz = float(cj.capra_conjugate(phi, y, p)), float(cj.capra_conjugate(phi, z, p))
        fm = float(cj.capra_conjugate(phi, 0.5 * (y + z), p))
        r = max(r, fm - 0.5 * (fy + fz))
        t.record(r, y)
    return t.outcome()


def check_biconjugate(rng, n):
    t = _Tracker("biconjugate_routes_and_galois_inequality", 1e-3)
    for _ in range(max(1, n // 5)):
        d = int(rng.integers(2, 4))
        x = sparse_vector(rng, d, int(rng.integers(1, d + 1)))
        phi = cj.PhiSpec.identity(d)
        res = cj.capra_biconjugate(phi, x, 2.0)
        a, b = res.ascent, res.variational
        r = max(abs(a - b) / max(1.0, abs(a)), a - l0(x) - 1e-6, 0.0)
        r = max(r, abs(a - float(cj.capra_biconjugate(phi, 2.5 * x, 2.0, variational=False).value)))
        t.record(r, x)
    return t.outcome()


def check_subdiff(rng, n):
    t = _Tracker("subdifferential_fenchel_young", 1e-6)
    for _ in range(n):
        d = int(rng.integers(2, 7))
        x = sparse_vector(rng, d, int(rng.integers(1, d + 1)))
        phi = cj.PhiSpec.identity(d)
        y = subgradient_candidate(x, phi, 2.0, rng)
        cert = cj.subdiff_membership(phi, x, y, 2.0)
        if cert.member:
            lhs = float(cj.capra_conjugate(phi, y, 2.0))
            rhs = cj.coupling(x, y, 2.0) - float(phi(l0(x)))
            t.record(abs(lhs - rhs) / (1 + abs(lhs)), x)
        else:
            t.record(0.0, x)
    return t.outcome()


def subgradient_candidate(x, phi, src, rng):
    """Scaled maximizer of ``<x, .>`` over the top-(l, q) unit ball, ``l = l0(x)``.

    For ``y = s * u`` with ``top_l(u) = 1`` the argmax condition
    ``s (top_l(u) - top_j(u)) >= phi(l) - phi(j)`` is an interval of scales
    ``s >= 0``; a uniform draw from it is returned (or from ``[1, 2)`` if the
    interval is empty, in which case the candidate is not a member).
    """
    src = SourceNorm.parse(src)
    l = l0(x)
    u = coordinate_norm_argmax(x, l, src)
    tops = np.array([dual_coordinate_norm(u, j, src) for j in range(x.size + 1)])
    f = phi.floats()
    lo, hi = 0.0, math.inf
    for j in range(x.size + 1):
        gap, need = tops[l] - tops[j], f[l] - f[j]
        if gap > 1e-12:
            lo = max(lo, need / gap)
        elif gap < -1e-12:
            hi = min(hi, need / gap)
    if lo <= hi:
        s = lo + rng.random() * (min(hi, lo + 1.0) - lo)
    else:
        s = 1.0 + rng.random()
    return s * u


def check_bounds(rng, n):
    t = _Tracker("phi_norm_bound_validity_and_holder", 1e-6)
    for _ in range(max(1, n // 2)):
        d = int(rng.integers(2, 7))
        x = sparse_vector(rng, d, int(rng.integers(1, d + 1)))
        p = [2.0, 3.0, math.inf][int(rng.integers(3))]
        src = SourceNorm(p)
        phi = cj.PhiSpec.power(d, 1.0 / src.q)
        rep = l0_lower_bound(x, phi, src)
        hold = holder_ratio_bound(x, p) ** (1.0 / src.q)
        t.record(max(-rep.slack, abs(rep.ratio - hold)), x)
    return t.outcome()


CHECKS = [
    check_extreal,
    check_l0,
    check_dual_closed_form,
    check_monotone,
    check_cauchy_schwarz,
    check_closed_vs_solver,
    check_atom_bracket,
    check_grading,
    check_conjugate,
    check_biconjugate,
    check_subdiff,
    check_bounds,
]


def run_checks(seed: int = 0, trials: int = 20) -> dict:
    """Run every check; the report is a JSON-ready dict."""
    outcomes = []
    for i, check in enumerate(CHECKS):
        rng = np.random.default_rng([seed, i])
        outcomes.append(check(rng, trials).to_json())
    return {"seed": seed, "trials": trials, "checks": outcomes,
            "passed": all(o["passed"] for o in outcomes)}
