"""Capra coupling and the conjugacy calculus of functions ``phi(l0(x))``.

The Capra coupling is ``c(x, y) = <x, y> / ||x||`` (0 at x = 0), which only
sees the direction of ``x``. Conjugates with respect to it of functions of
l0 reduce to the top-(l, q) norms:

    conj(y) = max_l  top_l(y) - phi(l)      (lower addition, top_0 = 0)

and the biconjugate at ``x`` is the Fenchel conjugate of ``conj`` evaluated
at the normalized vector ``x / ||x||``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .extreal import NEG_INF, POS_INF, ZERO, ExtReal, ext_max, lower_add, upper_add
from .l0core import as_vector, l0
from .norms import TopNormGauge, as_source, coordinate_norm, source_norm
from .solver import SolverConfig, concave_ascent, decomposition_min


@dataclass(frozen=True)
class PhiSpec:
    """A function ``phi: {0..d} -> [-inf, +inf]`` given by its table."""

    values: tuple

    def __post_init__(self):
        vals = tuple(ExtReal.of(v) for v in self.values)
        if len(vals) < 2:
            raise ValueError("phi needs d + 1 >= 2 entries")
        object.__setattr__(self, "values", vals)

    @property
    def d(self) -> int:
        return len(self.values) - 1

    def __call__(self, l: int) -> ExtReal:
        return self.values[l]

    @property
    def is_finite(self) -> bool:
        return all(v.is_finite for v in self.values)

    @property
    def is_nonneg_zero_at_zero(self) -> bool:
        return self.values[0] == ZERO and all(v.is_finite and v.value >= 0 for v in self.values)

    @property
    def is_norm_weight(self) -> bool:
        """phi(0) = 0 and phi(l) finite and positive for l >= 1."""
        return self.values[0] == ZERO and all(v.is_finite and v.value > 0 for v in self.values[1:])

    @property
    def is_strictly_increasing(self) -> bool:
        f = self.floats()
        return bool(np.all(np.isfinite(f)) and np.all(np.diff(f) > 0))

    def floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    def to_json(self):
        return [v.to_json() for v in self.values]

    @classmethod
    def identity(cls, d: int) -> "PhiSpec":
        return cls(tuple(range(d + 1)))

    @classmethod
    def power(cls, d: int, a: float) -> "PhiSpec":
        return cls(tuple([0.0] + [float(l) ** a for l in range(1, d + 1)]))

    @classmethod
    def levelset(cls, d: int, k: int) -> "PhiSpec":
        if not 0 <= k <= d:
            raise ValueError(f"level-set index must lie in 0..{d}, got {k}")
        return cls(tuple(ZERO if l <= k else POS_INF for l in range(d + 1)))

    @classmethod
    def parse(cls, token: str, d: int) -> "PhiSpec":
        """Presets ``l0``/``identity``, ``sqrt``, ``power:a``, ``levelset:k``, or a JSON array."""
        t = token.strip()
        if t in ("l0", "identity"):
            return cls.identity(d)
        if t == "sqrt":
            return cls.power(d, 0.5)
        if t.startswith("power:"):
            return cls.power(d, float(t.split(":", 1)[1]))
        if t.startswith("levelset:"):
            return cls.levelset(d, int(t.split(":", 1)[1]))
        try:
            arr = json.loads(t)
        except json.JSONDecodeError:
            raise ValueError(f"unknown phi {token!r}") from None
        if not isinstance(arr, list) or len(arr) != d + 1:
            raise ValueError(f"phi array must have d + 1 = {d + 1} entries")
        return cls(tuple(ExtReal.of(v) for v in arr))


def _check_phi(phi: PhiSpec, d: int):
    if phi.d != d:
        raise ValueError(f"phi has {phi.d + 1} entries, expected d + 1 = {d + 1}")


def normalize(x, src) -> np.ndarray:
    v = as_vector(x)
    n = source_norm(v, src)
    return v / n if n > 0 else np.zeros_like(v)


def coupling(x, y, src) -> float:
    v, w = as_vector(x), as_vector(y)
    if v.size != w.size:
        raise ValueError("x and y must have the same dimension")
    n = source_norm(v, src)
    return float(v @ w) / n if n > 0 else 0.0


def _conj_terms(phi: PhiSpec, tops) -> list:
    return [lower_add(tops[l], -phi(l)) for l in range(phi.d + 1)]


def capra_conjugate(phi: PhiSpec, y, src) -> ExtReal:
    """``max_l top_l(y) - phi(l)`` with the lower addition."""
    w = as_vector(y)
    _check_phi(phi, w.size)
    tops = _backend.top_norm_sequence(w, as_source(src).q)
    return ext_max(_conj_terms(phi, tops))


@dataclass
class BiconjugateResult:
    value: ExtReal
    ascent: float | None = None
    ascent_upper: float | None = None
    variational: float | None = None
    gap: float | None = None
    iterations: int = 0
    argmax: np.ndarray | None = None
    notes: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "value": self.value.to_json(),
            "ascent": self.ascent,
            "ascent_upper": self.ascent_upper,
            "variational": self.variational,
            "gap": self.gap,
            "iterations": self.iterations,
            "notes": list(self.notes),
        }


def _ascent_route(phi: PhiSpec, n: np.ndarray, q: float, cfg: SolverConfig, finite_ls):
    # Every term is invariant under signed permutations, so the supremum can be
    # taken over y aligned with n: sorted magnitudes u >= 0, u nonincreasing.
    # This removes the permutation kinks from the cutting-plane model. The
    # subgradient rule has no constraint handling and runs in the full space.
    gauges = {l: TopNormGauge(l, q) for l in finite_ls if l >= 1}
    phis = {l: float(phi(l)) for l in finite_ls}
    d = n.size
    sorted_cone = cfg.step_rule == "cutting-plane"
    if sorted_cone:
        order = np.argsort(-np.abs(n), kind="stable")
        signs = np.where(n[order] < 0, -1.0, 1.0)
        a = np.abs(n[order])
    else:
        a = n

    def sub(l, y):
        return gauges[l].subgradient(y) if l >= 1 else np.zeros_like(y)

    def pieces(y):
        return [(phis[l], a - sub(l, y)) for l in finite_ls]

    def objective(y):
        tops = _backend.top_norm_sequence(y, q)
        vals = [float(a @ y) - tops[l] + phis[l] for l in finite_ls]
        j = int(np.argmin(vals))
        return vals[j], a - sub(finite_ls[j], y)

    if not sorted_cone:
        return concave_ascent(objective, a.copy(), cfg, pieces=pieces)
    mono = np.zeros((max(d - 1, 0), d))
    for i in range(d - 1):
        mono[i, i], mono[i, i + 1] = -1.0, 1.0
    res = concave_ascent(objective, a.copy(), cfg, pieces=pieces, A_ub=mono if d > 1 else None,
                         b_ub=np.zeros(d - 1) if d > 1 else None, lower=np.zeros(d))
    y = np.zeros(d)
    y[order] = signs * res.y
    res.y = y
    return res


def capra_biconjugate(phi: PhiSpec, x, src, cfg: SolverConfig | None = None,
                      variational: bool = True) -> BiconjugateResult:
    """Capra biconjugate of ``phi(l0(.))`` at ``x``, by two independent routes.

    The ascent route maximizes ``<n, y> - conj(y)`` (``n = x/||x||``), a
    minimum of concave pieces, by cutting planes. The variational route
    solves ``(1/||x||) min sum_l phi(l) |||z_l|||_(l)`` over decompositions
    ``x = sum_l z_l`` with ``sum_l |||z_l|||_(l) <= ||x||``; it needs
    ``phi(0) = 0`` and ``phi >= 0`` finite and is skipped otherwise.

    Infinite entries of phi are handled exactly: ``phi(l) = -inf`` anywhere
    makes the conjugate identically ``+inf`` (value ``-inf``); ``+inf``
    entries drop out of the conjugate, and the biconjugate is ``+inf``
    exactly when ``|||x|||_(m) > ||x||`` for the largest finite index ``m``
    (the objective then grows without bound along a recession direction).
    """
    cfg = cfg or SolverConfig()
    src = as_source(src)
    v = as_vector(x)
    d = v.size
    _check_phi(phi, d)
    notes = []
    if any(val.is_neg_inf for val in phi.values):
        return BiconjugateResult(NEG_INF, notes=["phi takes -inf: conjugate is +inf everywhere"])
    finite_ls = [l for l in range(d + 1) if phi(l).is_finite]
    if not finite_ls:
        return BiconjugateResult(POS_INF, notes=["phi is identically +inf"])
    nx = source_norm(v, src)
    if nx == 0.0:
        val = min(phi(l) for l in finite_ls)
        return BiconjugateResult(val, ascent=float(val), variational=float(val) if phi.is_nonneg_zero_at_zero else None,
                                 gap=0.0, notes=["x = 0: value is min phi"])
    m = max(finite_ls)
    if m == 0 or coordinate_norm(v, m, src) > nx * (1 + 1e-12):
        return BiconjugateResult(POS_INF, notes=[f"unbounded: coordinate-{m} norm exceeds source norm"])
    n = v / nx
    asc = _ascent_route(phi, n, src.q, cfg, finite_ls)
    res = BiconjugateResult(ExtReal.of(asc.value), ascent=asc.value, ascent_upper=asc.upper,
                            iterations=asc.iterations, argmax=asc.y, notes=notes)
    if asc.on_boundary:
        notes.append(f"ascent optimum approached at infinity; box radius {asc.radius:g}")
    if variational and phi.is_nonneg_zero_at_zero:
        dec = decomposition_min(v, phi.floats(), src.p, budget=nx, cfg=cfg)
        res.variational = dec.value / nx
        res.gap = abs(res.variational - asc.value)
        res.residuals = {"sum": dec.residual_sum, "budget": dec.residual_budget}
    elif variational:
        notes.append("variational route skipped: phi must be finite, nonnegative, phi(0) = 0")
    return res


def biconjugate_levelset_indicator(k: int, x, src, tol: float = 1e-9) -> ExtReal:
    """Biconjugate of the indicator of ``{l0 <= k}``: 0 where ``|||x|||_(k) = ||x||``, else +inf."""
    v = as_vector(x)
    d = v.size
    if not isinstance(k, (int, np.integer)) or not 0 <= k <= d:
        raise ValueError(f"k must be an integer in 0..{d}, got {k!r}")
    nx = source_norm(v, src)
    if nx == 0.0:
        return ZERO
    if k == 0:
        return POS_INF
    return ZERO if abs(coordinate_norm(v, int(k), src) - nx) <= tol * nx else POS_INF


CASES = ("at_zero", "nonzero_finite", "nonzero_infinite_all", "nonzero_empty")


@dataclass
class SubdiffCertificate:
    member: bool
    case_tag: str
    argmax_set: tuple = ()
    residual_coupling_eq: float = 0.0
    residual_argmax: float = 0.0

    def to_json(self):
        return {
            "member": self.member,
            "case_tag": self.case_tag,
            "argmax_set": list(self.argmax_set),
            "residual_coupling_eq": self.residual_coupling_eq,
            "residual_argmax": self.residual_argmax,
        }


def subdiff_at_zero_contains(phi: PhiSpec, y, src, tol: float = 1e-7) -> SubdiffCertificate:
    """Membership of ``y`` in the Capra subdifferential of ``phi(l0(.))`` at 0.

    The subdifferential is the intersection over l >= 1 of the dual
    coordinate-l balls scaled by ``phi(l) - phi(0)`` (upper addition); a
    negative scaling gives the empty set and ``+inf`` the whole space.
    """
    w = as_vector(y)
    _check_phi(phi, w.size)
    tops = _backend.top_norm_sequence(w, as_source(src).q)
    worst = 0.0
    member = True
    for l in range(1, phi.d + 1):
        lam = upper_add(phi(l), -phi(0))
        if lam.is_pos_inf:
            continue
        if lam.is_neg_inf or lam.value < 0:
            return SubdiffCertificate(False, "at_zero", residual_coupling_eq=math.inf)
        excess = float(tops[l] - lam.value) / (1.0 + abs(lam.value))
        worst = max(worst, excess)
        if excess > tol:
            member = False
    return SubdiffCertificate(member, "at_zero", residual_coupling_eq=max(worst, 0.0))


def subdiff_membership(phi: PhiSpec, x, y, src, tol: float = 1e-7, l0_tol: float = 0.0
                       ) -> SubdiffCertificate:
    """Membership of ``y`` in the Capra subdifferential of ``phi(l0(.))`` at ``x != 0``.

    With ``l = l0(x)`` and phi(l) finite, ``y`` is a member iff
    ``<x, y> = |||x|||_(l) * top_l(y)`` (``y`` is normal to the coordinate-l
    ball at ``x / |||x|||_(l)``) and ``l`` maximizes ``top_j(y) - phi(j)``.
    Both residuals are relative: divided by ``1 + |magnitudes involved|``.
    Ties in the argmax are accepted.
    """
    v, w = as_vector(x), as_vector(y)
    if v.size != w.size:
        raise ValueError("x and y must have the same dimension")
    _check_phi(phi, v.size)
    l = l0(v, l0_tol)
    if l == 0:
        raise ValueError("x = 0: use subdiff_at_zero_contains")
    if phi(l).is_neg_inf or all(val.is_pos_inf for val in phi.values):
        return SubdiffCertificate(True, "nonzero_infinite_all")
    if phi(l).is_pos_inf:
        return SubdiffCertificate(False, "nonzero_empty", residual_coupling_eq=math.inf,
                                  residual_argmax=math.inf)
    src = as_source(src)
    tops = _backend.top_norm_sequence(w, src.q)
    xy = float(v @ w)
    rhs = coordinate_norm(v, l, src) * tops[l]
    r_eq = abs(xy - rhs) / (1.0 + abs(xy) + abs(rhs))
    terms = [float(t) for t in _conj_terms(phi, tops)]
    best = max(terms)
    scale = 1.0 + abs(terms[l]) + (abs(best) if math.isfinite(best) else 0.0)
    r_arg = (best - terms[l]) / scale if math.isfinite(best) else math.inf
    argmax = tuple(j for j, t in enumerate(terms)
                   if math.isfinite(t) and math.isfinite(best) and (best - t) / scale <= tol)
    member = bool(r_eq <= tol and r_arg <= tol)
    return SubdiffCertificate(member, "nonzero_finite", argmax, float(r_eq), float(r_arg))


def conditional_infimum(f, x, src, ray_constant: bool = False, tol: float = 1e-9,
                        lambdas=None) -> ExtReal:
    """``inf_{lam > 0} f(lam x)`` on the unit sphere and at 0, ``+inf`` elsewhere.

    Ray-constant ``f`` returns ``f(x)``; otherwise the infimum is searched on
    ``lambdas`` (default 321 log-spaced values in ``[1e-8, 1e8]``).
    """
    v = as_vector(x)
    nx = source_norm(v, src)
    if nx == 0.0:
        return ExtReal.of(f(v))
    if abs(nx - 1.0) > tol:
        return POS_INF
    if ray_constant:
        return ExtReal.of(f(v))
    lambdas = np.logspace(-8, 8, 321) if lambdas is None else np.asarray(lambdas, dtype=float)
    return min((ExtReal.of(f(lam * v)) for lam in lambdas), key=float)


@dataclass
class ConvexityReport:
    max_residual: float
    residuals: np.ndarray
    points: np.ndarray
    reconstructed: np.ndarray

    def to_json(self):
        return {"max_residual": self.max_residual,
                "residuals": [float(r) for r in self.residuals]}


def capra_convexity_check(f, src, points, radius: float = 12.0, step: float = 0.05,
                          n_directions: int = 720, ray_constant: bool = False,
                          chunk: int = 20000) -> ConvexityReport:
    """Compare ``f`` with a grid reconstruction of its Capra biconjugate, d = 2.

    The conjugate ``conj(y) = sup_x <n(x), y> - f(x)`` only involves the
    conditional infimum of ``f`` on directions, so it is evaluated from
    ``n_directions`` unit vectors, the directions of ``points`` and the
    origin, on a square y-grid of half-width ``radius``; the biconjugate at
    ``x`` is the discrete
    ``max_y <n(x), y> - conj(y)``. Residuals are ``|f(x) - reconstruction|``
    and include grid truncation error.
    """
    from .oracle import GridSpec, legendre_transform

    src = as_source(src)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 2:
        raise ValueError("capra_convexity_check is implemented for d = 2")
    theta = np.linspace(0.0, 2 * math.pi, n_directions, endpoint=False)
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    dirs /= np.linalg.norm(dirs, ord=src.p, axis=1)[:, None]
    normals = np.array([normalize(p, src) for p in pts])
    # the query directions themselves, so no direction-sampling error enters at them
    dirs = np.vstack([dirs, normals[np.any(normals != 0, axis=1)]])
    g = np.array([float(conditional_infimum(f, u, src, ray_constant)) for u in dirs])
    atoms = np.vstack([dirs, np.zeros((1, 2))])
    vals = np.append(g, float(f(np.zeros(2))))
    grid = GridSpec(-radius, radius, step, 2)
    ys = grid.points()
    conj = legendre_transform(atoms, vals, ys, chunk=chunk)
    recon = legendre_transform(ys, conj, normals, chunk=chunk)
    fx = np.array([float(f(p)) for p in pts])
    resid = np.abs(fx - recon)
    return ConvexityReport(float(resid.max()), resid, pts, recon)
