"""Small nonsmooth convex programs: support functions of gauge balls, concave
maximization, block decompositions, gauge evaluation by bisection.

Every result carries the residuals needed to re-validate it: feasible lower
bounds next to certified upper bounds, constraint violations, iteration counts.

A *gauge* here is any callable ``g(y) -> float`` that is a norm, with a
``subgradient(y)`` method returning an element of its subdifferential. Gauges
that are invariant under coordinate permutations and sign flips set
``symmetric = True``; support functions of their balls are then computed on
sorted magnitudes, which removes all the symmetric copies of the optimum.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize

from . import _backend


class SolverError(RuntimeError):
    """Raised when a solver cannot produce a certified answer."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NonConvergenceError(SolverError):
    pass


STEP_RULES = ("cutting-plane", "subgradient")
# certificates are compared at 1e-9 relative; HiGHS defaults (1e-7) would floor the gap above that
LP_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def _linprog(c, **kw):
    """HiGHS with tight tolerances, retried with its defaults if that does not finish cleanly."""
    lp = linprog(c, method="highs", options=LP_OPTIONS, **kw)
    return lp if lp.status == 0 else linprog(c, method="highs", **kw)


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 2000
    tol: float = 1e-9
    step_rule: str = "cutting-plane"
    seed: int = 0

    def __post_init__(self):
        if self.max_iters <= 0:
            raise ValueError("max_iters must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"step_rule must be one of {STEP_RULES}")


@dataclass
class SupportResult:
    value: float
    argmax: np.ndarray
    lower: float
    upper: float
    residual: float
    iterations: int

    @property
    def gap(self) -> float:
        return self.upper - self.lower


@dataclass
class AscentResult:
    value: float
    y: np.ndarray
    upper: float
    iterations: int
    radius: float
    history: list = field(default_factory=list)
    on_boundary: bool = False


@dataclass
class DecompositionResult:
    value: float
    blocks: np.ndarray
    residual_sum: float
    residual_budget: float
    status: str


def _sorted_frame(x):
    x = np.asarray(x, dtype=float)
    order = np.argsort(-np.abs(x), kind="stable")
    a = np.abs(x[order])
    signs = np.where(x[order] < 0, -1.0, 1.0)
    return a, order, signs


def _unsort(u, order, signs):
    y = np.zeros_like(u)
    y[order] = signs * u
    return y


def _monotone_rows(d):
    rows = np.zeros((max(d - 1, 0), d))
    for i in range(d - 1):
        rows[i, i] = -1.0
        rows[i, i + 1] = 1.0
    return rows


def support_function_over_ball(x, gauge, cfg: SolverConfig | None = None) -> SupportResult:
    """``sup { <x, y> : g(y) <= 1 for every gauge g }``.

    ``gauge`` is one symmetric gauge or a list of them (the ball is then the
    intersection of their unit balls). The smooth sorted-domain program is
    solved by SLSQP; the answer is certified by an LP over linearizations of
    the constraints, which is an outer approximation of the ball because
    every gauge dominates its linearization at any point. If the certificate
    gap exceeds ``cfg.tol`` (relative), cutting planes are added until it
    does not.
    """
    cfg = cfg or SolverConfig()
    gauges = list(gauge) if isinstance(gauge, (list, tuple)) else [gauge]
    if not all(getattr(g, "symmetric", False) for g in gauges):
        raise ValueError("support_function_over_ball needs symmetric (absolute, permutation-invariant) gauges")
    x = np.asarray(x, dtype=float)
    d = x.size
    a, order, signs = _sorted_frame(x)
    if a[0] == 0.0:
        return SupportResult(0.0, np.zeros(d), 0.0, 0.0, 0.0, 0)

    e1 = np.zeros(d)
    e1[0] = 1.0
    ub = min(1.0 / g(e1) for g in gauges)
    bounds = [(0.0, ub)] * d
    mono = _monotone_rows(d)

    def scale_of(u):
        return max(g(u) for g in gauges)

    constraints = [
        {"type": "ineq", "fun": (lambda u, g=g: 1.0 - g(u)), "jac": (lambda u, g=g: -g.subgradient(u))}
        for g in gauges
    ]
    if d > 1:
        constraints.append({"type": "ineq", "fun": lambda u: -mono @ u, "jac": lambda u: -mono})
    u0 = np.full(d, ub / d)
    res = minimize(
        lambda u: -a @ u,
        u0,
        jac=lambda u: -a,
        bounds=bounds,
        constraints=constraints,
        method="SLSQP",
        options={"ftol": 1e-15, "maxiter": max(100, cfg.max_iters)},
    )
    u = np.minimum.accumulate(np.clip(res.x, 0.0, ub))
    s = scale_of(u)
    if not s > 0:
        u, s = u0, scale_of(u0)
    best_u = u / s
    lower = float(a @ best_u)

    cut_rows, cut_rhs = [], []

    def add_cuts(v):
        for g in gauges:
            cut_rows.append(g.subgradient(v))
            cut_rhs.append(1.0)

    add_cuts(best_u)
    iterations = int(res.nit)
    upper = math.inf
    for _ in range(cfg.max_iters):
        A = np.vstack([np.array(cut_rows), mono]) if d > 1 else np.array(cut_rows)
        b = np.concatenate([cut_rhs, np.zeros(d - 1)])
        lp = _linprog(-a, A_ub=A, b_ub=b, bounds=bounds)
        if lp.status != 0:
            raise SolverError(f"certificate LP failed: {lp.message}")
        upper = min(upper, -lp.fun)
        iterations += 1
        if upper - lower <= cfg.tol * max(1.0, abs(upper)):
            break
        v = lp.x
        sv = scale_of(v)
        if sv > 0 and a @ v / sv > lower:
            best_u = v / sv
            lower = float(a @ best_u)
        add_cuts(v)
    else:
        raise NonConvergenceError(
            "support function did not reach tolerance", residual=upper - lower
        )
    y = _unsort(best_u, order, signs)
    residual = max(0.0, max(g(y) for g in gauges) - 1.0)
    return SupportResult(lower, y, lower, upper, residual, iterations)


def _default_pieces(objective):
    def pieces(y):
        val, g = objective(y)
        g = np.asarray(g, dtype=float)
        return [(val - g @ y, g)]

    return pieces


def concave_ascent(objective, y0, cfg: SolverConfig | None = None, *, pieces=None,
                   radius: float = 4.0, max_radius: float = 1e8, target: float | None = None,
                   A_ub=None, b_ub=None, lower=None) -> AscentResult:
    """Maximize a concave function given by ``objective(y) -> (value, supergradient)``.

    ``pieces(y)``, when given, returns affine majorants ``(c, g)`` with
    ``f(.) <= c + <g, .>`` that are tight at ``y``; the default uses the single
    supergradient returned by ``objective``. Structured objectives (a min of
    several concave pieces) converge much faster with one cut per piece.

    With ``step_rule="cutting-plane"`` the method is Kelley's: an LP over the
    collected cuts inside a box of half-width ``radius`` around ``y0`` gives
    an upper bound, its solution is the next query point. Each box starts
    with an SLSQP solve of the epigraph form ``max t, t <= piece_j(y)`` built
    from the same pieces, so curved pieces do not need thousands of cuts: at
    a KKT point the linearized model has the same optimum and the first LP
    already certifies it. When the best point
    sits on the box boundary the box is enlarged eightfold until the value
    stops improving by more than the tolerance (or ``max_radius`` is hit).
    Optional linear constraints ``A_ub @ y <= b_ub`` and elementwise
    ``lower`` bounds restrict the search (cutting-plane rule only).

    With ``step_rule="subgradient"`` the iteration is
    ``y += step * g / ||g||`` with ``step = radius / sqrt(t)``, or the Polyak
    step ``(target - f) / ||g||^2`` when a ``target`` value is supplied. No
    upper bound is available on that path (``upper`` is ``nan``).
    """
    cfg = cfg or SolverConfig()
    y0 = np.asarray(y0, dtype=float).copy()
    if cfg.step_rule == "subgradient":
        return _subgradient_ascent(objective, y0, cfg, radius, target)
    pieces = pieces or _default_pieces(objective)
    d = y0.size
    rows, rhs = [], []
    best, best_y = -math.inf, y0.copy()
    history = []
    y = y0.copy()
    R = float(radius)
    iterations = 0
    upper = math.inf
    prev_box_best = None
    on_boundary = False
    c = np.zeros(d + 1)
    c[-1] = -1.0
    lower = np.full(d, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    extra_rows = np.zeros((0, d + 1)) if A_ub is None else np.hstack(
        [np.atleast_2d(A_ub), np.zeros((np.atleast_2d(A_ub).shape[0], 1))])
    extra_rhs = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    while True:
        converged = False
        lo = np.maximum(y0 - R, lower)
        y = _epigraph_polish(pieces, best_y if math.isfinite(best) else y, lo, y0 + R,
                             extra_rows[:, :d], extra_rhs)
        while iterations < cfg.max_iters:
            iterations += 1
            val, _ = objective(y)
            if not math.isfinite(val):
                raise SolverError(f"objective is not finite at iterate {iterations}")
            if val > best:
                best, best_y = float(val), y.copy()
            history.append(best)
            for off, g in pieces(y):
                rows.append(np.append(-np.asarray(g, dtype=float), 1.0))
                rhs.append(off)
            lp = _linprog(c, A_ub=np.vstack([np.array(rows), extra_rows]),
                          b_ub=np.concatenate([rhs, extra_rhs]),
                          bounds=list(zip(lo, y0 + R)) + [(None, None)])
            if lp.status != 0:
                raise SolverError(f"cutting-plane LP failed: {lp.message}")
            upper = -lp.fun
            y = lp.x[:d]
            if upper - best <= cfg.tol * max(1.0, abs(upper)):
                converged = True
                break
        if not converged:
            raise NonConvergenceError("concave ascent hit the iteration budget", residual=upper - best)
        on_boundary = bool(_on_box(best_y, y0, R, lower) or _on_box(y, y0, R, lower))
        improved = prev_box_best is None or best - prev_box_best > cfg.tol * max(1.0, abs(best))
        if not on_boundary or not improved or R >= max_radius:
            break
        prev_box_best = best
        R *= 8.0
    return AscentResult(best, best_y, upper, iterations, R, history, on_boundary)


def _epigraph_polish(pieces, y, lo, hi, A, b):
    d = y.size
    y = np.clip(y, lo, hi)

    def cons(z):
        return np.array([c + g @ z[:d] - z[d] for c, g in pieces(z[:d])])

    def jac(z):
        return np.array([np.append(g, -1.0) for _, g in pieces(z[:d])])

    constraints = [{"type": "ineq", "fun": cons, "jac": jac}]
    if A.shape[0]:
        A_full = np.hstack([A, np.zeros((A.shape[0], 1))])
        constraints.append({"type": "ineq", "fun": lambda z: b - A_full @ z, "jac": lambda z: -A_full})
    t0 = float(np.min(cons(np.append(y, 0.0))))
    bounds = [(l if np.isfinite(l) else None, h) for l, h in zip(lo, hi)] + [(None, None)]
    res = minimize(lambda z: -z[d], np.append(y, t0), jac=lambda z: np.append(np.zeros(d), -1.0),
                   bounds=bounds, constraints=constraints, method="SLSQP",
                   options={"ftol": 1e-15, "maxiter": 500})
    return np.clip(res.x[:d], lo, hi)


def _on_box(y, y0, R, lower):
    hi = y >= y0 + R * (1 - 1e-9)
    lo = (y <= y0 - R * (1 - 1e-9)) & (y0 - R > lower)
    return bool(np.any(hi | lo))


def _subgradient_ascent(objective, y0, cfg, radius, target):
    best, best_y = -math.inf, y0.copy()
    history = []
    y = y0.copy()
    for t in range(1, cfg.max_iters + 1):
        val, g = objective(y)
        if not math.isfinite(val):
            raise SolverError(f"objective is not finite at iterate {t}")
        if val > best:
            best, best_y = float(val), y.copy()
        history.append(best)
        g = np.asarray(g, dtype=float)
        gn = float(np.linalg.norm(g))
        if gn == 0.0:
            break
        if target is not None and target > val:
            step = (target - val) / gn**2
        else:
            step = radius / math.sqrt(t) / gn
        y = y + step * g
    return AscentResult(best, best_y, math.nan, len(history), radius, history, False)


def decomposition_min(x, phi, p: float, budget: float | None = None,
                      cfg: SolverConfig | None = None) -> DecompositionResult:
    """``min sum_l phi[l] * |||z_l|||_(l)`` over ``z_1 + ... + z_d = x``.

    With ``budget`` set, the extra constraint ``sum_l |||z_l|||_(l) <= budget``
    is imposed. ``phi`` is indexed ``0..d`` (entry 0 is ignored) and must be
    finite and nonnegative on ``1..d``.

    Each coordinate-l norm of an l_p source is written primally, through its
    unit ball being the convex hull of l-sparse points of the l_p sphere:
    ``|||z|||_(l) = min sum_{|K|=l} ||v_K||_p`` over ``sum_K v_K = z`` with
    ``v_K`` supported in ``K``. This never evaluates a dual norm, so it is an
    independent route to anything computed through dual balls. The conic
    program is solved with cvxpy.
    """
    import cvxpy as cp

    x = np.asarray(x, dtype=float)
    d = x.size
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (d + 1,) or not np.all(np.isfinite(phi[1:])) or np.any(phi[1:] < 0):
        raise ValueError("phi must have d + 1 entries, finite and nonnegative on 1..d")
    pnorm = "inf" if math.isinf(p) else p
    blocks, block_norms, group_vars = [], [], []
    for l in range(1, d + 1):
        parts, norms = [], []
        for K in itertools.combinations(range(d), l):
            v = cp.Variable(l)
            E = np.zeros((d, l))
            E[list(K), range(l)] = 1.0
            parts.append(E @ v)
            norms.append(cp.pnorm(v, pnorm))
        blocks.append(cp.sum(parts) if len(parts) > 1 else parts[0])
        block_norms.append(cp.sum(norms) if len(norms) > 1 else norms[0])
        group_vars.append(parts)
    constraints = [cp.sum(blocks) == x if d > 1 else blocks[0] == x]
    if budget is not None:
        constraints.append(cp.sum(block_norms) <= budget)
    objective = cp.Minimize(cp.sum([phi[l] * block_norms[l - 1] for l in range(1, d + 1)]))
    prob = cp.Problem(objective, constraints)
    try:
        prob.solve(solver="CLARABEL")
    except cp.error.SolverError as exc:
        raise NonConvergenceError(f"decomposition program failed: {exc}") from exc
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise NonConvergenceError(f"decomposition program status {prob.status}")
    Z = np.array([np.asarray(b.value, dtype=float).reshape(d) for b in blocks])
    norms_exact = np.array([_backend.support_norm(Z[l - 1], l, p) for l in range(1, d + 1)])
    value = float(np.dot(phi[1:], norms_exact))
    residual_sum = float(np.max(np.abs(Z.sum(axis=0) - x)))
    residual_budget = 0.0 if budget is None else max(0.0, float(norms_exact.sum() - budget))
    return DecompositionResult(value, Z, residual_sum, residual_budget, prob.status)


def gauge_bisection(point, gauge=None, *, contains=None, tol: float = 1e-12) -> float:
    """Gauge value at ``point``.

    Passes through to ``gauge(point)`` when an evaluator is given; otherwise
    bisects on ``lam`` with the membership test ``contains(point / lam)``.
    """
    point = np.asarray(point, dtype=float)
    if not np.any(point):
        return 0.0
    if gauge is not None:
        return float(gauge(point))
    if contains is None:
        raise ValueError("need a gauge evaluator or a membership test")
    lo, hi = 0.0, 1.0
    while not contains(point / hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise SolverError("gauge bracket exploded; is the set bounded away from 0?")
    while contains(point / (hi / 2)) and hi > 1e-300:
        hi /= 2
        lo = hi / 2
    lo = hi / 2 if lo == 0.0 else lo
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if contains(point / mid):
            hi = mid
        else:
            lo = mid
    return hi
