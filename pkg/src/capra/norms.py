"""lp source norms and the coordinate-k norm sequences they generate.

For an lp source norm with dual exponent q:

* the dual coordinate-k norm of ``y`` is the top-(k, q) norm, the lq norm of
  the k largest magnitudes of ``y`` (0 for k = 0);
* the coordinate-k norm of ``x`` is its dual, the (p, k)-support norm, whose
  unit ball is the convex hull of the k-sparse points of the lp unit sphere.

Closed forms are evaluated by the sorting kernels in :mod:`capra._backend`.
The primal norm also has a solver route (support function of the dual ball)
used to validate the closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .l0core import SupportSet, as_vector, project
from .solver import SolverConfig, SupportResult, support_function_over_ball


@dataclass(frozen=True)
class SourceNorm:
    """An lp norm, ``p`` in ``[1, inf]``; ``q`` is the conjugate exponent."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        if math.isnan(p) or p < 1.0:
            raise ValueError(f"p must lie in [1, inf], got {self.p!r}")
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> float:
        if self.p == 1.0:
            return math.inf
        if math.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    @property
    def strictly_convex(self) -> bool:
        """Whether the unit sphere has no segments (1 < p < inf)."""
        return 1.0 < self.p < math.inf

    @classmethod
    def parse(cls, token) -> "SourceNorm":
        if isinstance(token, SourceNorm):
            return token
        if isinstance(token, str):
            t = token.strip().lower()
            if t in ("inf", "+inf", "infinity"):
                return cls(math.inf)
            try:
                return cls(float(t))
            except ValueError:
                raise ValueError(f"cannot parse p from {token!r}") from None
        return cls(float(token))

    def to_json(self):
        return "inf" if math.isinf(self.p) else self.p


def as_source(src) -> SourceNorm:
    return SourceNorm.parse(src)


def _lp(v, p):
    return float(np.linalg.norm(v, ord=p)) if v.size else 0.0


def source_norm(x, src) -> float:
    return _lp(as_vector(x), as_source(src).p)


def dual_norm(y, src) -> float:
    return _lp(as_vector(y), as_source(src).q)


def _check_supported(v, K: SupportSet, what):
    if K.dim != v.size:
        raise ValueError(f"support set dimension {K.dim} does not match vector dimension {v.size}")
    if np.any(v[~K.mask()] != 0.0):
        raise ValueError(f"{what} is not supported in {list(K.indices)}")


def restriction_norm(x, K: SupportSet, src) -> float:
    """Source norm restricted to vectors supported in ``K``."""
    v = as_vector(x)
    _check_supported(v, K, "x")
    return _lp(v, as_source(src).p)


def k_star_norm(y, K: SupportSet, src) -> float:
    """Dual norm of the ``K``-restriction: the lq norm of ``y`` on ``K``."""
    v = as_vector(y)
    _check_supported(v, K, "y")
    return _lp(project(v, K), as_source(src).q)


def _check_k(k, d, lo):
    if not isinstance(k, (int, np.integer)) or not lo <= k <= d:
        raise ValueError(f"k must be an integer in {lo}..{d}, got {k!r}")
    return int(k)


def dual_coordinate_norm(y, k: int, src) -> float:
    """Top-(k, q) norm of ``y``."""
    v = as_vector(y)
    k = _check_k(k, v.size, 0)
    return float(_backend.top_k_norm(v, k, as_source(src).q))


class TopNormGauge:
    """The top-(k, q) norm as a gauge with a subgradient oracle.

    ``scale`` multiplies the norm; a scaled gauge ``c * g`` has unit ball
    ``(1/c) * {g <= 1}``.
    """

    symmetric = True

    def __init__(self, k: int, q: float, scale: float = 1.0):
        if k < 1:
            raise ValueError("top-k gauge needs k >= 1")
        self.k, self.q, self.scale = int(k), float(q), float(scale)

    def __call__(self, y) -> float:
        return self.scale * float(_backend.top_k_norm(np.asarray(y, dtype=float), self.k, self.q))

    def subgradient(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        g = np.zeros_like(y)
        idx = np.argsort(-np.abs(y), kind="stable")[: self.k]
        yk = y[idx]
        s = np.where(yk < 0, -1.0, 1.0)
        if math.isinf(self.q):
            g[idx[0]] = s[0]
        elif self.q == 1.0:
            g[idx] = s
        else:
            nrm = float(np.linalg.norm(yk, ord=self.q))
            if nrm > 0:
                g[idx] = s * (np.abs(yk) / nrm) ** (self.q - 1.0)
        return self.scale * g

    def __repr__(self):
        return f"TopNormGauge(k={self.k}, q={self.q}, scale={self.scale})"


def coordinate_norm_result(x, k: int, src, cfg: SolverConfig | None = None) -> SupportResult:
    """Solver route for the coordinate-k norm, with its certificate."""
    v = as_vector(x)
    k = _check_k(k, v.size, 1)
    return support_function_over_ball(v, TopNormGauge(k, as_source(src).q), cfg)


def coordinate_norm(x, k: int, src, cfg: SolverConfig | None = None, method: str = "auto") -> float:
    """(p, k)-support norm of ``x``, ``1 <= k <= d``.

    ``method="closed"`` (and ``"auto"``) uses the sorting formula: with
    ``z`` the sorted magnitudes and ``r`` the smallest index such that
    ``z[k-r-1] > (z[k-r] + ... + z[d]) / (r + 1)``, the last ``r + 1``
    constrained coordinates are pooled with the tail. ``method="solver"``
    maximizes ``<x, y>`` over the top-(k, q) unit ball instead.
    """
    v = as_vector(x)
    k = _check_k(k, v.size, 1)
    src = as_source(src)
    if method in ("auto", "closed"):
        return float(_backend.support_norm(v, k, src.p))
    if method == "solver":
        return coordinate_norm_result(v, k, src, cfg).value
    raise ValueError(f"unknown method {method!r}")


def coordinate_norm_argmax(x, k: int, src) -> np.ndarray:
    """A maximizer of ``<x, y>`` over the top-(k, q) unit ball, in closed form.

    It is the dual certificate of the pooling formula: ``y`` has the signs
    of ``x``, magnitudes ``(z_i / N)^(p-1)`` on the unpooled head and the
    common value ``(T / (r+1) / N)^(p-1)`` on the pooled block, where ``N``
    is the coordinate-k norm. For p = 1 it is the sign vector; for p = inf it
    is ``e_1`` or ``1/k`` times the sign vector, whichever attains ``N``.
    """
    v = as_vector(x)
    d = v.size
    k = _check_k(k, d, 1)
    src = as_source(src)
    order = np.argsort(-np.abs(v), kind="stable")
    z = np.abs(v[order])
    nrm = float(_backend.support_norm(v, k, src.p))
    u = np.zeros(d)
    if nrm == 0.0:
        return u
    if src.p == 1.0:
        u[:] = 1.0
    elif math.isinf(src.p):
        tail = float(z.sum())
        if z[0] >= tail / k:
            u[0] = 1.0
        else:
            u[:] = 1.0 / k
    else:
        tails = np.cumsum(z[::-1])[::-1]
        head, pooled = k, None
        if k < d:
            for r in range(k):
                head = k - r - 1
                left = math.inf if head == 0 else z[head - 1]
                if left > tails[head] / (r + 1):
                    pooled = tails[head] / (r + 1)
                    break
        u[:head] = (z[:head] / nrm) ** (src.p - 1.0)
        if pooled is not None:
            u[head:] = (pooled / nrm) ** (src.p - 1.0)
    y = np.zeros(d)
    y[order] = np.where(v[order] < 0, -1.0, 1.0) * u
    return y


@dataclass
class NormSequence:
    """``values[k-1]`` = coordinate-k norm of x, ``dual_values[k-1]`` = top-(k, q) norm of y."""

    values: np.ndarray
    dual_values: np.ndarray

    def to_json(self):
        return {"values": [float(v) for v in self.values],
                "dual_values": [float(v) for v in self.dual_values]}


def norm_sequence(x, src, cfg: SolverConfig | None = None, y=None, method: str = "auto") -> NormSequence:
    """Coordinate-k norms of ``x`` and top-(k, q) norms of ``y`` (default ``x``), k = 1..d."""
    v = as_vector(x)
    src = as_source(src)
    w = v if y is None else as_vector(y)
    if w.size != v.size:
        raise ValueError("x and y must have the same dimension")
    if method in ("auto", "closed"):
        values = np.asarray(_backend.support_norm_sequence(v, src.p), dtype=float)
    elif method == "solver":
        values = np.array([coordinate_norm(v, k, src, cfg, "solver") for k in range(1, v.size + 1)])
    else:
        raise ValueError(f"unknown method {method!r}")
    dual_values = np.asarray(_backend.top_norm_sequence(w, src.q), dtype=float)[1:]
    return NormSequence(values, dual_values)


def sparsity_from_grading(x, src, tol: float = 1e-6, cfg: SolverConfig | None = None,
                          method: str = "auto") -> int:
    """Smallest k whose coordinate-k norm matches the source norm.

    This is a lower bound on l0(x) for every source norm, and equals l0(x)
    when the source norm is strictly convex.
    """
    v = as_vector(x)
    if not np.any(v):
        raise ValueError("sparsity_from_grading needs x != 0")
    src = as_source(src)
    values = norm_sequence(v, src, cfg, method=method).values
    full = source_norm(v, src)
    for k, val in enumerate(values, start=1):
        if abs(val - full) <= tol * full:
            return k
    return v.size
