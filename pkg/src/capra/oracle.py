"""Brute-force reference computations, independent of the closed forms.

* :func:`dual_norm_by_subsets` enumerates every support of size <= k.
* :func:`legendre_on_grid` / :func:`legendre_transform` take discrete
  Fenchel conjugates by exhaustive maximization.
* :func:`gauge_by_sampled_atoms` brackets a coordinate-k norm from random
  k-sparse points of the unit sphere (upper bound) and the LP dual point
  (lower bound).

These are shipped with the library so ``capra check`` can run them.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from .l0core import as_vector
from .norms import as_source

MAX_GRID_POINTS = 10**7


@dataclass(frozen=True)
class GridSpec:
    """Square grid ``{lo, lo + step, ...} ^ dim`` (the upper end is included when hit)."""

    lo: float
    hi: float
    step: float
    dim: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("grid needs lo < hi")
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        if not 1 <= self.dim <= 3:
            raise ValueError("grid dimension must be 1, 2 or 3")
        if self.size > MAX_GRID_POINTS:
            raise ValueError(f"grid has {self.size} points, more than {MAX_GRID_POINTS}")

    @property
    def n_per_axis(self) -> int:
        return int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1

    @property
    def size(self) -> int:
        return self.n_per_axis**self.dim

    def axis(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.n_per_axis)

    def points(self) -> np.ndarray:
        axes = np.meshgrid(*([self.axis()] * self.dim), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=1)


@lru_cache(maxsize=256)
def _subset_masks(d: int, k: int) -> np.ndarray:
    rows = []
    for size in range(1, k + 1):
        for K in itertools.combinations(range(d), size):
            r = np.zeros(d)
            r[list(K)] = 1.0
            rows.append(r)
    return np.array(rows).reshape(-1, d)


def dual_norm_by_subsets(y, k: int, src):
    """``max_{|K| <= k} ||y_K||_q`` by enumerating all supports (d <= 20).

    A 2-d array is treated as a batch of row vectors and gives an array.
    """
    Y = np.asarray(y, dtype=float)
    batch = Y.ndim == 2
    W = np.abs(np.atleast_2d(Y))
    if W.ndim != 2 or W.shape[1] == 0 or not np.all(np.isfinite(W)):
        raise ValueError("expected finite vectors")
    d = W.shape[1]
    if d > 20:
        raise ValueError("subset enumeration is limited to d <= 20")
    if not 0 <= k <= d:
        raise ValueError(f"k must lie in 0..{d}")
    q = as_source(src).q
    if k == 0:
        out = np.zeros(W.shape[0])
    else:
        M = _subset_masks(d, int(k))
        if math.isinf(q):
            out = W.max(axis=1)
        elif q == 1.0:
            out = (W @ M.T).max(axis=1)
        else:
            s = W.max(axis=1)
            s = np.where(s > 0, s, 1.0)
            out = s * ((W / s[:, None]) ** q @ M.T).max(axis=1) ** (1.0 / q)
    return out if batch else float(out[0])


def legendre_transform(points, values, queries, chunk: int = 4_000_000, return_argmax: bool = False):
    """``max_j <query, points[j]> - values[j]`` for every query row.

    Entries of ``values`` equal to ``+inf`` are ignored (they encode points
    outside the domain). With ``return_argmax`` the index of a maximizing
    point (into the original ``points``) is returned as well, -1 if none.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    v = np.asarray(values, dtype=float).ravel()
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    keep = np.flatnonzero(np.isfinite(v) | (v < 0))
    P, v = P[keep], v[keep]
    out = np.full(Q.shape[0], -np.inf)
    arg = np.full(Q.shape[0], -1, dtype=np.int64)
    if P.shape[0]:
        qb = max(1, min(Q.shape[0], chunk // max(1, min(P.shape[0], chunk))))
        pb = max(1, chunk // qb)
        for i in range(0, Q.shape[0], qb):
            Qi = Q[i:i + qb]
            for j in range(0, P.shape[0], pb):
                block = Qi @ P[j:j + pb].T - v[j:j + pb]
                jm = block.argmax(axis=1)
                bm = block[np.arange(block.shape[0]), jm]
                better = bm > out[i:i + qb]
                out[i:i + qb][better] = bm[better]
                arg[i:i + qb][better] = keep[j + jm[better]]
    return (out, arg) if return_argmax else out


@dataclass
class LegendreResult:
    values: np.ndarray
    resolution_error: np.ndarray
    on_boundary: np.ndarray


def legendre_on_grid(f, grid: GridSpec, queries) -> LegendreResult:
    """Discrete Fenchel conjugate of ``f`` sampled on ``grid``, at ``queries``.

    ``f`` is a vectorized callable on ``(n, dim)`` arrays or the array of its
    grid values. ``resolution_error`` is ``step * sqrt(dim) / 2`` times a
    Lipschitz estimate of ``<query, .> - f`` (finite differences of ``f``);
    ``on_boundary`` flags maximizers on the grid edge, where truncation may
    bias the result low.
    """
    pts = grid.points()
    vals = np.asarray(f(pts) if callable(f) else f, dtype=float).ravel()
    if vals.size != pts.shape[0]:
        raise ValueError("grid values do not match the grid size")
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    conj, arg = legendre_transform(pts, vals, Q, return_argmax=True)
    finite = np.where(np.isfinite(vals), vals, np.nan).reshape([grid.n_per_axis] * grid.dim)
    if grid.n_per_axis > 1:
        grads = np.gradient(finite, grid.step)
        grads = grads if isinstance(grads, (list, tuple)) else [grads]
        lip_f = float(np.nanmax(np.sqrt(sum(g**2 for g in grads)))) if np.any(np.isfinite(finite)) else 0.0
    else:
        lip_f = 0.0
    lip_f = 0.0 if math.isnan(lip_f) else lip_f
    err = 0.5 * grid.step * math.sqrt(grid.dim) * (np.linalg.norm(Q, axis=1) + lip_f)
    edge = np.any((pts <= grid.lo + 1e-12) | (pts >= grid.axis()[-1] - 1e-12), axis=1)
    on_b = np.where(arg >= 0, edge[np.maximum(arg, 0)], False)
    return LegendreResult(conj, err, on_b)


@dataclass
class Bracket:
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def to_json(self):
        return {"lower": self.lower, "upper": self.upper, "width": self.width}


def sample_sparse_atoms(d: int, k: int, p: float, n_atoms: int, rng) -> np.ndarray:
    """Random k-sparse points of the lp unit sphere, with ``+-e_i`` always included."""
    atoms = [np.eye(d)]
    m = max(0, n_atoms - d)
    if m:
        A = np.zeros((m, d))
        g = rng.standard_normal((m, k))
        for i in range(m):
            A[i, rng.choice(d, size=k, replace=False)] = g[i]
        nrm = np.linalg.norm(A, ord=p, axis=1)
        atoms.append(A[nrm > 0] / nrm[nrm > 0, None])
    A = np.vstack(atoms)
    return np.vstack([A, -A])


def gauge_by_sampled_atoms(x, k: int, src, n_atoms: int = 10_000, seed: int = 0) -> Bracket:
    """Bracket ``|||x|||_(k)`` using the convex hull of sampled k-sparse unit atoms.

    Upper bound: the LP ``min sum(lam)`` with ``sum_j lam_j a_j = x``,
    ``lam >= 0``, over the sampled atoms (a smaller hull gives a larger
    gauge). Lower bound: the LP dual point ``y`` rescaled by its top-(k, q)
    norm from :func:`dual_norm_by_subsets`, which makes it feasible for the
    exact dual ball.
    """
    v = as_vector(x)
    d = v.size
    if d > 4:
        raise ValueError("sampled-atom gauge is limited to d <= 4")
    if not 1 <= k <= d:
        raise ValueError(f"k must lie in 1..{d}")
    if not 1 <= n_atoms <= 10**5:
        raise ValueError("n_atoms must lie in 1..1e5")
    if not np.any(v):
        return Bracket(0.0, 0.0)
    src = as_source(src)
    rng = np.random.default_rng(seed)
    A = sample_sparse_atoms(d, int(k), src.p, n_atoms, rng)
    lp = linprog(np.ones(A.shape[0]), A_eq=A.T, b_eq=v, bounds=(0, None), method="highs")
    if lp.status != 0:
        raise RuntimeError(f"atom LP failed: {lp.message}")
    upper = float(lp.fun)
    y = np.asarray(lp.eqlin.marginals, dtype=float)
    ny = dual_norm_by_subsets(y, k, src)
    lower = float(v @ y) / ny if ny > 0 else 0.0
    return Bracket(min(lower, upper), upper)
