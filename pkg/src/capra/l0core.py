"""The l0 pseudonorm, supports, coordinate projections and level sets.

All public interfaces use 1-based coordinate indices, matching the
``{1, ..., d}`` convention of the JSON formats; arrays are 0-based inside.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def as_vector(x) -> np.ndarray:
    """Validate and convert to a 1-d float array with finite entries."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a nonempty 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


@dataclass(frozen=True)
class SupportSet:
    """Sorted subset of ``{1..dim}``."""

    indices: tuple
    dim: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("support indices must be strictly increasing")
        if idx and (idx[0] < 1 or idx[-1] > self.dim):
            raise ValueError(f"support indices must lie in 1..{self.dim}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_iterable(cls, indices, dim: int) -> "SupportSet":
        return cls(tuple(sorted(set(int(i) for i in indices))), dim)

    def __len__(self):
        return len(self.indices)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.dim, dtype=bool)
        m[[i - 1 for i in self.indices]] = True
        return m

    def to_json(self):
        return list(self.indices)


def l0(x, tol: float = 0.0) -> int:
    """Number of entries with magnitude strictly above ``tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return int(np.count_nonzero(np.abs(as_vector(x)) > tol))


def support(x, tol: float = 0.0) -> SupportSet:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    v = as_vector(x)
    return SupportSet(tuple(int(i) + 1 for i in np.flatnonzero(np.abs(v) > tol)), v.size)


def project(x, K: SupportSet) -> np.ndarray:
    """Orthogonal projection onto the coordinate subspace indexed by ``K``."""
    v = as_vector(x)
    if K.dim != v.size:
        raise ValueError(f"support set dimension {K.dim} does not match vector dimension {v.size}")
    return np.where(K.mask(), v, 0.0)


def level_set_contains(x, k: int, tol: float = 0.0) -> bool:
    """Whether ``l0(x, tol) <= k``."""
    d = as_vector(x).size
    if not 0 <= k <= d:
        raise ValueError(f"k must lie in 0..{d}, got {k}")
    return l0(x, tol) <= k
