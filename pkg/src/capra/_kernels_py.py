"""Pure-Python fallback for the sorting kernels in ``_kernels.pyx``.

Both modules expose the same four functions; ``capra._backend`` picks one at
import time. Inputs are 1-d float arrays, exponents are floats with
``math.inf`` standing for infinity.
"""
import math

import numpy as np


def _sorted_magnitudes(v):
    return np.sort(np.abs(np.asarray(v, dtype=float)))[::-1]


def _lq_of_sorted(z, q):
    # z: nonnegative, sorted nonincreasing, nonempty
    if z.size == 0 or z[0] == 0.0:
        return 0.0
    if math.isinf(q):
        return float(z[0])
    if q == 1.0:
        return float(z.sum())
    scale = z[0]
    return float(scale * np.sum((z / scale) ** q) ** (1.0 / q))


def top_k_norm(y, k, q):
    """l_q norm of the ``k`` largest magnitudes of ``y`` (0 when k == 0)."""
    if k <= 0:
        return 0.0
    z = _sorted_magnitudes(y)
    return _lq_of_sorted(z[:k], q)


def top_norm_sequence(y, q):
    """All top-(k, q) norms, k = 0..d, as an array of length d + 1."""
    z = _sorted_magnitudes(y)
    d = z.size
    out = np.zeros(d + 1)
    if d == 0 or z[0] == 0.0:
        return out
    if math.isinf(q):
        out[1:] = z[0]
    elif q == 1.0:
        out[1:] = np.cumsum(z)
    else:
        scale = z[0]
        out[1:] = scale * np.cumsum((z / scale) ** q) ** (1.0 / q)
    return out


def _support_norm_sorted(z, tails, heads, k, p):
    # heads[i] = sum_{j < i} (z_j / z_0)^p
    d = z.size
    if z[0] == 0.0:
        return 0.0
    if k >= d:
        return _lq_of_sorted(z, p)
    if k == 1 or p == 1.0:
        return float(tails[0])
    if math.isinf(p):
        return max(float(z[0]), float(tails[0]) / k)
    scale = z[0]
    for r in range(k):
        # pool the last r + 1 constrained coordinates with the tail
        head = k - r - 1
        tail = tails[head]
        left = math.inf if head == 0 else z[head - 1]
        if left > tail / (r + 1):
            s = heads[head] + (tail / scale) ** p / (r + 1) ** (p - 1.0)
            return float(scale * s ** (1.0 / p))
    raise AssertionError("pooling index not found")  # pragma: no cover


def _tables(z, p):
    tails = np.cumsum(z[::-1])[::-1]
    heads = np.zeros(z.size + 1)
    if z.size and z[0] > 0 and not math.isinf(p):
        heads[1:] = np.cumsum((z / z[0]) ** p)
    return tails, heads


def support_norm(x, k, p):
    """(p, k)-support norm: the dual of the top-(k, q) norm, 1/p + 1/q = 1."""
    z = _sorted_magnitudes(x)
    return _support_norm_sorted(z, *_tables(z, p), k, p)


def support_norm_sequence(x, p):
    """(p, k)-support norms for k = 1..d, as an array of length d."""
    z = _sorted_magnitudes(x)
    d = z.size
    tails, heads = _tables(z, p)
    return np.array([_support_norm_sorted(z, tails, heads, k, p) for k in range(1, d + 1)])
