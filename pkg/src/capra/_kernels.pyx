# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled sorting kernels; same surface as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, sqrt, isinf, INFINITY

cnp.import_array()


cdef inline double _powd(double x, double e) noexcept nogil:
    if e == 2.0:
        return x * x
    if e == 1.0:
        return x
    return pow(x, e)


cdef inline double _rootd(double s, double e) noexcept nogil:
    if e == 2.0:
        return sqrt(s)
    if e == 1.0:
        return s
    return pow(s, 1.0 / e)


def _sorted_abs(v):
    z = np.abs(np.ascontiguousarray(v, dtype=np.float64).reshape(-1))
    z.sort()
    return np.ascontiguousarray(z[::-1])


cdef double _lq(double[::1] z, Py_ssize_t m, double q) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0, scale
    if m == 0 or z[0] == 0.0:
        return 0.0
    if isinf(q):
        return z[0]
    if q == 1.0:
        for i in range(m):
            s += z[i]
        return s
    scale = z[0]
    for i in range(m):
        s += _powd(z[i] / scale, q)
    return scale * _rootd(s, q)


cdef double _support(double[::1] z, double[::1] tails, double[::1] heads,
                     Py_ssize_t d, Py_ssize_t k, double p) noexcept nogil:
    # heads[i] = sum_{j < i} (z_j / z_0)^p
    cdef Py_ssize_t r, head
    cdef double tail, left, s, scale
    if d == 0 or z[0] == 0.0:
        return 0.0
    if k >= d:
        return _lq(z, d, p)
    if k == 1 or p == 1.0:
        return tails[0]
    if isinf(p):
        return z[0] if z[0] > tails[0] / k else tails[0] / k
    scale = z[0]
    for r in range(k):
        head = k - r - 1
        tail = tails[head]
        left = INFINITY if head == 0 else z[head - 1]
        if left > tail / (r + 1):
            s = heads[head] + _powd(tail / scale, p) / pow(r + 1.0, p - 1.0)
            return scale * _rootd(s, p)
    return -1.0


def top_k_norm(y, Py_ssize_t k, double q):
    if k <= 0:
        return 0.0
    cdef double[::1] z = _sorted_abs(y)
    if k > z.shape[0]:
        k = z.shape[0]
    return _lq(z, k, q)


def top_norm_sequence(y, double q):
    z_arr = _sorted_abs(y)
    cdef Py_ssize_t d = z_arr.shape[0], i
    out_arr = np.zeros(d + 1)
    cdef double[::1] out = out_arr
    cdef double[::1] w
    cdef double s = 0.0, scale
    if d == 0 or z_arr[0] == 0.0:
        return out_arr
    scale = z_arr[0]
    if isinf(q):
        out_arr[1:] = scale
        return out_arr
    # powers and roots as vectorized passes: numpy's pow beats a libm call per entry
    w = z_arr if q == 1.0 else np.ascontiguousarray((z_arr / scale) ** q)
    for i in range(d):
        s += w[i]
        out[i + 1] = s
    if q == 2.0:
        out_arr[1:] = scale * np.sqrt(out_arr[1:])
    elif q != 1.0:
        out_arr[1:] = scale * out_arr[1:] ** (1.0 / q)
    return out_arr


cdef _prefix_tables(double[::1] z, double p):
    cdef Py_ssize_t d = z.shape[0], i
    tails_arr = np.zeros(d)
    heads_arr = np.zeros(d + 1)
    cdef double[::1] tails = tails_arr
    cdef double[::1] heads = heads_arr
    cdef double s = 0.0, scale
    for i in range(d - 1, -1, -1):
        s += z[i]
        tails[i] = s
    if d > 0 and z[0] > 0.0 and not isinf(p):
        scale = z[0]
        for i in range(d):
            heads[i + 1] = heads[i] + _powd(z[i] / scale, p)
    return tails_arr, heads_arr


def support_norm(x, Py_ssize_t k, double p):
    cdef double[::1] z = _sorted_abs(x)
    tails, heads = _prefix_tables(z, p)
    cdef double out = _support(z, tails, heads, z.shape[0], k, p)
    if out < 0.0:
        raise AssertionError("pooling index not found")
    return out


def support_norm_sequence(x, double p):
    cdef double[::1] z = _sorted_abs(x)
    cdef Py_ssize_t d = z.shape[0], k
    tails_arr, heads_arr = _prefix_tables(z, p)
    cdef double[::1] tails = tails_arr
    cdef double[::1] heads = heads_arr
    out_arr = np.zeros(d)
    cdef double[::1] out = out_arr
    for k in range(1, d + 1):
        out[k - 1] = _support(z, tails, heads, d, k, p)
    return out_arr
