import math
import os

import numpy as np
import pytest

from capra import _backend, _kernels_py

try:
    from capra import _kernels
except ImportError:  # pragma: no cover
    _kernels = None

needs_compiled = pytest.mark.skipif(_kernels is None, reason="compiled kernels not built")


def test_backend_selected():
    assert _backend.BACKEND in ("cython", "python")
    forced = os.environ.get("CAPRA_PURE_PYTHON", "") not in ("", "0")
    expected = "cython" if _kernels is not None and not forced else "python"
    assert _backend.BACKEND == expected


@needs_compiled
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, math.inf])
def test_compiled_matches_pure_python(rng, p):
    q = 1.0 if math.isinf(p) else (math.inf if p == 1.0 else p / (p - 1))
    for d in (1, 2, 5, 17, 300):
        for _ in range(5):
            x = rng.normal(size=d) * (rng.random(d) < 0.7)
            np.testing.assert_allclose(_kernels.support_norm_sequence(x, p),
                                       _kernels_py.support_norm_sequence(x, p), rtol=1e-12, atol=1e-14)
            np.testing.assert_allclose(_kernels.top_norm_sequence(x, q),
                                       _kernels_py.top_norm_sequence(x, q), rtol=1e-12, atol=1e-14)
            for k in {1, max(1, d // 2), d}:
                assert _kernels.support_norm(x, k, p) == pytest.approx(_kernels_py.support_norm(x, k, p), rel=1e-12, abs=1e-14)
                assert _kernels.top_k_norm(x, k, q) == pytest.approx(_kernels_py.top_k_norm(x, k, q), rel=1e-12, abs=1e-14)


def test_pure_python_edge_cases():
    for mod in filter(None, (_kernels_py, _kernels)):
        assert mod.top_k_norm(np.array([3.0, -4.0]), 0, 2.0) == 0.0
        assert mod.support_norm(np.zeros(3), 2, 2.0) == 0.0
        np.testing.assert_array_equal(mod.top_norm_sequence(np.zeros(2), 2.0), [0, 0, 0])
        assert mod.support_norm(np.array([1e-300, 1e-300]), 1, 2.0) == pytest.approx(2e-300)
        assert mod.support_norm(np.array([1e200, 1e200]), 2, 2.0) == pytest.approx(math.sqrt(2) * 1e200)
