"""Select the compiled kernels when importable, else the pure-Python ones.

Set ``CAPRA_PURE_PYTHON=1`` to force the fallback (used by the benchmark and
by the backend-equivalence tests).
"""
import os

BACKEND = "python"

if os.environ.get("CAPRA_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels

top_k_norm = kernels.top_k_norm
top_norm_sequence = kernels.top_norm_sequence
support_norm = kernels.support_norm
support_norm_sequence = kernels.support_norm_sequence

__all__ = [
    "BACKEND",
    "top_k_norm",
    "top_norm_sequence",
    "support_norm",
    "support_norm_sequence",
]
