"""Compare the compiled and pure-Python sorting kernels.

    python3 benchmarks/bench_kernels.py [--sizes 10 100 1000 10000] [--repeat 200]

Both backends are imported directly, so the comparison does not depend on
which one ``capra._backend`` selected.
"""
import argparse
import timeit

import numpy as np

from capra import _kernels_py

try:
    from capra import _kernels
except ImportError:  # pragma: no cover
    _kernels = None

CASES = [
    ("top_k_norm", lambda m, v: m.top_k_norm(v, max(1, v.size // 4), 2.0)),
    ("top_norm_sequence", lambda m, v: m.top_norm_sequence(v, 3.0)),
    ("support_norm", lambda m, v: m.support_norm(v, max(1, v.size // 4), 2.0)),
    ("support_norm_sequence", lambda m, v: m.support_norm_sequence(v, 1.5)),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 100, 1000, 10000])
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
        return
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<24}{'d':>7}{'python (us)':>14}{'cython (us)':>14}{'speedup':>10}{'max |diff|':>12}")
    for name, call in CASES:
        for d in args.sizes:
            if name == "support_norm_sequence" and d > 1000:
                continue
            v = rng.normal(size=d)
            n = max(1, args.repeat // (10 if d >= 1000 else 1))
            t_py = min(timeit.repeat(lambda: call(_kernels_py, v), number=n, repeat=3)) / n
            t_cy = min(timeit.repeat(lambda: call(_kernels, v), number=n, repeat=3)) / n
            diff = float(np.max(np.abs(np.asarray(call(_kernels_py, v)) - np.asarray(call(_kernels, v)))))
            print(f"{name:<24}{d:>7}{t_py * 1e6:>14.1f}{t_cy * 1e6:>14.1f}{t_py / t_cy:>10.1f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
