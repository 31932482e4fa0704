"""Time the compiled and numpy block kernels on the stacks the samplers use.

Run: python3 benchmarks/bench_kernels.py [--repeat 5]
The compiled backend is skipped with a note when the extension is not built.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from opspace_lab._kernels import _pykernels

try:
    from opspace_lab._kernels import _ckernels
except ImportError:  # extension not built
    _ckernels = None

CASES = [
    # (stack size, block size) as produced by modulus sampling at n = 1..8
    (500 * 64, 1),
    (500 * 16, 2),
    (500 * 64, 4),
    (256 * 256, 2),
]
COEFFS = np.array([0.0, -1.0, 1.0, 0.5], dtype=np.complex128)


def _stack(rng, s, d):
    return np.ascontiguousarray(rng.standard_normal((s, d, d)) + 1j * rng.standard_normal((s, d, d)))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<12}{'stack':>8}{'d':>4}{'python ms':>12}{'cython ms':>12}{'speedup':>9}")
    for s, d in CASES:
        a, b = _stack(rng, s, d), _stack(rng, s, d)
        for name, args_ in (("block_matmul", (a, b)), ("block_poly", (a, COEFFS))):
            py = getattr(_pykernels, name)
            t_py = min(timeit.repeat(lambda: py(*args_), number=1, repeat=args.repeat)) * 1e3
            if _ckernels is None:
                print(f"{name:<12}{s:>8}{d:>4}{t_py:>12.2f}{'n/a':>12}{'':>9}")
                continue
            cy = getattr(_ckernels, name)
            assert np.allclose(py(*args_), cy(*args_), atol=1e-10)
            t_cy = min(timeit.repeat(lambda: cy(*args_), number=1, repeat=args.repeat)) * 1e3
            print(f"{name:<12}{s:>8}{d:>4}{t_py:>12.2f}{t_cy:>12.2f}{t_py / t_cy:>9.2f}")


if __name__ == "__main__":
    main()
