"""Compare the compiled and numpy congruence kernels.

Usage: ``python benchmarks/bench_kernels.py [--repeat N]``

For each stack size ``(m, d)`` the script times ``congruence_sum`` and
``congruence_terms`` from both backends, checks that they agree, and prints
the best-of-N time per call and the speed-up of the compiled kernel.
"""

import argparse
import sys
import timeit

import numpy as np

from povmlab import _pykernels

try:
    from povmlab import _ckernels
except ImportError:
    _ckernels = None

SIZES = [(2, 2), (4, 2), (6, 3), (6, 4), (16, 4), (8, 8), (4, 16), (2, 32)]


def _stack(gen, m, d):
    return gen.standard_normal((m, d, d)) + 1j * gen.standard_normal((m, d, d))


def _best(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1
    gen = np.random.default_rng(0)
    header = f"{'kernel':<17}{'m':>4}{'d':>4}{'python (us)':>14}{'cython (us)':>14}{'speed-up':>10}"
    print(header)
    print("-" * len(header))
    for name in ("congruence_sum", "congruence_terms"):
        py, cy = getattr(_pykernels, name), getattr(_ckernels, name)
        for m, d in SIZES:
            a, x = _stack(gen, m, d), _stack(gen, m, d)
            diff = np.max(np.abs(py(a, x) - cy(a, x)))
            if diff > 1e-10:
                raise SystemExit(f"{name} backends disagree at m={m}, d={d}: {diff:.2e}")
            t_py = _best(lambda: py(a, x), args.repeat)
            t_cy = _best(lambda: cy(a, x), args.repeat)
            print(f"{name:<17}{m:>4}{d:>4}{t_py * 1e6:>14.2f}{t_cy * 1e6:>14.2f}{t_py / t_cy:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
