"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Each case is one full deficit breakdown (four integrals) or one coverage
evaluation (the two integrals the minimizer uses).
"""

import argparse
import importlib
import sys
import timeit

from selcover import _backend, distributions
from selcover.coverage import Scenario, coverage, deficits

coverage_module = importlib.import_module("selcover.coverage")

CASES = [
    ("breakdown m=40 rho=0.6 gamma=2", lambda: deficits(Scenario(40, 0.6, 0.95, 0.1), 2.0)),
    ("breakdown m=1 rho=0.8 gamma=1.5", lambda: deficits(Scenario(1, 0.8, 0.9, 0.1), 1.5)),
    ("breakdown m=100 rho=0.3 gamma=6", lambda: deficits(Scenario(100, 0.3, 0.98, 0.02), 6.0)),
    ("coverage m=10 rho=0.6 gamma=1", lambda: coverage(Scenario(10, 0.6, 0.95, 0.05), 1.0)),
]


def use(module):
    distributions.kernels = module
    coverage_module.kernels = module


def best_of(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.2:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    if _backend.compiled_kernels is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1
    print(f"{'case':36s}{'cython ms':>12s}{'python ms':>12s}{'speed-up':>10s}")
    for name, fn in CASES:
        use(_backend.compiled_kernels)
        fast = best_of(fn, args.repeat)
        use(_backend.python_kernels)
        slow = best_of(fn, args.repeat)
        print(f"{name:36s}{fast * 1e3:12.2f}{slow * 1e3:12.2f}{slow / fast:10.1f}x")
    use(_backend.kernels)
    return 0


if __name__ == "__main__":
    sys.exit(main())
