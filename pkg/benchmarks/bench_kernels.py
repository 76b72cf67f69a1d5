"""Time the compiled and pure-numpy kernel backends on the same inputs.

    python benchmarks/bench_kernels.py [--n 257 513 1025] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from fracladder.kernels import get_backend
from fracladder.operator import QuadratureConfig, element_pair_matrices


def bench(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, nargs="+", default=[257, 513, 1025])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    try:
        backends = {"python": get_backend("python"), "cython": get_backend("cython")}
    except ImportError:
        print("compiled extension not built; only the python backend is available")
        backends = {"python": get_backend("python")}
    s = 0.4
    print(f"{'kernel':<14}{'n':>7}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for n in args.n:
        local, _ = element_pair_matrices(n + 1, s, QuadratureConfig())
        local = np.ascontiguousarray(local)
        values = np.sin(np.linspace(0.0, 3.0, 32 * (n + 1)))
        cases = {
            "scatter_pairs": lambda k: k.scatter_pairs(local, n),
            "offset_sum": lambda k: k.offset_sum(values, s, 8),
        }
        for name, call in cases.items():
            ref = call(backends["python"])
            times = {}
            for b, k in backends.items():
                np.testing.assert_allclose(call(k), ref, rtol=1e-12, atol=0)
                times[b] = bench(lambda: call(k), args.repeat)
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{name:<14}{n:>7}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values())
                  + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
