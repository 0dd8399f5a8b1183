"""Compare the numba and numpy backends of the toy-group enumeration kernels.

    python benchmarks/bench_kernels.py [--repeat 20]

Also times the pure-Python loop each kernel replaces, since that is what the
oracles would otherwise run.  numba timings exclude the first (compiling) call.
"""

import argparse
import statistics
import time

import numpy as np

from noins import kernels
from noins.group import TOY


def timeit(fn, repeat):
    fn()  # warm-up / JIT
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def python_match(table, targets):
    tl = list(table)
    return [[v == t for v in tl] for t in targets]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    p, q, g = TOY.p, TOY.q, TOY.g.raw
    rng = np.random.default_rng(0)
    targets = kernels.power_table(g, p, q, "numpy")[rng.permutation(q)]
    exps = rng.integers(0, q, size=q * q)
    bases = rng.integers(1, p, size=q * q)

    table = kernels.power_table(g, p, q, "numpy")
    cases = {
        "power_table": lambda b: kernels.power_table(g, p, q, b),
        "powmod (q^2)": lambda b: kernels.powmod(bases, exps, p, b),
        "match_matrix (q x q)": lambda b: kernels.match_matrix(table, targets, b),
        "orbit_size": lambda b: kernels.orbit_size(table, 3, p, b),
    }
    backends = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    print(f"toy group p={p} q={q}; median of {args.repeat} runs (ms)")
    print(f"{'kernel':<22}" + "".join(f"{b:>10}" for b in backends) + f"{'python':>10}")
    for name, fn in cases.items():
        row = [timeit(lambda b=b: fn(b), args.repeat) * 1e3 for b in backends]
        py = ""
        if name.startswith("match"):
            py = f"{timeit(lambda: python_match(table, targets), 3) * 1e3:>10.2f}"
        print(f"{name:<22}" + "".join(f"{t:>10.3f}" for t in row) + py)


if __name__ == "__main__":
    main()
