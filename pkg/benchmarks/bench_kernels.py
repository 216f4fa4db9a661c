"""Compare the numba and numpy kernels on representative workloads.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from mzchain import kernels
from mzchain._backend import HAVE_NUMBA
from mzchain.engine import ProtocolParams

CASES = [
    ("slaz s=0 M=250 N=35000", ProtocolParams.slaz(250, 35000, 0)),
    ("slaz s=1 M=250 N=35000", ProtocolParams.slaz(250, 35000, 1)),
    ("slaz s=1 M=500 N=50000", ProtocolParams.slaz(500, 50000, 1)),
    ("modified s=1 M=850 N=8499 m_c=75", ProtocolParams.modified(850, 8499, 75, 1)),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def bench_evolve(params, backend, repeat):
    def go():
        return kernels.evolve(params.theta_m, params.theta_n, params.n_rotations,
                              params.n_chains, params.N, params.s, backend=backend)
    go()  # compile / warm up
    return best_of(go, repeat), go()


def bench_pair(backend, repeat):
    Ms = np.arange(2, 5001)

    def go():
        return kernels.modified_coherent_pair(200.0, 20, Ms, 2000, backend=backend)
    go()
    return best_of(go, repeat), go()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{'workload':38s}" + "".join(f"{b:>12s}" for b in backends) + "   max |diff|")
    for name, params in CASES:
        res = {b: bench_evolve(params, b, args.repeat) for b in backends}
        diff = 0.0
        if len(backends) == 2:
            a, b = res["numpy"][1], res["numba"][1]
            diff = max(abs(a.beta0 - b.beta0), abs(a.beta1 - b.beta1), abs(a.leaked - b.leaked))
        print(f"{name:38s}" + "".join(f"{res[b][0] * 1e3:10.2f}ms" for b in backends) + f"   {diff:.2e}")
    res = {b: bench_pair(b, args.repeat) for b in backends}
    diff = 0.0
    if len(backends) == 2:
        diff = float(np.max(np.abs(np.subtract(res["numpy"][1], res["numba"][1]))))
    print(f"{'closed-form pair, 4999 M values':38s}"
          + "".join(f"{res[b][0] * 1e3:10.2f}ms" for b in backends) + f"   {diff:.2e}")


if __name__ == "__main__":
    main()
