"""Compare the compiled and pure-Python step kernels.

Run ``python benchmarks/bench_kernels.py [--seeds M] [--steps N]``. Both
backends iterate the same seeds on Table B; the script reports wall time per
bounce and the largest disagreement between the two.
"""
import argparse
import time

import numpy as np

from billiards._backend import get_kernels
from billiards.birkhoff import random_seeds
from billiards.boundary import builtin_table
from billiards.realmap import orbit_batch


def run(name, spec, seeds, steps):
    k = get_kernels(name)
    t0 = time.perf_counter()
    out = orbit_batch(spec, seeds[:, 0], seeds[:, 1], steps, kernels=k)
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--steps", type=int, default=200)
    args = ap.parse_args()
    spec = builtin_table("B")
    seeds = random_seeds(args.seeds, seed=0)
    bounces = args.seeds * args.steps
    t_c, out_c = run("cython", spec, seeds, args.steps)
    t_p, out_p = run("python", spec, seeds, args.steps)
    ok = (out_c[0] == 0) & (out_p[0] == 0)
    diff = np.max(np.abs(out_c[2][ok] - out_p[2][ok])) if ok.any() else float("nan")
    print(f"bounces          {bounces}")
    print(f"cython  {t_c:9.4f} s  {1e6 * t_c / bounces:9.2f} us/bounce")
    print(f"python  {t_p:9.4f} s  {1e6 * t_p / bounces:9.2f} us/bounce")
    print(f"speedup {t_p / t_c:9.1f}x")
    print(f"max |dtheta_cython - dtheta_python| = {diff:.2e}")


if __name__ == "__main__":
    main()
