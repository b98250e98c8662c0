"""Benchmark the compiled kernels against the pure-numpy fallback.

The implementation is chosen at import time from the SPARSEVEC_NO_NUMBA
environment variable, so the comparison runs each path in its own
subprocess and prints a side-by-side table.

Usage: python benchmarks/bench_kernels.py [--size 2_000_000] [--repeats 20]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def run_suite(size, repeats):
    import numpy as np

    from sparsevec import kernels
    from sparsevec.losses import Objective, huber, l1, logcosh, pseudo_huber

    rng = np.random.default_rng(0)
    z = rng.standard_normal(size)
    mu = 1e-2
    cases = {
        "l1_value": lambda: kernels.l1_value(z),
        "l1_sign": lambda: kernels.sign(z),
        "huber_value": lambda: kernels.huber_value(z, mu),
        "huber_grad": lambda: kernels.huber_grad(z, mu),
        "pseudo_huber_grad": lambda: kernels.pseudo_huber_grad(z, mu),
        "logcosh_value": lambda: kernels.logcosh_value(z, mu),
        "logcosh_grad": lambda: kernels.logcosh_grad(z, mu),
        "logcosh_hess": lambda: kernels.logcosh_hess(z, mu),
        "soft_threshold": lambda: kernels.soft_threshold(z, 0.1),
    }
    n, p = 64, size // 64
    Y = rng.standard_normal((n, p))
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    obj = Objective(Y, logcosh(mu))
    cases["objective_eval"] = lambda: obj.eval(q)

    out = {}
    for name, fn in cases.items():
        fn()  # warm-up (JIT compilation, caches)
        t0 = time.perf_counter()
        for _ in range(repeats):
            fn()
        out[name] = (time.perf_counter() - t0) / repeats
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=2_000_000)
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--inner", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.inner:
        print(json.dumps(run_suite(args.size, args.repeats)))
        return

    results = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, SPARSEVEC_NO_NUMBA=flag)
        cmd = [sys.executable, os.path.abspath(__file__), "--inner",
               "--size", str(args.size), "--repeats", str(args.repeats)]
        proc = subprocess.run(cmd, capture_output=True, text=True, env=env,
                              cwd=os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            sys.exit(proc.returncode)
        results[label] = json.loads(proc.stdout.strip().splitlines()[-1])

    width = max(map(len, results["numba"]))
    print(f"array size {args.size:,}, mean of {args.repeats} runs")
    print(f"{'kernel':<{width}}  {'numba (ms)':>12}  {'numpy (ms)':>12}  {'speedup':>8}")
    for name in results["numba"]:
        a, b = results["numba"][name], results["numpy"][name]
        print(f"{name:<{width}}  {a * 1e3:>12.3f}  {b * 1e3:>12.3f}  {b / a:>7.2f}x")


if __name__ == "__main__":
    main()
