"""Compare the numba kernels with the pure-numpy fallback.

Each backend runs in its own interpreter (the switch is read at import
time). Every workload is run once to warm up (JIT compilation or cache
load) and then timed over ``--repeat`` runs; the best time is reported.

    python benchmarks/bench_backends.py [--repeat 3] [--json out.json]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from singular_eig import _jit
from singular_eig.core import PotentialSpec, RadialOperator, dimension_like
from singular_eig.fd_eig import fd_principal_eigenvalue, make_grid
from singular_eig.kernels import solve_tridiagonal
from singular_eig.ode_shoot import shoot_eigenvalue
from singular_eig.rayleigh import variational_eigenvalue

repeat = int(sys.argv[1])
p = dimension_like(1, 2, 5)
op = RadialOperator.parse("pucci-", p)
pot = PotentialSpec(1.5, 1e-6)
grid = make_grid(0, 8192, pot)
rng = np.random.default_rng(0)
n = 200000
lo, up = -rng.uniform(0, 1, n), -rng.uniform(0, 1, n)
dg = 2.5 - lo - up
rhs = rng.uniform(-1, 1, n)

work = {
    "shoot M- gamma=1.999": lambda: shoot_eigenvalue(p, 1.999, "pucci-").eigenvalue,
    "shoot M- gamma=1.5": lambda: shoot_eigenvalue(p, 1.5, "pucci-").eigenvalue,
    "variational 4096 gamma=1.5": lambda: variational_eigenvalue(p, 1.5).lambda_var,
    "fd eigen 8192 gamma=1.5": lambda: fd_principal_eigenvalue(op, pot, grid).eigenvalue,
    "tridiagonal n=200000": lambda: float(solve_tridiagonal(lo, dg, up, rhs)[0][0]),
}
out = {"backend": _jit.BACKEND, "results": {}}
for name, fn in work.items():
    t0 = time.perf_counter()
    value = fn()
    first = time.perf_counter() - t0
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out["results"][name] = {"value": value, "first": first, "best": best}
print(json.dumps(out))
"""


def run(disable_jit: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("SINGULAR_EIG_DISABLE_JIT", None)
    if disable_jit:
        env["SINGULAR_EIG_DISABLE_JIT"] = "1"
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="also write raw timings to this file")
    args = ap.parse_args(argv)
    t0 = time.perf_counter()
    jit = run(False, args.repeat)
    ref = run(True, args.repeat)
    names = list(jit["results"])
    w = max(map(len, names))
    print(f"{'workload':<{w}}  {'numba [s]':>10}  {'numpy [s]':>10}  {'speedup':>8}  "
          f"{'first call numba':>16}  {'max rel diff':>12}")
    for name in names:
        a, b = jit["results"][name], ref["results"][name]
        diff = abs(a["value"] - b["value"]) / max(abs(b["value"]), 1e-300)
        print(f"{name:<{w}}  {a['best']:>10.4f}  {b['best']:>10.4f}  "
              f"{b['best'] / a['best']:>8.1f}  {a['first']:>16.3f}  {diff:>12.2e}")
    print(f"backends: {jit['backend']} vs {ref['backend']}; "
          f"total {time.perf_counter() - t0:.1f} s")
    if args.json:
        with open(args.json, "w", encoding="ascii") as fh:
            json.dump({"numba": jit, "numpy": ref}, fh, indent=2)
            fh.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
