"""Time the compiled kernels against the pure numpy/Python fallback.

Each backend runs in its own interpreter because the backend is chosen at
import time.  Usage::

    python3 benchmarks/bench_kernels.py [--n 100] [--repeat 5]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from matchshift import _kernels as K
from matchshift.sampling import sample_uniform_profile
from matchshift.changes import perturb
from matchshift.solvers.almost import solve_iasm_exact

n, repeat = int(sys.argv[1]), int(sys.argv[2])
prof = sample_uniform_profile(n, n, 7)
a = prof.arrays
w = np.random.default_rng(1).integers(-3, 4, size=(n, n)).astype(np.int64)
small, _ = perturb(sample_uniform_profile(8, 8, 3), "reorder", 0.25, 5, budget_b=2)

def gs():
    K.gale_shapley(a.lpref, a.llen, a.rrank)

def mws():
    K.max_weight_stable(a.lpref, a.llen, a.lrank, a.rpref, a.rlen, a.rrank, w)

def mask():
    lp, rp = K.gale_shapley(a.lpref, a.llen, a.rrank)
    K.blocking_mask(lp, rp, a.lrank, a.rrank)

def bnb():
    solve_iasm_exact(small)

out = {"backend": K.ACTIVE_BACKEND}
for name, fn in [("gale_shapley", gs), ("max_weight_stable", mws), ("blocking_mask", mask),
                 ("iasm_branch_and_bound", bnb)]:
    fn()  # warm-up, includes compilation for numba
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    out[name] = best
print(json.dumps(out))
"""


def run_backend(backend: str, n: int, repeat: int) -> dict:
    env = dict(os.environ, MATCHSHIFT_BACKEND=backend)
    res = subprocess.run([sys.executable, "-c", WORKER, str(n), str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100, help="agents per side")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    fast = run_backend("numba", args.n, args.repeat)
    slow = run_backend("numpy", args.n, args.repeat)
    print(f"{'kernel':<24}{'numba [ms]':>12}{'fallback [ms]':>15}{'speedup':>10}")
    for key in fast:
        if key == "backend":
            continue
        f, s = fast[key] * 1e3, slow[key] * 1e3
        print(f"{key:<24}{f:>12.3f}{s:>15.3f}{s / f:>9.1f}x")
    print(f"(backends reported: {fast['backend']}, {slow['backend']})")


if __name__ == "__main__":
    main()
