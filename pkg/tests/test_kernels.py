"""The numba kernels and the numpy/Python fallback must agree exactly."""
import json
import os
import subprocess
import sys


WORKER = r"""
import json
from matchshift import _kernels as K
from matchshift.changes import perturb
from matchshift.core import Objective
from matchshift.sampling import sample_uniform_profile
from matchshift.solvers import gale_shapley, solve_ism, solve_iasm_exact
from matchshift.solvers.stable import build_rotation_poset

out = {"backend": K.ACTIVE_BACKEND, "rows": []}
for seed in range(40):
    n = 3 + seed % 6
    kind = ["reorder", "delete", "swaps", "add"][seed % 4]
    pair, _ = perturb(sample_uniform_profile(n, n, seed), kind, 0.3, seed + 1000,
                      budget_b=seed % 3)
    p2 = pair.profile_2
    row = {
        "gs": sorted(gale_shapley(p2).pairs),
        "rotations": len(build_rotation_poset(p2).rotations),
        "min": solve_ism(pair, Objective.MINIMIZE)[1],
        "max": solve_ism(pair, Objective.MAXIMIZE)[1],
        "almost": solve_iasm_exact(pair)[1],
    }
    out["rows"].append(row)
print(json.dumps(out))
"""


def _run(backend):
    env = dict(os.environ, MATCHSHIFT_BACKEND=backend)
    res = subprocess.run([sys.executable, "-c", WORKER], env=env, capture_output=True,
                         text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def test_backends_agree():
    fast, slow = _run("numba"), _run("numpy")
    assert slow["backend"] == "numpy"
    assert fast["rows"] == slow["rows"]


def test_blocking_mask_paths_agree():
    import numpy as np
    from matchshift import _kernels as K
    from matchshift.sampling import sample_uniform_profile
    for seed in range(20):
        a = sample_uniform_profile(7, 7, seed).arrays
        rng = np.random.default_rng(seed)
        lp = rng.permutation(7).astype(np.int64)
        lp[rng.random(7) < 0.3] = -1
        rp = np.full(7, -1, dtype=np.int64)
        for m, w in enumerate(lp):
            if w >= 0:
                rp[w] = m
        assert np.array_equal(K._blocking_mask_numpy(lp, rp, a.lrank, a.rrank),
                              K._blocking_mask_loops(lp, rp, a.lrank, a.rrank))
