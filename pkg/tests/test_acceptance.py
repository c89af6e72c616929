"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[criterion N] PASS|FAIL ...`` line (visible in
``pytest -v`` output) before asserting.  The Monte-Carlo criteria run at full
scale; the whole file takes several minutes on one core.
"""
import random
import time

import numpy as np
import pytest

from conftest import random_add_pair, random_hr_pair, random_pair
from matchshift.changes import perturb
from matchshift.core import Objective
from matchshift.experiments import parse_config, pearson, rows_as_dicts, run_experiment, to_csv
from matchshift.oracle import enumerate_stable_matchings, oracle_iasm, oracle_ihrt, oracle_ism
from matchshift.reductions import (
    reduce_add_to_delete,
    reduce_delete_to_swap,
    reduce_replace_to_add,
    reduce_swap_to_replace,
    verify_reduction,
)
from matchshift.sampling import (
    mallows_from_norm_phi,
    sample_identical_profile,
    sample_mallows,
    sample_uniform_profile,
)
from matchshift.solvers import solve_iasm_exact, solve_iasm_xp_b, solve_ihr, solve_ism


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return emit


def _samples(rows, **where):
    return [d for d in rows if d["sample"].isdigit() and all(d[k] == v for k, v in where.items())]


def _mean_row(rows, **where):
    (d,) = [d for d in rows if d["sample"] == "mean" and all(d[k] == v for k, v in where.items())]
    return d


# ---------------------------------------------------------------------------

def test_criterion_1_oracle_equivalence(report):
    t0 = time.time()
    rng = random.Random(101)
    nprng = np.random.default_rng(101)
    bad = []
    kinds = ["reorder", "reorder-inv", "delete", "swaps", "add"]
    for t in range(500):
        n = rng.randint(1, 6)
        if t % 2:
            pair = random_pair(rng, n, rng.choice(["delete", "replace", "swap", "random"]))
        else:
            kind = kinds[t // 2 % 5]
            r = rng.uniform(0, 0.15 if kind == "add" else 0.5)
            pair, _ = perturb(sample_uniform_profile(n, n, nprng), kind, r, nprng)
        for obj in Objective:
            if solve_ism(pair, obj)[1] != oracle_ism(pair, obj):
                bad.append(("ism", t, obj))
    for t in range(200):
        pair = random_pair(rng, rng.randint(1, 5), "random", b=rng.randint(0, 3))
        ref = oracle_iasm(pair)
        if solve_iasm_exact(pair)[1] != ref or solve_iasm_xp_b(pair)[1] != ref:
            bad.append(("iasm", t))
    for t in range(200):
        pair = random_hr_pair(rng, rng.randint(1, 4), rng.randint(1, 2))
        if solve_ihr(pair)[1] != oracle_ihrt(pair):
            bad.append(("ihr", t))
    dt = time.time() - t0
    ok = report(1, not bad and dt < 300,
                f"oracle equivalence: 1000 ISM + 200 IASM + 200 HR checks, {len(bad)} mismatches, {dt:.0f}s")
    assert ok, bad[:5]


def test_criterion_2_reduction_equivalence(report):
    t0 = time.time()
    rng = random.Random(202)
    makers = {
        "swap->replace": (lambda: random_pair(rng, rng.randint(1, 3), "swap"), reduce_swap_to_replace),
        "delete->swap": (lambda: random_pair(rng, rng.randint(1, 3), "delete"), reduce_delete_to_swap),
        "add->delete": (lambda: random_add_pair(rng, rng.randint(1, 3)), reduce_add_to_delete),
        "replace->add": (lambda: random_pair(rng, rng.randint(1, 3), "replace"), reduce_replace_to_add),
    }
    mismatches = {}
    for name, (make, reduce) in makers.items():
        mismatches[name] = 0
        for _ in range(100):
            pair = make()
            mismatches[name] += len(verify_reduction(pair, reduce(pair), range(7)).mismatches)
    dt = time.time() - t0
    ok = report(2, not any(mismatches.values()) and dt < 600,
                f"reduction equivalence, 4 x 100 instances, k=0..6: {mismatches}, {dt:.0f}s")
    assert ok


@pytest.fixture(scope="module")
def fig2a():
    cfg = parse_config("""
        name = fig2a
        n = 50
        change_kind = delete, reorder, swaps
        r = 0:0.3:0.01
        samples = 200
        solvers = best, gale_shapley
        seed = 2
        per_sample = false
    """)
    t0 = time.time()
    rows = rows_as_dicts(run_experiment(cfg))
    return rows, time.time() - t0


def test_criterion_3_fig2a_values(report, fig2a):
    rows, dt = fig2a
    targets = {"delete": (0.38, 0.05), "reorder": (0.10, 0.03), "swaps": (0.28, 0.04)}
    got = {k: float(_mean_row(rows, change_kind=k, r="0.01", solver="best")["delta_norm"])
           for k in targets}
    ok = all(abs(got[k] - mu) <= tol for k, (mu, tol) in targets.items()) and dt < 1800
    detail = ", ".join(f"{k}={got[k]:.3f} (target {mu}±{tol})" for k, (mu, tol) in targets.items())
    assert report(3, ok, f"best-solver mean delta at r=0.01, n=50, 200 samples: {detail}; grid took {dt:.0f}s")


def test_criterion_4_gale_shapley_gap(report, fig2a):
    rows, _ = fig2a
    gaps = {}
    for d in rows:
        if d["sample"] == "mean" and d["solver"] == "best":
            gs = _mean_row(rows, change_kind=d["change_kind"], r=d["r"], solver="gale_shapley")
            gaps[(d["change_kind"], d["r"])] = float(gs["delta_norm"]) - float(d["delta_norm"])
    worst = max(gaps, key=gaps.get)
    ok = len(gaps) == 93 and gaps[worst] <= 0.05
    assert report(4, ok, f"max mean(GS - best) over {len(gaps)} grid points = {gaps[worst]:.4f} "
                          f"at {worst[0]} r={worst[1]} (limit 0.05)")


def test_criterion_5_correlation(report):
    cfg = parse_config("""
        name = corr
        n = 50
        change_kind = reorder, delete, swaps
        r_uniform = 0, 0.2
        samples = 2000
        solvers = best
        seed = 5
    """)
    t0 = time.time()
    rows = rows_as_dicts(run_experiment(cfg))
    dt = time.time() - t0
    targets = {"reorder": 0.80, "delete": 0.55, "swaps": 0.81}
    got = {}
    for kind in targets:
        ds = _samples(rows, change_kind=kind, solver="best")
        got[kind] = pearson([float(d["bp_frac"]) for d in ds], [float(d["delta_norm"]) for d in ds])
    ok = all(abs(got[k] - v) <= 0.07 for k, v in targets.items()) and dt < 2700
    detail = ", ".join(f"{k}={got[k]:.3f} (target {v}±0.07)" for k, v in targets.items())
    assert report(5, ok, f"Pearson(bp fraction, best delta), 2000 samples each: {detail}, {dt:.0f}s")


def test_criterion_6_almost_stable(report):
    betas = [0, 1 / 144, 2 / 144]  # b = 0, 1, 2 at n = 12
    cfg = parse_config(f"""
        name = almost
        n = 12
        change_kind = reorder, delete, swaps
        r = 0.1
        samples = 200
        solvers = almost
        beta = {', '.join(repr(b) for b in betas)}
        node_limit = 10000000
        seed = 6
        per_sample = false
    """)
    t0 = time.time()
    rows = rows_as_dicts(run_experiment(cfg))
    dt = time.time() - t0
    lines, ok = [], dt < 3600
    for kind in ("reorder", "delete", "swaps"):
        means = [_mean_row(rows, change_kind=kind, beta=format(b, ".12g")) for b in betas]
        ok &= all(m["status"] == "ok" for m in means)
        v = [float(m["delta_norm"]) for m in means]
        ok &= v[0] > v[1] > v[2] and (v[0] - v[1]) > (v[1] - v[2])
        lines.append(f"{kind} b=0,1,2 -> {v[0]:.3f},{v[1]:.3f},{v[2]:.3f}")
    assert report(6, ok, f"almost-stable, n=12, 200 samples, r=0.1: {'; '.join(lines)}; {dt:.0f}s")


def test_criterion_7_identical_preferences(report):
    unique = all(len(enumerate_stable_matchings(sample_identical_profile(n, s))) == 1
                 for n in range(1, 6) for s in range(40))
    cfg = parse_config("""
        name = identical
        sampler = identical
        n = 50
        change_kind = delete
        r = 0.01
        samples = 200
        solvers = best
        seed = 7
        per_sample = false
    """)
    mean = float(_mean_row(rows_as_dicts(run_experiment(cfg)), solver="best")["delta_norm"])
    ok = unique and abs(mean - 0.5) <= 0.08
    assert report(7, ok, f"identical preferences: unique stable matching for n<=5 = {unique}; "
                          f"one deletion at n=50 gives mean delta {mean:.3f} (target 0.5±0.08)")


def test_criterion_8_mallows_calibration(report):
    n, draws = 50, 10 ** 4
    upper = np.triu_indices(n, 1)
    rng = np.random.default_rng(8)
    lines, ok = [], True
    for nphi in (0.25, 0.5, 0.75):
        params = mallows_from_norm_phi(nphi, n)
        perms = np.array([sample_mallows(range(n), params, rng) for _ in range(draws)])
        # inversions against the identity: pairs i < j with perm[i] > perm[j]
        inv = (perms[:, upper[0]] > perms[:, upper[1]]).sum(axis=1)
        target = nphi / 2 * n * (n - 1) / 2
        rel = abs(inv.mean() - target) / target
        ok &= rel <= 0.02
        lines.append(f"norm-phi {nphi}: {inv.mean():.1f} vs {target:.2f} ({100 * rel:.2f}%)")
    assert report(8, ok, "Mallows mean swap distance, 10^4 draws: " + "; ".join(lines))


def test_criterion_9_determinism(report, tmp_path):
    configs = [
        "name = a\nn = 8\nchange_kind = reorder, reorder-inv, delete, swaps, add\nr = 0, 0.1, 0.2\n"
        "samples = 6\nsolvers = best, worst, gale_shapley, almost, almost_rel\nbeta = 0, 0.02\n"
        "i = 0.5\nseed = 9\n",
        "name = b\nsampler = mallows\nnorm_phi = 0.2, 0.6\nn = 10\nchange_kind = swaps\n"
        "r_uniform = 0, 0.2\nsamples = 8\nsolvers = best, worst\nseed = 10\n",
        "name = c\nsampler = identical\nn = 12\nchange_kind = delete, add\nr = 0.1\nsamples = 8\n"
        "solvers = best, gale_shapley\nseed = 11\n",
    ]
    same = []
    for j, text in enumerate(configs):
        cfg = parse_config(text)
        outs = []
        for workers in (1, 2, 3):
            path = tmp_path / f"{j}_{workers}.csv"
            run_experiment(cfg, workers=workers, output=path)
            outs.append(path.read_bytes())
        same.append(len(set(outs)) == 1 and to_csv(run_experiment(cfg)).encode() == outs[0])
    assert report(9, all(same), f"byte-identical CSV across worker counts 1/2/3 and reruns: {same}")
