import json

import numpy as np
import pytest

from matchshift.errors import DegenerateInput, EmptyInput
from matchshift.experiments import (
    COLUMNS,
    SEED_ENV,
    load_config,
    parse_config,
    pearson,
    quantile,
    rows_as_dicts,
    run_experiment,
    to_csv,
)


def test_pearson_examples():
    xs = [0.1, 0.4, 0.2, 0.9]
    assert pearson(xs, [2 * x + 1 for x in xs]) == pytest.approx(1.0)
    assert pearson(xs, [-x for x in xs]) == pytest.approx(-1.0)
    assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)
    with pytest.raises(DegenerateInput):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(DegenerateInput):
        pearson([1], [1])


def test_quantile_examples():
    xs = [3, 1, 4, 1, 5]
    assert quantile(xs, 0) == 1 and quantile(xs, 1) == 5
    assert quantile([1, 2, 3, 4, 5], 0.5) == 3
    assert quantile([0, 10], 0.9) == pytest.approx(9)
    with pytest.raises(EmptyInput):
        quantile([], 0.5)


def test_config_parsing():
    cfg = parse_config("""
        name = t   # comment
        n = 6, 8
        change_kind = delete, swaps
        r = 0:0.03:0.01
        samples = 3
        solvers = best, worst
    """)
    assert cfg.n == (6, 8) and cfg.r == (0.0, 0.01, 0.02, 0.03)
    assert len(cfg.grid()) == 2 * 2 * 4
    assert parse_config("name = t\nseed = 5", seed_override="9").seed == 9
    for bad in ("nope = 1", "samples = 0", "r = 1.5", "solvers = magic", "change_kind = melt"):
        with pytest.raises(ValueError):
            parse_config(bad)


def test_seed_env_override(tmp_path, monkeypatch):
    path = tmp_path / "c.cfg"
    path.write_text("name = t\nseed = 1\n")
    monkeypatch.setenv(SEED_ENV, "42")
    assert load_config(path).seed == 42
    monkeypatch.delenv(SEED_ENV)
    assert load_config(path).seed == 1


def _small(**extra):
    text = "name = small\nn = 6\nsamples = 6\nseed = 3\nsolvers = best, worst, gale_shapley\n"
    for k, v in extra.items():
        text += f"{k} = {v}\n"
    return parse_config(text)


def test_r_zero_rows_are_zero():
    cfg = _small(change_kind="delete, reorder, swaps, add", r="0")
    rows = rows_as_dicts(run_experiment(cfg))
    for d in rows:
        assert float(d["bp_frac"]) == 0
        if d["solver"] != "worst":
            assert float(d["delta_norm"]) == 0
    # the worst stable matching can still differ from M1 when P2 = P1
    assert any(float(d["delta_norm"]) > 0 for d in rows if d["solver"] == "worst")


def test_best_gs_worst_ordering():
    cfg = _small(change_kind="reorder, delete, swaps, add", r="0.2, 0.5", samples="15")
    by_sample = {}
    for d in rows_as_dicts(run_experiment(cfg)):
        if d["sample"].isdigit():
            by_sample.setdefault((d["change_kind"], d["r"], d["sample"]), {})[d["solver"]] = float(d["delta_count"])
    assert len(by_sample) == 4 * 2 * 15
    for v in by_sample.values():
        assert v["best"] <= v["gale_shapley"] <= v["worst"]


def test_bp_zero_iff_m1_stable():
    from matchshift.changes import perturb
    from matchshift.core import is_stable
    from matchshift.experiments import evaluate_sample
    cfg = _small(change_kind="swaps", r="0.1", samples="20", solvers="best")
    for s in range(20):
        (row,) = evaluate_sample(cfg, 0, s)
        rng = np.random.default_rng(row["seed"])
        from matchshift.sampling import sample_uniform_profile
        pair, _ = perturb(sample_uniform_profile(6, 6, rng), "swaps", 0.1, rng)
        assert (row["bp_count"] == 0) == is_stable(pair.matching_1, pair.profile_2)


def test_almost_non_increasing_in_beta():
    cfg = _small(change_kind="reorder", r="0.3", samples="8", solvers="almost, almost_rel",
                 beta="0, 0.03, 0.06, 0.12", i="0, 0.5, 1")
    table = rows_as_dicts(run_experiment(cfg))
    for solver, key in (("almost", "beta"), ("almost_rel", "i")):
        per = {}
        for d in table:
            if d["solver"] == solver and d["sample"].isdigit():
                assert d["status"] == "ok"
                per.setdefault(d["sample"], []).append((float(d[key]), int(d["delta_count"])))
        for vals in per.values():
            counts = [c for _, c in sorted(vals)]
            assert counts == sorted(counts, reverse=True)
    # i = 1 allows every current blocker, so M1 restricted to P2 is feasible
    for d in table:
        if d["solver"] == "almost_rel" and d["i"] == "1" and d["sample"].isdigit():
            assert int(d["delta_count"]) == 0


def test_budget_exceeded_recorded():
    cfg = _small(change_kind="reorder", r="0.5", samples="10", solvers="almost", beta="0.03",
                 node_limit="1")
    table = rows_as_dicts(run_experiment(cfg))
    statuses = {d["status"] for d in table}
    assert "budget_exceeded" in statuses
    agg = [d for d in table if d["sample"] == "mean"]
    assert agg[0]["status"].startswith("missing=")


def test_aggregates_and_columns():
    cfg = _small(change_kind="delete", r="0.1", samples="5")
    table = run_experiment(cfg)
    assert all(len(r) == len(COLUMNS) for r in table)
    rows = rows_as_dicts(table)
    best = [float(d["delta_norm"]) for d in rows if d["solver"] == "best" and d["sample"].isdigit()]
    mean = [d for d in rows if d["solver"] == "best" and d["sample"] == "mean"][0]
    q90 = [d for d in rows if d["solver"] == "best" and d["sample"] == "q90"][0]
    assert float(mean["delta_norm"]) == pytest.approx(np.mean(best))
    assert float(q90["delta_norm"]) == pytest.approx(quantile(best, 0.9))
    assert to_csv(table).splitlines()[0] == ",".join(COLUMNS)


def test_deterministic_across_workers(tmp_path):
    cfg = _small(change_kind="delete, swaps", r="0.1, 0.2", samples="5")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_experiment(cfg, workers=1, output=a)
    run_experiment(cfg, workers=3, output=b)
    assert a.read_bytes() == b.read_bytes()
    meta = json.loads((tmp_path / "a.csv.meta").read_text())
    assert meta["config_sha256"] == cfg.digest and meta["root_seed"] == 3


def test_uniform_r_draw():
    cfg = _small(change_kind="delete", r_uniform="0, 0.2", samples="10", solvers="best")
    rows = rows_as_dicts(run_experiment(cfg))
    rs = [float(d["r"]) for d in rows if d["sample"].isdigit()]
    assert all(0 <= r <= 0.2 for r in rs) and len(set(rs)) == 10
    assert [d["r"] for d in rows if d["sample"] == "mean"] == ["U(0,0.2)"]


def test_mallows_and_identical_samplers():
    for extra in ({"sampler": "mallows", "norm_phi": "0.2, 0.8"}, {"sampler": "identical"}):
        cfg = _small(change_kind="swaps", r="0.1", samples="3", **extra)
        rows = rows_as_dicts(run_experiment(cfg))
        assert rows and all(d["status"] == "ok" for d in rows)
