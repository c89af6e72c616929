"""Seeded Monte-Carlo sweeps over perturbed random instances, written as CSV.

A config is a small ``key = value`` file::

    name = deletions
    sampler = uniform            # uniform | identical | mallows
    n = 50                       # agents per side, comma list allowed
    norm_phi = 0.5               # mallows only
    change_kind = delete, swaps  # reorder | reorder-inv | delete | swaps | add
    r = 0, 0.01, 0.02            # or  r = 0:0.3:0.01  (inclusive range)
    r_uniform = 0, 0.2           # instead of r: draw r per sample
    samples = 200
    solvers = best, worst, gale_shapley, almost, almost_rel
    beta = 0, 0.01               # almost: b = round(beta * n^2)
    i = 0.5, 1                   # almost_rel: b = round(i * |bp(M1, P2)|)
    seed = 1
    node_limit = 10000000
    per_sample = true
    output = out.csv

Every sample is a pure function of (config, grid point, sample index), so the
CSV does not depend on the number of workers.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import multiprocessing
import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from . import __version__
from .changes import ChangeKind, perturb, round_half_up
from .core import Objective
from .errors import BudgetExceeded, DegenerateInput, EmptyInput
from .sampling import (
    derive_seed,
    sample_identical_profile,
    sample_mallows_profile,
    sample_uniform_profile,
)
from .solvers.almost import count_blockers, solve_iasm_exact
from .solvers.incremental import solve_ism
from .solvers.stable import build_rotation_poset, gale_shapley

COLUMNS = ("experiment", "change_kind", "n", "norm_phi", "r", "beta", "i", "sample", "solver",
           "delta_count", "delta_norm", "bp_count", "bp_frac", "status", "seed")
SOLVERS = ("best", "worst", "gale_shapley", "almost", "almost_rel")
SEED_ENV = "MATCHSHIFT_SEED"


# ---------------------------------------------------------------------------
# statistics

def pearson(xs, ys) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise DegenerateInput("need two equally long samples of length >= 2")
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = np.sqrt(dx @ dx), np.sqrt(dy @ dy)
    if sx == 0 or sy == 0:
        raise DegenerateInput("a sample has zero variance")
    return float(np.clip(dx @ dy / (sx * sy), -1.0, 1.0))


def quantile(xs, q: float) -> float:
    """Linear interpolation between order statistics (Hyndman-Fan type 7)."""
    if len(xs) == 0:
        raise EmptyInput("quantile of an empty sample")
    if not 0 <= q <= 1:
        raise ValueError(f"q={q} outside [0, 1]")
    return float(np.quantile(np.asarray(xs, dtype=float), q, method="linear"))


# ---------------------------------------------------------------------------
# config

def _floats(v):
    out = []
    for part in v.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            lo, hi, step = (Fraction(x) for x in part.split(":"))
            k = 0
            while lo + k * step <= hi:
                out.append(float(lo + k * step))
                k += 1
        else:
            out.append(float(part))
    return out


def _words(v):
    return [w.strip() for w in v.split(",") if w.strip()]


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    sampler: str = "uniform"
    n: tuple = (50,)
    norm_phi: tuple = (1.0,)
    change_kind: tuple = ("delete",)
    r: tuple = (0.0,)
    r_uniform: tuple | None = None
    samples: int = 1
    solvers: tuple = ("best",)
    beta: tuple = ()
    i: tuple = ()
    seed: int = 0
    node_limit: int = 10 ** 7
    per_sample: bool = True
    output: str | None = None
    source_text: str = field(default="", compare=False, repr=False)

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.sampler not in ("uniform", "identical", "mallows"):
            raise ValueError(f"unknown sampler {self.sampler!r}")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ValueError(f"unknown solver {s!r}")
        for kind in self.change_kind:
            ChangeKind(kind)
        rs = list(self.r) + list(self.r_uniform or ())
        if any(not 0 <= x <= 1 for x in rs + list(self.beta) + list(self.norm_phi)):
            raise ValueError("r, r_uniform, beta and norm_phi must lie in [0, 1]")
        if self.r_uniform is not None and len(self.r_uniform) != 2:
            raise ValueError("r_uniform takes two bounds")

    def grid(self):
        rs = [None] if self.r_uniform is not None else list(self.r)
        phis = list(self.norm_phi) if self.sampler == "mallows" else [None]
        return list(product(self.change_kind, self.n, phis, rs))

    @property
    def digest(self) -> str:
        return hashlib.sha256(repr(self._key()).encode()).hexdigest()

    def _key(self):
        return tuple(getattr(self, k) for k in (
            "name", "sampler", "n", "norm_phi", "change_kind", "r", "r_uniform", "samples",
            "solvers", "beta", "i", "seed", "node_limit", "per_sample"))


def parse_config(text: str, seed_override: str | None = None) -> ExperimentConfig:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        k, v = (x.strip() for x in line.split("=", 1))
        raw[k] = v
    kw = {"name": raw.pop("name", "experiment"), "source_text": text}
    conv = {
        "sampler": str, "n": lambda v: tuple(int(x) for x in _words(v)),
        "norm_phi": lambda v: tuple(_floats(v)), "change_kind": lambda v: tuple(_words(v)),
        "r": lambda v: tuple(_floats(v)), "r_uniform": lambda v: tuple(_floats(v)),
        "samples": int, "solvers": lambda v: tuple(_words(v)), "beta": lambda v: tuple(_floats(v)),
        "i": lambda v: tuple(_floats(v)), "seed": int, "node_limit": int,
        "per_sample": lambda v: v.lower() in ("1", "true", "yes", "on"), "output": str,
    }
    for k, v in raw.items():
        if k not in conv:
            raise ValueError(f"unknown config key {k!r}")
        kw[k] = conv[k](v)
    if seed_override is not None:
        kw["seed"] = int(seed_override)
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read(), os.environ.get(SEED_ENV))


# ---------------------------------------------------------------------------
# one sample

def _draw_profile(cfg: ExperimentConfig, n: int, norm_phi, rng):
    if cfg.sampler == "uniform":
        return sample_uniform_profile(n, n, rng)
    if cfg.sampler == "identical":
        return sample_identical_profile(n, rng)
    return sample_mallows_profile(n, norm_phi, rng)


def evaluate_sample(cfg: ExperimentConfig, point_index: int, sample_index: int) -> list:
    """Measurements of one sample: a list of dicts keyed by CSV column."""
    kind, n, norm_phi, r = cfg.grid()[point_index]
    seed = derive_seed(cfg.seed, point_index, sample_index)
    rng = np.random.default_rng(seed)
    if r is None:
        lo, hi = cfg.r_uniform
        r = float(lo + (hi - lo) * rng.random())
    p1 = _draw_profile(cfg, n, norm_phi, rng)
    pair, _ = perturb(p1, kind, r, rng)
    p2 = pair.profile_2
    m1 = pair.matching_1
    kept = pair.matching_1_in_profile_2()
    bp = count_blockers(p2, kept.left_partners(p2.n_left))
    n_acc = int(p2.arrays.llen.sum())
    bp_frac = bp / n_acc if n_acc else 0.0

    poset = build_rotation_poset(p2)
    size2 = len(poset.men_optimal)
    denom = len(m1) + size2
    base = {"experiment": cfg.name, "change_kind": kind, "n": n, "norm_phi": norm_phi, "r": r,
            "beta": None, "i": None, "sample": sample_index, "bp_count": bp, "bp_frac": bp_frac,
            "seed": seed}

    def row(solver, count, status="ok", **extra):
        d = dict(base, solver=solver, delta_count=count, status=status, **extra)
        d["delta_norm"] = None if count is None or denom == 0 else count / denom
        return d

    rows = []
    for solver in cfg.solvers:
        if solver == "best":
            rows.append(row(solver, solve_ism(pair, Objective.MINIMIZE, poset)[1]))
        elif solver == "worst":
            rows.append(row(solver, solve_ism(pair, Objective.MAXIMIZE, poset)[1]))
        elif solver == "gale_shapley":
            rows.append(row(solver, len(m1.pairs ^ gale_shapley(p2).pairs)))
        else:
            params = cfg.beta if solver == "almost" else cfg.i
            for x in params:
                b = round_half_up(x, n * n) if solver == "almost" else round_half_up(x, bp)
                key = "beta" if solver == "almost" else "i"
                try:
                    _, count, _ = solve_iasm_exact(pair.with_budgets(b=b), cfg.node_limit)
                    rows.append(row(solver, count, **{key: x}))
                except BudgetExceeded:
                    rows.append(row(solver, None, "budget_exceeded", **{key: x}))
    return rows


# ---------------------------------------------------------------------------
# the sweep

def _task(args):
    cfg, p, s = args
    return evaluate_sample(cfg, p, s)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _aggregate(cfg, point, rows):
    """Mean and 90th-percentile rows per (solver, beta, i) at one grid point."""
    kind, n, norm_phi, r = point
    groups = {}
    for d in rows:
        groups.setdefault((d["solver"], d["beta"], d["i"]), []).append(d)
    out = []
    r_label = r if r is not None else f"U({cfg.r_uniform[0]:g},{cfg.r_uniform[1]:g})"
    for (solver, beta, i), ds in groups.items():
        ok = [d for d in ds if d["status"] == "ok"]
        missing = len(ds) - len(ok)
        status = "ok" if not missing else f"missing={missing}"
        for label, fn in (("mean", lambda xs: float(np.mean(xs))), ("q90", lambda xs: quantile(xs, 0.9))):
            agg = {}
            for col in ("delta_count", "delta_norm", "bp_count", "bp_frac"):
                vals = [d[col] for d in ok if d[col] is not None]
                agg[col] = fn(vals) if vals else None
            out.append({"experiment": cfg.name, "change_kind": kind, "n": n, "norm_phi": norm_phi,
                        "r": r_label, "beta": beta, "i": i, "sample": label, "solver": solver,
                        "status": status, "seed": cfg.seed, **agg})
    return out


def run_experiment(cfg: ExperimentConfig, workers: int = 1, output=None) -> list:
    """Run every grid point and sample; returns the CSV rows (lists of strings).

    Per-sample rows come first within a grid point (when ``per_sample``),
    followed by the mean and q90 rows.  When ``output`` (or the config's
    output) is set, writes the CSV and a ``.meta`` sidecar next to it.
    """
    grid = cfg.grid()
    tasks = [(cfg, p, s) for p in range(len(grid)) for s in range(cfg.samples)]
    if workers > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers) as pool:
            results = pool.map(_task, tasks, chunksize=max(1, len(tasks) // (8 * workers)))
    else:
        results = [_task(t) for t in tasks]
    rows = []
    for p, point in enumerate(grid):
        chunk = results[p * cfg.samples:(p + 1) * cfg.samples]
        flat = [d for sample_rows in chunk for d in sample_rows]
        if cfg.per_sample:
            rows.extend(flat)
        rows.extend(_aggregate(cfg, point, flat))
    table = [[_fmt(d[c]) for c in COLUMNS] for d in rows]
    path = output or cfg.output
    if path:
        write_csv(table, path)
        meta = {"config_sha256": cfg.digest, "version": __version__, "root_seed": cfg.seed,
                "rows": len(table)}
        with open(str(path) + ".meta", "w") as fh:
            json.dump(meta, fh, indent=1, sort_keys=True)
            fh.write("\n")
    return table


def to_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    w.writerows(table)
    return buf.getvalue()


def write_csv(table, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(to_csv(table))


def rows_as_dicts(table) -> list:
    return [dict(zip(COLUMNS, r)) for r in table]
