"""Command-line entry point: ``matchshift <subcommand> ...``."""
from __future__ import annotations

import argparse
import sys

from . import io
from .core import Objective, blocking_pairs
from .errors import MatchshiftError


def _k_range(text: str) -> range:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return range(int(lo), int(hi) + 1)
    return range(int(text), int(text) + 1)


def _emit(pair, matching, count, out):
    p2 = pair.profile_2
    out.write(io.format_matching(matching, p2))
    blockers = len(blocking_pairs(matching, p2))
    out.write(f"count={count} blockers={blockers}\n")
    answer = "yes" if count <= pair.budget_k and blockers <= pair.budget_b else "no"
    out.write(f"within_budget={answer}\n")


def cmd_solve(args, out):
    from .solvers import (
        solve_iasm_exact,
        solve_iasm_xp_b,
        solve_iasm_xp_k,
        solve_ihr,
        solve_ism,
        solve_ismt_agent_types,
    )
    pair = io.read_pair(args.input)
    pair = pair.with_budgets(k=args.k, b=args.b)
    objective = Objective(args.objective)
    problem, algo = args.problem, args.algo
    if objective == Objective.MAXIMIZE and problem != "ism":
        raise SystemExit("--objective max is only defined for --problem ism")
    if problem == "ism":
        if algo in ("auto", "exact"):
            m2, count = solve_ism(pair, objective)
        elif algo == "types":
            m2, count = solve_ismt_agent_types(pair)
        else:
            raise SystemExit(f"--algo {algo} does not apply to ism")
    elif problem == "ism-t":
        if algo not in ("auto", "types"):
            raise SystemExit(f"--algo {algo} does not apply to ism-t")
        m2, count = solve_ismt_agent_types(pair, node_limit=args.node_limit or 10 ** 6)
    elif problem == "ihr":
        m2, count = solve_ihr(pair)
    else:
        limit = args.node_limit
        if algo in ("auto", "exact"):
            m2, count, _ = solve_iasm_exact(pair, **({"node_limit": limit} if limit else {}))
        elif algo == "xp-b":
            m2, count = solve_iasm_xp_b(pair, **({"node_limit": limit} if limit else {}))
        elif algo == "xp-k":
            m2, count = solve_iasm_xp_k(pair, **({"node_limit": limit} if limit else {}))
        else:
            raise SystemExit(f"--algo {algo} does not apply to iasm")
    _emit(pair, m2, count, out)


def cmd_reduce(args, out):
    from .reductions import ChangeType, reduce_chain
    pair = io.read_pair(args.input)
    red = reduce_chain(pair, ChangeType(args.source), ChangeType(args.target))
    io.write_pair(red.pair, args.output)
    out.write(f"agents={red.pair.profile_1.n_agents} k_prime={red.k_prime} offset={red.offset}\n")


def cmd_verify(args, out):
    from .reductions import REDUCTIONS, ChangeType, classify_change, verify_reduction
    pair = io.read_pair(args.input)
    if args.reduction == "auto":
        kind = classify_change(pair.profile_1, pair.profile_2)
        if kind == ChangeType.MIXED:
            kind = ChangeType.REPLACE
    else:
        kind = ChangeType(args.reduction)
    red = REDUCTIONS[kind](pair)
    report = verify_reduction(pair, red, _k_range(args.k), max_agents=args.max_agents)
    out.write(f"reduction={kind.value}->{red.target.value} offset={red.offset} "
              f"min_original={report.original_min} min_reduced={report.reduced_min}\n")
    for row in report.rows:
        flag = "ok" if row.agrees else "MISMATCH"
        out.write(f"k={row.k} k_prime={row.k_prime} original={row.original} "
                  f"reduced={row.reduced} {flag}\n")
    out.write(f"mismatches={len(report.mismatches)}\n")
    return 0 if report.ok else 1


def cmd_oracle(args, out):
    from .oracle import oracle_iasm, oracle_ihrt, oracle_ism
    pair = io.read_pair(args.input)
    if args.b is not None:
        pair = pair.with_budgets(b=args.b)
    if args.problem == "ism":
        count = oracle_ism(pair, Objective(args.objective))
    elif args.problem == "iasm":
        count = oracle_iasm(pair)
    else:
        count = oracle_ihrt(pair)
    out.write(f"count={count}\n")


def cmd_sample(args, out):
    from .sampling import sample_identical_profile, sample_mallows_profile, sample_uniform_profile
    if args.model == "uniform":
        prof = sample_uniform_profile(args.n, args.n, args.seed)
    elif args.model == "identical":
        prof = sample_identical_profile(args.n, args.seed)
    else:
        if args.norm_phi is None:
            raise SystemExit("--norm-phi is required for the mallows model")
        prof = sample_mallows_profile(args.n, args.norm_phi, args.seed)
    io.write_profile(prof, args.output)


def cmd_perturb(args, out):
    from .changes import perturb
    profile = io.read_profile(args.input)
    pair, script = perturb(profile, args.kind, args.r, args.seed, budget_k=args.k)
    io.write_pair(pair, args.output)
    out.write(f"kind={script.kind.value} edits={len(script)}\n")


def cmd_experiment(args, out):
    from .experiments import load_config, run_experiment
    cfg = load_config(args.config)
    path = args.output or cfg.output
    if not path:
        raise SystemExit("no output path: set `output` in the config or pass --output")
    table = run_experiment(cfg, workers=args.workers, output=path)
    out.write(f"rows={len(table)} output={path}\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="matchshift", description="Incremental stable matching toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an incremental instance")
    s.add_argument("--problem", choices=["ism", "iasm", "ihr", "ism-t"], default="ism")
    s.add_argument("--algo", choices=["auto", "exact", "xp-b", "xp-k", "types"], default="auto")
    s.add_argument("--objective", choices=["min", "max"], default="min")
    s.add_argument("--input", required=True)
    s.add_argument("--node-limit", type=int)
    s.add_argument("--k", type=int, help="override the budget k from the file")
    s.add_argument("--b", type=int, help="override the budget b from the file")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("reduce", help="rewrite an instance into another change type")
    s.add_argument("--from", dest="source", choices=["swap", "replace", "delete", "add"], required=True)
    s.add_argument("--to", dest="target", choices=["swap", "replace", "delete", "add"], required=True)
    s.add_argument("--input", required=True)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("verify-reduction", help="check one reduction step against the oracle")
    s.add_argument("--input", required=True)
    s.add_argument("--k", default="0..6", help="budget sweep, e.g. 0..6")
    s.add_argument("--reduction", choices=["auto", "swap", "replace", "delete", "add"], default="auto",
                   help="source change type; auto classifies the instance")
    s.add_argument("--max-agents", type=int, default=40)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("oracle", help="brute-force reference answer")
    s.add_argument("--problem", choices=["ism", "iasm", "ihr-t"], default="ism")
    s.add_argument("--objective", choices=["min", "max"], default="min")
    s.add_argument("--input", required=True)
    s.add_argument("--b", type=int)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("sample", help="draw a random profile")
    s.add_argument("--model", choices=["uniform", "identical", "mallows"], default="uniform")
    s.add_argument("--norm-phi", type=float)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("perturb", help="perturb a profile into an incremental instance")
    s.add_argument("--kind", choices=["reorder", "reorder-inv", "delete", "swaps", "add"], required=True)
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--k", type=int, default=0)
    s.add_argument("--input", required=True)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_perturb)

    s = sub.add_parser("experiment", help="run a Monte-Carlo sweep from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--output")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = args.func(args, sys.stdout)
    except MatchshiftError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
