"""Incremental stable marriage with ties, solved over agent types.

Two agents on the same side share a type when they have the same preference
list and every agent of the other side is indifferent between them.  With
few types one can enumerate every bipartite "type graph", keep those whose
edges cannot create a blocking pair, and solve a maximum-weight perfect
matching on the agent graph each one induces.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..core import UNACCEPTABLE, InstancePair, Matching, PreferenceProfile, Side
from ..errors import BudgetExceeded, TooManyTypes

_FORBIDDEN = -10 ** 6


def agent_types(profile: PreferenceProfile, side: Side) -> list:
    """Partition one side into types, in order of first appearance."""
    own = profile.lists(side)
    others = profile.rank_maps(side.other)
    signature = {}
    types = []
    for a, pl in enumerate(own):
        key = (pl, tuple(rm.get(a, UNACCEPTABLE) for rm in others))
        if key not in signature:
            signature[key] = len(types)
            types.append([])
        types[signature[key]].append(a)
    return types


def solve_ismt_agent_types(pair: InstancePair, max_types: int = 5, node_limit: int = 10 ** 6):
    """Best weakly stable matching of P₂ (ties allowed) via type graphs.

    Returns ``(matching, count)``.  Among several optimal type graphs the
    first in enumeration order wins.
    """
    p2 = pair.profile_2
    if p2.mode != "sm":
        raise ValueError("agent types are defined for one-to-one profiles")
    men_t = agent_types(p2, Side.LEFT)
    women_t = agent_types(p2, Side.RIGHT)
    if len(men_t) > max_types or len(women_t) > max_types:
        raise TooManyTypes(f"{len(men_t)} x {len(women_t)} types exceed the limit {max_types}")
    n_m, n_w = p2.n_left, p2.n_right
    tu, tw = len(men_t), len(women_t)
    dummy_u, dummy_w = tu, tw
    # type-level ranks; the dummy type of the other side sits below every acceptable type
    last = UNACCEPTABLE - 1
    rank_u = np.full((tu + 1, tw + 1), UNACCEPTABLE, dtype=np.int64)
    rank_w = np.full((tw + 1, tu + 1), UNACCEPTABLE, dtype=np.int64)
    for i, grp in enumerate(men_t):
        rm = p2.left_rank_maps[grp[0]]
        for j, wgrp in enumerate(women_t):
            rank_u[i, j] = rm.get(wgrp[0], UNACCEPTABLE)
        rank_u[i, dummy_w] = last
    for j, grp in enumerate(women_t):
        rm = p2.right_rank_maps[grp[0]]
        for i, mgrp in enumerate(men_t):
            rank_w[j, i] = rm.get(mgrp[0], UNACCEPTABLE)
        rank_w[j, dummy_u] = last
    edges = [(i, j) for i in range(tu + 1) for j in range(tw + 1)
             if i == dummy_u or j == dummy_w or rank_u[i, j] < UNACCEPTABLE]

    def conflicts(e, f):
        # edge e = (alpha, beta') and f = (alpha', beta) let alpha, beta block
        (al, bp), (ap, be) = e, f
        if al == dummy_u or be == dummy_w or rank_u[al, be] >= UNACCEPTABLE:
            return False
        return rank_u[al, be] < rank_u[al, bp] and rank_w[be, al] < rank_w[be, ap]

    # agent-level layout: rows = real men then n_w dummy men; cols = real women then n_m dummy women
    type_of_m = np.empty(n_m + n_w, dtype=np.int64)
    type_of_w = np.empty(n_w + n_m, dtype=np.int64)
    for i, grp in enumerate(men_t):
        type_of_m[grp] = i
    type_of_m[n_m:] = dummy_u
    for j, grp in enumerate(women_t):
        type_of_w[grp] = j
    type_of_w[n_w:] = dummy_w
    m1 = pair.matching_1.pairs
    base_w = np.zeros((n_m + n_w, n_w + n_m), dtype=np.int64)
    for m in range(n_m):
        for w in range(n_w):
            base_w[m, w] = 1 if (m, w) in m1 else -1
    edge_of = type_of_m[:, None] * (tw + 1) + type_of_w[None, :]

    best = None
    chosen = []
    nodes = 0

    def evaluate():
        allowed = np.zeros((tu + 1) * (tw + 1), dtype=bool)
        for i, j in chosen:
            allowed[i * (tw + 1) + j] = True
        degree_u = {i for i, _ in chosen}
        degree_w = {j for _, j in chosen}
        if len(degree_u) < tu + 1 or len(degree_w) < tw + 1:
            return None
        ok = allowed[edge_of]
        cost = np.where(ok, base_w, _FORBIDDEN)
        rows, cols = linear_sum_assignment(cost, maximize=True)
        if not ok[rows, cols].all():
            return None
        return int(cost[rows, cols].sum()), rows, cols

    def rec(idx):
        nonlocal best, nodes
        nodes += 1
        if nodes > node_limit:
            raise BudgetExceeded(f"type-graph enumeration exceeded {node_limit} nodes")
        if idx == len(edges):
            res = evaluate()
            if res is not None and (best is None or res[0] > best[0]):
                best = res
            return
        e = edges[idx]
        if not conflicts(e, e) and not any(conflicts(e, f) or conflicts(f, e) for f in chosen):
            chosen.append(e)
            rec(idx + 1)
            chosen.pop()
        rec(idx + 1)

    rec(0)
    if best is None:  # pragma: no cover - a weakly stable matching always exists
        raise RuntimeError("no compatible type graph")
    weight, rows, cols = best
    m2 = Matching((int(r), int(c)) for r, c in zip(rows, cols) if r < n_m and c < n_w)
    return m2, len(m1) - weight
