"""Almost-stable incremental matching: at most b blocking pairs allowed."""
from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np

from .. import _kernels as K
from ..core import UNACCEPTABLE, InstancePair, Matching, blocking_pairs
from ..errors import BudgetExceeded, BudgetTooLarge, NoSolutionWithinK
from .incremental import m1_weight_matrix, solve_ism
from .stable import require_strict_sm

DEFAULT_NODE_LIMIT = 10 ** 7


def count_blockers(profile, left_partners) -> int:
    a = profile.arrays
    rp = np.full(profile.n_right, -1, dtype=np.int64)
    for m, w in enumerate(left_partners):
        if w >= 0:
            rp[w] = m
    return int(K.blocking_mask(np.asarray(left_partners, dtype=np.int64), rp, a.lrank, a.rrank).sum())


def _m1_arrays(pair: InstancePair):
    p2 = pair.profile_2
    m1l = np.full(p2.n_left, -1, dtype=np.int64)
    m1r = np.full(p2.n_right, -1, dtype=np.int64)
    for m, w in pair.matching_1_in_profile_2().pairs:
        m1l[m] = w
        m1r[w] = m
    return m1l, m1r


def solve_iasm_exact(pair: InstancePair, node_limit: int = DEFAULT_NODE_LIMIT):
    """Matching with at most b blocking pairs in P₂ minimizing |M₁ △ M₂|.

    Returns ``(matching, count, blockers)``.  b = 0 is plain ISM.  Otherwise
    a branch-and-bound search starts from the best stable matching as
    incumbent and looks for strictly better matchings.
    """
    p2 = pair.profile_2
    require_strict_sm(p2)
    b = pair.budget_b
    if b == 0:
        m2, count = solve_ism(pair)
        return m2, count, frozenset()
    kept = pair.matching_1_in_profile_2()
    lost = len(pair.matching_1) - len(kept)
    m1l, m1r = _m1_arrays(pair)
    if count_blockers(p2, m1l) <= b:
        return kept, lost, blocking_pairs(kept, p2)
    m_ism, c_ism = solve_ism(pair)
    a = p2.arrays
    order = np.argsort(-a.llen, kind="stable").astype(np.int64)
    best, found, part, nodes, exceeded = K.iasm_branch_and_bound(
        order, a.lpref, a.llen, a.lrank, a.rpref, a.rlen, a.rrank, m1l, m1r,
        b, c_ism - lost, node_limit)
    if exceeded:
        raise BudgetExceeded(f"branch-and-bound exceeded {node_limit} nodes")
    if found:
        m2, count = Matching.from_left_partners(part), int(best) + lost
    else:
        m2, count = m_ism, c_ism
    return m2, count, blocking_pairs(m2, p2)


def _drop_pairs(arrays, pairs):
    """Copy of the strict arrays with some pairs made unacceptable."""
    lpref, llen, lrank, rpref, rlen, rrank = (x.copy() for x in arrays)
    for m, w in pairs:
        for pref, length, rank, a, x in ((lpref, llen, lrank, m, w), (rpref, rlen, rrank, w, m)):
            row = [y for y in pref[a, :length[a]] if y != x]
            pref[a, :] = -1
            pref[a, :len(row)] = row
            length[a] = len(row)
            rank[a, x] = UNACCEPTABLE
            rank[a, row] = np.arange(len(row))
    return lpref, llen, lrank, rpref, rlen, rrank


def solve_iasm_xp_b(pair: InstancePair, node_limit: int = 10 ** 6):
    """Guess the blocking pairs, then solve a weighted stable problem.

    For each set B of at most b acceptable pairs, B is removed from P₂ and a
    stable matching maximizing the weight (2 per M₁ edge) is computed; its
    true blocking pairs in P₂ are a subset of B.  Returns the best
    ``(matching, count)``.
    """
    p2 = pair.profile_2
    require_strict_sm(p2)
    b = pair.budget_b
    pairs = p2.acceptable_pairs()
    total = sum(comb(len(pairs), j) for j in range(b + 1))
    if total > node_limit:
        raise BudgetTooLarge(f"{total} guesses exceed the node limit {node_limit}")
    weights = m1_weight_matrix(pair, 2)
    n1 = len(pair.matching_1)
    lower = n1 - len(pair.matching_1_in_profile_2())
    base = tuple(p2.arrays)
    best = None
    for j in range(b + 1):
        for guess in combinations(pairs, j):
            arr = _drop_pairs(base, guess) if guess else base
            lp, status = K.max_weight_stable(*arr, weights)
            if status != K.OK:
                raise RuntimeError("rotation chain failed")
            size = int((lp >= 0).sum())
            weight = int(sum(weights[m, w] for m, w in enumerate(lp) if w >= 0))
            count = n1 + size - weight
            if best is None or count < best[1]:
                best = (lp.copy(), count)
            if best[1] == lower:
                return Matching.from_left_partners(best[0]), best[1]
    return Matching.from_left_partners(best[0]), best[1]


def solve_iasm_xp_k(pair: InstancePair, node_limit: int = 10 ** 6):
    """Guess the edge set F = M₁ △ M₂ with |F| ≤ k.

    Sizes are tried in increasing order, so the first matching M₁ △ F with
    at most b blocking pairs is optimal.  Raises ``NoSolutionWithinK`` when
    none exists for |F| ≤ k.
    """
    p2 = pair.profile_2
    require_strict_sm(p2)
    k, b = pair.budget_k, pair.budget_b
    acc = p2.left_rank_maps
    forced = sorted((m, w) for m, w in pair.matching_1.pairs if w not in acc[m])
    kept = sorted(set(pair.matching_1.pairs) - set(forced))
    m1set = set(kept)
    additions = [e for e in p2.acceptable_pairs() if e not in m1set]
    candidates = kept + additions
    if len(forced) > k:
        raise NoSolutionWithinK(f"{len(forced)} M₁ edges vanished from P₂, more than k={k}")
    lpart = np.full(p2.n_left, -1, dtype=np.int64)
    rpart = np.full(p2.n_right, -1, dtype=np.int64)
    for m, w in kept:
        lpart[m], rpart[w] = w, m
    nodes = 0

    def rec(start, left_to_pick):
        nonlocal nodes
        if left_to_pick == 0:
            return count_blockers(p2, lpart) <= b
        for i in range(start, len(candidates)):
            nodes += 1
            if nodes > node_limit:
                raise BudgetTooLarge(f"edge-set enumeration exceeded {node_limit} nodes")
            m, w = candidates[i]
            if i < len(kept):
                lpart[m] = rpart[w] = -1
                if rec(i + 1, left_to_pick - 1):
                    return True
                lpart[m], rpart[w] = w, m
            elif lpart[m] == -1 and rpart[w] == -1:
                lpart[m], rpart[w] = w, m
                if rec(i + 1, left_to_pick - 1):
                    return True
                lpart[m] = rpart[w] = -1
        return False

    for size in range(k - len(forced) + 1):
        if rec(0, size):
            return Matching.from_left_partners(lpart), size + len(forced)
    raise NoSolutionWithinK(f"no matching with at most {b} blocking pairs within k={k}")
