"""Brute-force reference solvers for small instances.

Nothing here uses the rotation machinery or the branch-and-bound kernel; the
only shared code is the blocking-pair definition in :mod:`matchshift.core`.
"""
from __future__ import annotations

from functools import lru_cache

from .core import (
    NONE_RANK,
    InstancePair,
    Matching,
    Objective,
    PreferenceProfile,
    blocking_pairs,
)
from .errors import InstanceTooLarge, NoStableMatching

DEFAULT_MAX_AGENTS = 14


def _check_size(profile: PreferenceProfile, limit: int) -> None:
    if profile.n_agents > limit:
        raise InstanceTooLarge(f"{profile.n_agents} agents exceed the oracle limit of {limit}")


def _stable_search(profile: PreferenceProfile, candidates=None) -> list:
    """Weakly stable matchings by DFS over LEFT agents.

    A branch dies once a decided agent x strictly prefers some right agent h
    to its choice and h can no longer end up rejecting x: either h already
    holds someone it likes less than x, or too few undecided agents that h
    weakly prefers to x remain to fill h.
    """
    n_l, n_r = profile.n_left, profile.n_right
    lmaps, rmaps = profile.left_rank_maps, profile.right_rank_maps
    caps = profile.capacities
    if candidates is None:
        candidates = [profile.flat(0, i) for i in range(n_l)]
    assigned = [[] for _ in range(n_r)]
    choice = [None] * n_l
    found = []

    def dead(i):
        for x in range(i):
            own = NONE_RANK if choice[x] is None else lmaps[x][choice[x]]
            for h, g in lmaps[x].items():
                if g >= own:
                    continue
                rm = rmaps[h]
                rx = rm[x]
                if any(rx < rm[y] for y in assigned[h]):
                    return True
                need = caps[h] - len(assigned[h])
                if need > 0:
                    avail = sum(1 for y in range(i, n_l) if y in rm and rm[y] <= rx)
                    if avail < need:
                        return True
        return False

    def rec(i):
        if i == n_l:
            m = Matching((x, h) for x, h in enumerate(choice) if h is not None)
            if not blocking_pairs(m, profile):
                found.append(m)
            return
        for h in list(candidates[i]) + [None]:
            if h is not None:
                if len(assigned[h]) >= caps[h]:
                    continue
                assigned[h].append(i)
            choice[i] = h
            if not dead(i + 1):
                rec(i + 1)
            choice[i] = None
            if h is not None:
                assigned[h].pop()

    rec(0)
    return found


def enumerate_stable_matchings(profile: PreferenceProfile, max_agents: int = DEFAULT_MAX_AGENTS) -> list:
    """Every (weakly) stable matching of a profile; ties and capacities allowed."""
    _check_size(profile, max_agents)
    return _stable_search(profile)


def enumerate_matchings(profile: PreferenceProfile):
    """Yield every matching, maximal or not, including the empty one."""
    n_l = profile.n_left
    load = [0] * profile.n_right
    caps = profile.capacities
    lists = [profile.flat(0, i) for i in range(n_l)]
    chosen = []

    def rec(i):
        if i == n_l:
            yield Matching(chosen)
            return
        yield from rec(i + 1)
        for h in lists[i]:
            if load[h] < caps[h]:
                load[h] += 1
                chosen.append((i, h))
                yield from rec(i + 1)
                chosen.pop()
                load[h] -= 1

    yield from rec(0)


def oracle_ism(pair: InstancePair, objective: Objective = Objective.MINIMIZE,
               max_agents: int = DEFAULT_MAX_AGENTS) -> int:
    """Min (or max) of |M₁ △ M| over all stable matchings M of P₂."""
    stable = enumerate_stable_matchings(pair.profile_2, max_agents)
    if not stable:
        raise NoStableMatching("profile_2 has no stable matching")
    counts = [len(pair.matching_1.pairs ^ m.pairs) for m in stable]
    return min(counts) if objective == Objective.MINIMIZE else max(counts)


@lru_cache(maxsize=256)
def _blocker_cost_table(profile: PreferenceProfile, matching_1: Matching) -> tuple:
    """Sorted (blockers, best count) frontier over all matchings."""
    best = {}
    for m in enumerate_matchings(profile):
        nb = len(blocking_pairs(m, profile))
        c = len(matching_1.pairs ^ m.pairs)
        if c < best.get(nb, 1 << 60):
            best[nb] = c
    return tuple(sorted(best.items()))


def oracle_iasm(pair: InstancePair, max_agents: int = 12) -> int:
    """Min |M₁ △ M| over all matchings M of P₂ with at most b blocking pairs."""
    _check_size(pair.profile_2, max_agents)
    table = _blocker_cost_table(pair.profile_2, pair.matching_1)
    return min(c for nb, c in table if nb <= pair.budget_b)


def oracle_ihrt(pair: InstancePair, max_residents: int = 7) -> int:
    """Min |M₁ △ M| over weakly stable matchings of an HR profile with ties.

    In a stable matching each resident r is matched inside a tie group
    starting among its first n positions (n residents): every hospital r
    strictly prefers to its own must be full with other residents.  The
    search is restricted to those groups plus r's M₁ partner.
    """
    p2 = pair.profile_2
    n = p2.n_left
    if n > max_residents:
        raise InstanceTooLarge(f"{n} residents exceed the oracle limit of {max_residents}")
    m1 = dict(pair.matching_1.pairs)
    candidates = []
    for r, pl in enumerate(p2.left):
        cand, pos = [], 0
        for grp in pl:
            if pos >= n:
                break
            cand.extend(grp)
            pos += len(grp)
        h1 = m1.get(r)
        if h1 is not None and h1 in p2.left_rank_maps[r] and h1 not in cand:
            cand.append(h1)
        candidates.append(cand)
    stable = _stable_search(p2, candidates)
    if not stable:
        raise NoStableMatching("no weakly stable matching within the pruned space")
    return min(len(pair.matching_1.pairs ^ m.pairs) for m in stable)
