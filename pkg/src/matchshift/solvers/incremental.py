"""Incremental stable marriage and hospital-residents solvers."""
from __future__ import annotations

import numpy as np

from ..core import InstancePair, Matching, Objective, PreferenceProfile, validate_and_normalize
from ..errors import TiesUnsupported
from .stable import RotationPoset, gale_shapley_partners, max_weight_stable_partners, require_strict_sm


def m1_weight_matrix(pair: InstancePair, value: int) -> np.ndarray:
    """``value`` on every M₁ edge that is still acceptable in P₂, 0 elsewhere."""
    p2 = pair.profile_2
    w = np.zeros((p2.n_left, p2.n_right), dtype=np.int64)
    acc = p2.left_rank_maps
    for m, h in pair.matching_1.pairs:
        if h in acc[m]:
            w[m, h] = value
    return w


def solve_ism(pair: InstancePair, objective: Objective = Objective.MINIMIZE,
              poset: RotationPoset | None = None):
    """Stable matching of P₂ with the smallest (or largest) |M₁ △ M₂|.

    Returns ``(matching, count)``; comparing the count with the budget k is
    left to the caller.
    """
    p2 = pair.profile_2
    require_strict_sm(p2)
    sign = 1 if objective == Objective.MINIMIZE else -1
    lp = max_weight_stable_partners(p2, m1_weight_matrix(pair, sign), poset)
    m2 = Matching.from_left_partners(lp)
    return m2, len(pair.matching_1.pairs ^ m2.pairs)


def clone_hospitals(profile: PreferenceProfile):
    """One-to-one profile where hospital h becomes u(h) consecutive copies.

    Residents rank the copies of h in place of h, in copy order; each copy
    keeps h's list.  Returns ``(cloned, owner)`` with ``owner[c]`` the
    hospital behind copy c.
    """
    if not profile.is_strict:
        raise TiesUnsupported("hospital cloning here needs strict lists")
    start = np.concatenate([[0], np.cumsum(profile.capacities)]).astype(int)
    owner = [h for h, u in enumerate(profile.capacities) for _ in range(u)]
    left = [[c for (h,) in pl for c in range(start[h], start[h + 1])] for pl in profile.left]
    right = [[r for (r,) in profile.right[h]] for h in owner]
    return validate_and_normalize(left, right, mode="sm"), owner


def solve_ihr(pair: InstancePair):
    """Incremental hospital-residents via cloning to a weighted SM instance.

    Every copy of an M₁ edge weighs 2; with total weight z of the returned
    cloned matching, ``count = |M₁| + |M₂| - z``.
    """
    p2 = pair.profile_2
    cloned, owner = clone_hospitals(p2)
    m1 = set(pair.matching_1.pairs)
    w = np.zeros((cloned.n_left, cloned.n_right), dtype=np.int64)
    for r, pl in enumerate(cloned.left):
        for (c,) in pl:
            if (r, owner[c]) in m1:
                w[r, c] = 2
    lp = max_weight_stable_partners(cloned, w)
    weight = int(sum(w[r, c] for r, c in enumerate(lp) if c >= 0))
    m2 = Matching((r, owner[c]) for r, c in enumerate(lp) if c >= 0)
    count = len(m1) + len(m2) - weight
    return m2, count


def resident_optimal(profile: PreferenceProfile) -> Matching:
    """Resident-proposing stable matching of a strict HR profile (via cloning)."""
    cloned, owner = clone_hospitals(profile)
    lp, _ = gale_shapley_partners(cloned)
    return Matching((r, owner[c]) for r, c in enumerate(lp) if c >= 0)
