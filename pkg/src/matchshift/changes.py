"""Random profile perturbations applied to a fraction r of the possible changes.

``apply_changes`` records what it did as a :class:`ChangeScript`; replaying
the script on the same base profile gives the same new profile.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .core import AgentId, InstancePair, PreferenceProfile, Side, validate_and_normalize
from .errors import FractionOutOfRange, ScriptMismatch, TiesUnsupported
from .sampling import as_generator, sample_at_swap_distance
from .solvers.stable import gale_shapley


class ChangeKind(Enum):
    REORDER = "reorder"
    REORDER_INVERSE = "reorder-inv"
    DELETE = "delete"
    SWAPS = "swaps"
    ADD = "add"


def round_half_up(r, count: int) -> int:
    """round(r * count) with halves going up, using r's decimal spelling exactly."""
    x = Fraction(str(r)) if isinstance(r, float) else Fraction(r)
    return int(x * count + Fraction(1, 2))


@dataclass(frozen=True)
class ChangeScript:
    """What a perturbation did to a profile.

    ``edits`` depends on the kind:

    * REORDER, REORDER_INVERSE, SWAPS: ``(AgentId, new_list)`` pairs;
    * DELETE: AgentIds whose lists were emptied;
    * ADD: ``(side, own_list, positions)`` per new agent in creation order,
      where ``positions[x]`` is the index at which the newcomer enters the
      list of opposite-side agent x.
    """
    kind: ChangeKind
    fraction_r: float
    seed: int | None
    base_digest: str
    edits: tuple = ()

    def __len__(self):
        return len(self.edits)

    def extended_base(self, profile: PreferenceProfile) -> PreferenceProfile:
        """The base profile on the index space of the result (ADD appends empty agents)."""
        self._check(profile)
        if self.kind != ChangeKind.ADD or not self.edits:
            return profile
        n_new = {s: sum(1 for e in self.edits if e[0] == s) for s in Side}
        left = list(profile.left) + [[]] * n_new[Side.LEFT]
        right = list(profile.right) + [[]] * n_new[Side.RIGHT]
        return validate_and_normalize(left, right)

    def _check(self, profile: PreferenceProfile):
        if profile.digest != self.base_digest:
            raise ScriptMismatch("script was recorded on a different profile")


def _strict_lists(profile: PreferenceProfile):
    if not profile.is_strict:
        raise TiesUnsupported("perturbations expect strict lists")
    return ([[g[0] for g in pl] for pl in profile.left],
            [[g[0] for g in pl] for pl in profile.right])


def replay(profile: PreferenceProfile, script: ChangeScript) -> PreferenceProfile:
    script._check(profile)
    left, right = _strict_lists(profile)
    sides = {Side.LEFT: left, Side.RIGHT: right}
    kind = script.kind
    if kind == ChangeKind.DELETE:
        for a in script.edits:
            sides[a.side][a.index] = []
    elif kind == ChangeKind.ADD:
        for side, own, positions in script.edits:
            opposite = sides[side.other]
            me = len(sides[side])
            if len(positions) != len(opposite):
                raise ScriptMismatch("insertion positions do not match the opposite side")
            for x, pos in enumerate(positions):
                opposite[x].insert(pos, me)
            sides[side].append(list(own))
    else:
        for a, new_list in script.edits:
            sides[a.side][a.index] = list(new_list)
    return validate_and_normalize(left, right)


def apply_changes(profile: PreferenceProfile, kind, fraction_r, seed):
    """Perturb a strict complete profile; returns ``(new_profile, script)``.

    REORDER / REORDER_INVERSE / DELETE / ADD touch round(r·|A|) agents
    (ADD creates that many, alternating sides starting on the left); SWAPS
    moves every list to swap distance round(r·L(L-1)/2), L its length.
    """
    kind = ChangeKind(kind)
    if not 0 <= float(fraction_r) <= 1:
        raise FractionOutOfRange(f"r={fraction_r} outside [0, 1]")
    seed_value = None if isinstance(seed, np.random.Generator) else int(seed)
    rng = as_generator(seed)
    left, right = _strict_lists(profile)
    agents = [AgentId(Side.LEFT, i) for i in range(len(left))] + \
             [AgentId(Side.RIGHT, j) for j in range(len(right))]
    lists = {Side.LEFT: left, Side.RIGHT: right}
    count = round_half_up(fraction_r, len(agents))
    edits = []
    if kind in (ChangeKind.REORDER, ChangeKind.REORDER_INVERSE, ChangeKind.DELETE):
        chosen = sorted(rng.choice(len(agents), size=count, replace=False).tolist())
        for idx in chosen:
            a = agents[idx]
            cur = lists[a.side][a.index]
            if kind == ChangeKind.DELETE:
                edits.append(a)
            elif kind == ChangeKind.REORDER:
                edits.append((a, tuple(rng.permutation(cur).tolist())))
            else:
                edits.append((a, tuple(cur[::-1])))
    elif kind == ChangeKind.SWAPS:
        for a in agents:
            cur = lists[a.side][a.index]
            d = round_half_up(fraction_r, len(cur) * (len(cur) - 1) // 2)
            if d:
                edits.append((a, tuple(sample_at_swap_distance(cur, d, rng))))
    else:
        sizes = {Side.LEFT: len(left), Side.RIGHT: len(right)}
        for t in range(count):
            side = Side.LEFT if t % 2 == 0 else Side.RIGHT
            opp = side.other
            own = tuple(rng.permutation(sizes[opp]).tolist())
            # existing lists of the opposite side grow by one each
            positions = tuple(int(rng.integers(0, sizes[side] + 1)) for _ in range(sizes[opp]))
            edits.append((side, own, positions))
            sizes[side] += 1
    script = ChangeScript(kind, fraction_r, seed_value, profile.digest, tuple(edits))
    return replay(profile, script), script


def perturb(profile: PreferenceProfile, kind, fraction_r, seed, budget_k: int = 0,
            budget_b: int = 0) -> tuple:
    """``(pair, script)`` with M₁ the left-optimal stable matching of the base profile."""
    p2, script = apply_changes(profile, kind, fraction_r, seed)
    p1 = script.extended_base(profile)
    return InstancePair(p1, p2, gale_shapley(p1), budget_k, budget_b), script
