"""Domain types, validation, stability predicates and distance metrics.

Preferences are weak orders stored as tuples of tie groups, each tie group a
sorted tuple of opposite-side indices.  Agents are addressed by ``(side,
index)``; inside a profile a LEFT agent's list holds RIGHT indices and vice
versa, so plain integers are enough once the side is known.

Being unmatched ranks strictly below every acceptable partner.  Rank arrays
encode this with two sentinels: ``NONE_RANK`` for "unmatched" and the larger
``UNACCEPTABLE`` for partners outside the list.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DuplicateEntry,
    IndexOutOfRange,
    InvalidPair,
    UnstableInitialMatching,
    ZeroCapacity,
    ZeroDenominator,
)

NONE_RANK = 1 << 20
UNACCEPTABLE = 1 << 21
INFINITY = math.inf


class Side(IntEnum):
    LEFT = 0
    RIGHT = 1

    @property
    def other(self) -> "Side":
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


class Objective(Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"


class AgentId(NamedTuple):
    side: Side
    index: int


PreferenceList = tuple  # tuple[tuple[int, ...], ...]


class StrictArrays(NamedTuple):
    """Dense array view of a profile used by the compiled kernels.

    ``lpref[m, j]`` is the j-th entry of m's list (padded with -1) and
    ``lrank[m, w]`` the tie-group index of w in m's list; likewise for the
    right side.
    """
    lpref: np.ndarray
    llen: np.ndarray
    lrank: np.ndarray
    rpref: np.ndarray
    rlen: np.ndarray
    rrank: np.ndarray


def _default_names(prefix: str, n: int) -> tuple:
    return tuple(f"{prefix}{i + 1}" for i in range(n))


@dataclass(frozen=True)
class PreferenceProfile:
    """A normalized two-sided preference profile.

    Build instances with :func:`validate_and_normalize`; the constructor
    trusts its input.
    """
    left: tuple
    right: tuple
    capacities: tuple
    mode: str = "sm"
    left_names: tuple = field(default=(), compare=False)
    right_names: tuple = field(default=(), compare=False)

    @property
    def n_left(self) -> int:
        return len(self.left)

    @property
    def n_right(self) -> int:
        return len(self.right)

    @property
    def n_agents(self) -> int:
        return len(self.left) + len(self.right)

    @cached_property
    def is_strict(self) -> bool:
        return all(len(g) == 1 for lists in (self.left, self.right) for pl in lists for g in pl)

    def lists(self, side: Side) -> tuple:
        return self.left if side == Side.LEFT else self.right

    def names(self, side: Side) -> tuple:
        if side == Side.LEFT:
            return self.left_names or _default_names("r" if self.mode == "hr" else "m", self.n_left)
        return self.right_names or _default_names("h" if self.mode == "hr" else "w", self.n_right)

    def name_of(self, agent: AgentId) -> str:
        return self.names(agent.side)[agent.index]

    @cached_property
    def left_rank_maps(self) -> tuple:
        return tuple({x: g for g, grp in enumerate(pl) for x in grp} for pl in self.left)

    @cached_property
    def right_rank_maps(self) -> tuple:
        return tuple({x: g for g, grp in enumerate(pl) for x in grp} for pl in self.right)

    def rank_maps(self, side: Side) -> tuple:
        return self.left_rank_maps if side == Side.LEFT else self.right_rank_maps

    def acceptable_pairs(self) -> list:
        """All mutually acceptable (left, right) pairs in left-major order."""
        return [(m, w) for m, pl in enumerate(self.left) for grp in pl for w in grp]

    def flat(self, side: Side, index: int) -> list:
        return [x for grp in self.lists(side)[index] for x in grp]

    @cached_property
    def arrays(self) -> StrictArrays:
        s = self.is_strict
        return StrictArrays(*_side_arrays(self.left, self.n_right, s), *_side_arrays(self.right, self.n_left, s))

    @cached_property
    def digest(self) -> str:
        """Content hash (lists, capacities, mode) used to tie change scripts to a profile."""
        h = hashlib.sha256(repr((self.mode, self.left, self.right, self.capacities)).encode())
        return h.hexdigest()


def _side_arrays(lists, n_other, strict=False):
    n = len(lists)
    width = max([len(pl) if strict else sum(len(g) for g in pl) for pl in lists] + [1])
    pref = np.full((n, width), -1, dtype=np.int64)
    length = np.zeros(n, dtype=np.int64)
    rank = np.full((n, n_other), UNACCEPTABLE, dtype=np.int64)
    for a, pl in enumerate(lists):
        if strict:
            row = [g[0] for g in pl]
            pref[a, :len(row)] = row
            rank[a, row] = np.arange(len(row))
            length[a] = len(row)
            continue
        j = 0
        for g, grp in enumerate(pl):
            for x in grp:
                pref[a, j] = x
                rank[a, x] = g
                j += 1
        length[a] = j
    return pref, length, rank


def _parse_list(raw, owner: AgentId, n_other: int) -> list:
    """Tie groups as lists, or a flat list of ints when every entry is a plain index."""
    if isinstance(raw, np.ndarray):
        raw = raw.tolist()
    if all(type(x) is int for x in raw):
        # strict fast path
        if raw and (min(raw) < 0 or max(raw) >= n_other):
            bad = next(x for x in raw if not 0 <= x < n_other)
            raise IndexOutOfRange(f"{owner} lists index {bad}, outside 0..{n_other - 1}")
        if len(set(raw)) != len(raw):
            seen = set()
            raise DuplicateEntry(owner, next(x for x in raw if x in seen or seen.add(x)))
        return raw
    groups = []
    seen = set()
    for entry in raw:
        members = [entry] if isinstance(entry, (int, np.integer)) else list(entry)
        grp = []
        for x in members:
            x = int(x)
            if not 0 <= x < n_other:
                raise IndexOutOfRange(f"{owner} lists index {x}, outside 0..{n_other - 1}")
            if x in seen:
                raise DuplicateEntry(owner, x)
            seen.add(x)
            grp.append(x)
        if grp:
            groups.append(grp)
    return groups


def validate_and_normalize(left: Sequence, right: Sequence, capacities: Sequence | None = None, *,
                           mode: str | None = None, left_names: Sequence | None = None,
                           right_names: Sequence | None = None) -> PreferenceProfile:
    """Validate raw preference lists and intersect acceptability to mutual pairs.

    Each raw list is a sequence whose entries are either an index (a singleton
    tie group) or an iterable of indices (a tie group).  Tie-group order is
    preserved; members are sorted inside a group.
    """
    n_left, n_right = len(left), len(right)
    if capacities is None:
        caps = (1,) * n_right
    else:
        caps = tuple(int(c) for c in capacities)
        if len(caps) != n_right:
            raise IndexOutOfRange(f"{len(caps)} capacities for {n_right} right agents")
        for j, c in enumerate(caps):
            if c < 1:
                raise ZeroCapacity(f"right agent {j} has capacity {c}")
    if mode is None:
        mode = "hr" if any(c != 1 for c in caps) else "sm"
    if mode not in ("sm", "hr"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "sm" and any(c != 1 for c in caps):
        raise ZeroCapacity("SM mode requires every capacity to be 1")

    lg = [_parse_list(pl, AgentId(Side.LEFT, i), n_right) for i, pl in enumerate(left)]
    rg = [_parse_list(pl, AgentId(Side.RIGHT, j), n_left) for j, pl in enumerate(right)]

    def members(pl):
        return set(pl) if not pl or type(pl[0]) is int else {x for grp in pl for x in grp}

    lsets = [members(pl) for pl in lg]
    rsets = [members(pl) for pl in rg]

    def keep(groups, owner, other_sets):
        if groups and type(groups[0]) is int:
            return tuple((x,) for x in groups if owner in other_sets[x])
        out = []
        for grp in groups:
            kept = tuple(sorted(x for x in grp if owner in other_sets[x]))
            if kept:
                out.append(kept)
        return tuple(out)

    new_left = tuple(keep(pl, i, rsets) for i, pl in enumerate(lg))
    new_right = tuple(keep(pl, j, lsets) for j, pl in enumerate(rg))
    ln = tuple(left_names) if left_names else ()
    rn = tuple(right_names) if right_names else ()
    if ln and len(ln) != n_left or rn and len(rn) != n_right:
        raise IndexOutOfRange("name list length does not match agent count")
    prof = PreferenceProfile(new_left, new_right, caps, mode, ln, rn)
    if all(not pl or type(pl[0]) is int for pl in lg + rg):
        prof.__dict__["is_strict"] = True  # seed the cached property
    return prof


class Matching:
    """An immutable set of (left index, right index) pairs."""

    __slots__ = ("pairs",)

    def __init__(self, pairs: Iterable = ()):
        object.__setattr__(self, "pairs", frozenset((int(a), int(b)) for a, b in pairs))

    def __setattr__(self, key, value):
        raise AttributeError("Matching is immutable")

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __len__(self):
        return len(self.pairs)

    def __contains__(self, pair):
        return tuple(pair) in self.pairs

    def __eq__(self, other):
        return isinstance(other, Matching) and self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __repr__(self):
        return f"Matching({sorted(self.pairs)})"

    def left_partners(self, n_left: int) -> np.ndarray:
        out = np.full(n_left, -1, dtype=np.int64)
        for a, b in self.pairs:
            out[a] = b
        return out

    def right_partners(self, n_right: int) -> np.ndarray:
        """Partner per right agent (SM only: capacity 1)."""
        out = np.full(n_right, -1, dtype=np.int64)
        for a, b in self.pairs:
            out[b] = a
        return out

    def right_assigned(self, n_right: int) -> list:
        out = [[] for _ in range(n_right)]
        for a, b in sorted(self.pairs):
            out[b].append(a)
        return out

    @classmethod
    def from_left_partners(cls, partners) -> "Matching":
        return cls((m, int(w)) for m, w in enumerate(partners) if w >= 0)


def validate_matching(matching: Matching, profile: PreferenceProfile) -> None:
    seen_left = set()
    load = [0] * profile.n_right
    lmaps = profile.left_rank_maps
    for m, w in matching.pairs:
        if not (0 <= m < profile.n_left and 0 <= w < profile.n_right):
            raise InvalidPair(f"pair ({m}, {w}) outside the index space")
        if w not in lmaps[m]:
            raise InvalidPair(f"pair ({m}, {w}) is not mutually acceptable")
        if m in seen_left:
            raise InvalidPair(f"left agent {m} matched twice")
        seen_left.add(m)
        load[w] += 1
        if load[w] > profile.capacities[w]:
            raise InvalidPair(f"right agent {w} over capacity")


def blocking_pairs(matching: Matching, profile: PreferenceProfile) -> frozenset:
    """Pairs blocking ``matching`` under weak stability (SM or HR)."""
    validate_matching(matching, profile)
    lmaps, rmaps = profile.left_rank_maps, profile.right_rank_maps
    partner = {m: w for m, w in matching.pairs}
    assigned = matching.right_assigned(profile.n_right)
    out = set()
    for m, pl in enumerate(profile.left):
        own = lmaps[m][partner[m]] if m in partner else NONE_RANK
        for g, grp in enumerate(pl):
            if g >= own:
                break
            for w in grp:
                res = assigned[w]
                if len(res) < profile.capacities[w]:
                    out.add((m, w))
                    continue
                rm = rmaps[w]
                mine = rm[m]
                if any(mine < rm[x] for x in res):
                    out.add((m, w))
    return frozenset(out)


def is_stable(matching: Matching, profile: PreferenceProfile) -> bool:
    return not blocking_pairs(matching, profile)


def swap_distance(list_a: PreferenceList, list_b: PreferenceList) -> float | int:
    """Number of unordered pairs whose relation differs between two weak orders.

    A pair strictly ordered in ``list_a`` counts when ``list_b`` does not order
    it the same way; a tied pair counts when ``list_b`` breaks the tie.
    Returns ``INFINITY`` when the acceptable sets differ.
    """
    ra = {x: g for g, grp in enumerate(list_a) for x in grp}
    rb = {x: g for g, grp in enumerate(list_b) for x in grp}
    if ra.keys() != rb.keys():
        return INFINITY
    items = sorted(ra)
    count = 0
    for i, x in enumerate(items):
        ax, bx = ra[x], rb[x]
        for y in items[i + 1:]:
            da = ax - ra[y]
            db = bx - rb[y]
            if (da > 0) - (da < 0) != (db > 0) - (db < 0):
                count += 1
    return count


def profile_distance(p1: PreferenceProfile, p2: PreferenceProfile) -> float | int:
    """Summed per-agent swap distance over both sides."""
    if (p1.n_left, p1.n_right) != (p2.n_left, p2.n_right):
        raise IndexOutOfRange("profiles live on different index spaces")
    total = 0
    for a, b in zip(p1.left + p1.right, p2.left + p2.right):
        d = swap_distance(a, b)
        if d == INFINITY:
            return INFINITY
        total += d
    return total


def symmetric_difference(m1: Matching, m2: Matching, s1: int | None = None,
                         s2: int | None = None) -> tuple:
    """``(|m1 △ m2|, normalized)``; normalized is None unless both sizes are given."""
    count = len(m1.pairs ^ m2.pairs)
    if s1 is None or s2 is None:
        return count, None
    if s1 + s2 == 0:
        raise ZeroDenominator("stable-matching sizes sum to zero")
    return count, Fraction(count, s1 + s2)


@dataclass(frozen=True)
class InstancePair:
    """An incremental instance: old profile, new profile, old stable matching, budgets."""
    profile_1: PreferenceProfile
    profile_2: PreferenceProfile
    matching_1: Matching
    budget_k: int = 0
    budget_b: int = 0

    def __post_init__(self):
        p1, p2 = self.profile_1, self.profile_2
        if (p1.n_left, p1.n_right, p1.mode) != (p2.n_left, p2.n_right, p2.mode):
            raise IndexOutOfRange("the two profiles live on different index spaces")
        if self.budget_k < 0 or self.budget_b < 0:
            raise ValueError("budgets must be nonnegative")
        if blocking_pairs(self.matching_1, p1):
            raise UnstableInitialMatching("matching_1 is blocked in profile_1")

    def with_budgets(self, k: int | None = None, b: int | None = None) -> "InstancePair":
        return InstancePair(self.profile_1, self.profile_2, self.matching_1,
                            self.budget_k if k is None else k, self.budget_b if b is None else b)

    def matching_1_in_profile_2(self) -> Matching:
        """The part of M₁ still mutually acceptable in P₂."""
        acc = self.profile_2.left_rank_maps
        return Matching((m, w) for m, w in self.matching_1.pairs if w in acc[m])
