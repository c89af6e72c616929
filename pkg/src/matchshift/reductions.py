"""Reductions between the four kinds of profile change, and an oracle check.

Each reduction turns an incremental instance whose profiles differ in one
way (swaps, whole-list replacements, deletions, additions) into an
equivalent instance whose profiles differ in the next way around the cycle
swap -> replace -> add -> delete -> swap.  "Equivalent" means: a stable
matching of the new profile within distance k of the old matching exists
exactly when one within k' exists in the reduced instance.

Original agents keep their indices; new agents are appended after them and
get dotted names derived from the agent they serve (``m3.b``, ``w2.rrm``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .core import (
    INFINITY,
    AgentId,
    InstancePair,
    Matching,
    PreferenceProfile,
    Side,
    blocking_pairs,
    profile_distance,
    validate_and_normalize,
)
from .errors import InstanceTooLarge, TiesUnsupported, WrongChangeType
from .oracle import oracle_ism


class ChangeType(Enum):
    SWAP = "swap"
    REPLACE = "replace"
    DELETE = "delete"
    ADD = "add"
    MIXED = "mixed"


# each reduction maps its source kind to the next kind on this cycle
CYCLE = (ChangeType.SWAP, ChangeType.REPLACE, ChangeType.ADD, ChangeType.DELETE)


@dataclass(frozen=True)
class ReducedInstance:
    """Result of a reduction; ``pair.budget_k`` equals ``k_prime``."""
    pair: InstancePair
    agent_map: dict
    gadget_agents: frozenset
    k_prime: int
    source: ChangeType
    target: ChangeType
    offset: int = field(default=0)

    def __post_init__(self):
        image = set(self.agent_map.values())
        if len(image) != len(self.agent_map):
            raise ValueError("agent map is not injective")
        if image & self.gadget_agents:
            raise ValueError("gadget agents overlap mapped agents")
        # every construction argues this; a failure means a construction bug
        if blocking_pairs(self.pair.matching_1, self.pair.profile_1):
            raise AssertionError("reduced matching_1 is not stable in reduced profile_1")


# ---------------------------------------------------------------------------
# change classification

def _lists(profile):
    return profile.left + profile.right


def _emptied(profile, agents) -> PreferenceProfile:
    """Copy of ``profile`` where the given AgentIds have empty lists."""
    left = [[] if AgentId(Side.LEFT, i) in agents else pl for i, pl in enumerate(profile.left)]
    right = [[] if AgentId(Side.RIGHT, j) in agents else pl for j, pl in enumerate(profile.right)]
    return validate_and_normalize(left, right, profile.capacities, mode=profile.mode)


def _flips(p1, p2):
    """Agents whose list goes nonempty -> empty, and empty -> nonempty."""
    gone, came = set(), set()
    for side in Side:
        for i, (a, b) in enumerate(zip(p1.lists(side), p2.lists(side))):
            if a and not b:
                gone.add(AgentId(side, i))
            elif b and not a:
                came.add(AgentId(side, i))
    return gone, came


def classify_change(p1: PreferenceProfile, p2: PreferenceProfile) -> ChangeType:
    if (p1.n_left, p1.n_right) != (p2.n_left, p2.n_right):
        raise ValueError("profiles live on different index spaces")
    if _lists(p1) == _lists(p2):
        return ChangeType.SWAP
    gone, came = _flips(p1, p2)
    if gone and not came and _lists(_emptied(p1, gone)) == _lists(p2):
        return ChangeType.DELETE
    if came and not gone and _lists(_emptied(p2, came)) == _lists(p1):
        return ChangeType.ADD
    if profile_distance(p1, p2) != INFINITY:
        return ChangeType.SWAP
    if not gone and not came:
        return ChangeType.REPLACE
    return ChangeType.MIXED


# ---------------------------------------------------------------------------
# name-keyed profile builder

class _Builder:
    """Mutable two-profile instance keyed by AgentId, strict or weak lists.

    Lists are sequences of tie groups of AgentIds.  ``build`` intersects
    acceptability, so a list may mention agents that do not list back.
    """

    def __init__(self, pair: InstancePair):
        p1 = pair.profile_1
        self.names = {s: list(p1.names(s)) for s in Side}
        self.taken = {n for s in Side for n in self.names[s]}
        self.pref = []
        for prof in (pair.profile_1, pair.profile_2):
            d = {}
            for s in Side:
                for i, pl in enumerate(prof.lists(s)):
                    d[AgentId(s, i)] = [tuple(AgentId(s.other, x) for x in g) for g in pl]
            self.pref.append(d)
        self.matching = {(AgentId(Side.LEFT, m), AgentId(Side.RIGHT, w)) for m, w in pair.matching_1}
        self.new = set()

    def add(self, side: Side, name: str) -> AgentId:
        if name in self.taken:
            raise ValueError(f"generated name {name!r} clashes with an existing agent")
        self.taken.add(name)
        a = AgentId(side, len(self.names[side]))
        self.names[side].append(name)
        self.pref[0][a] = []
        self.pref[1][a] = []
        self.new.add(a)
        return a

    def name(self, a: AgentId) -> str:
        return self.names[a.side][a.index]

    def set(self, a, first=None, second=None):
        """Set strict lists (sequences of AgentIds) in profile 1 and/or 2."""
        if first is not None:
            self.pref[0][a] = [(x,) for x in first]
        if second is not None:
            self.pref[1][a] = [(x,) for x in second]

    def match(self, x: AgentId, y: AgentId):
        self.matching.add((x, y) if x.side == Side.LEFT else (y, x))

    def _profile(self, which: int, mode: str, caps) -> PreferenceProfile:
        d = self.pref[which]
        out = []
        for s in Side:
            out.append([[[y.index for y in g] for g in d[AgentId(s, i)]]
                        for i in range(len(self.names[s]))])
        return validate_and_normalize(out[0], out[1], caps, mode=mode,
                                      left_names=self.names[Side.LEFT],
                                      right_names=self.names[Side.RIGHT])

    def build(self, pair: InstancePair, k_prime: int, source, target) -> ReducedInstance:
        caps = tuple(pair.profile_1.capacities) + (1,) * (len(self.names[Side.RIGHT]) - pair.profile_1.n_right)
        mode = pair.profile_1.mode
        p1, p2 = self._profile(0, mode, caps), self._profile(1, mode, caps)
        m1 = Matching((x.index, y.index) for x, y in self.matching)
        new_pair = InstancePair(p1, p2, m1, k_prime, pair.budget_b)
        amap = {AgentId(s, i): AgentId(s, i) for s in Side for i in range(len(pair.profile_1.lists(s)))}
        return ReducedInstance(new_pair, amap, frozenset(self.new), k_prime, source, target,
                               k_prime - pair.budget_k)


def _strict_ids(groups):
    if any(len(g) != 1 for g in groups):
        raise TiesUnsupported("this reduction inserts agents at exact positions and needs strict lists")
    return [g[0] for g in groups]


def _sm_only(pair: InstancePair):
    if pair.profile_1.mode != "sm":
        raise WrongChangeType("change-type reductions are defined for one-to-one instances")


# ---------------------------------------------------------------------------
# the four reductions

def reduce_swap_to_replace(pair: InstancePair) -> ReducedInstance:
    """A swap is a replacement of the swapped list; nothing changes but the tag."""
    _sm_only(pair)
    if profile_distance(pair.profile_1, pair.profile_2) == INFINITY:
        raise WrongChangeType("acceptable sets differ, so this is not a swap instance")
    return _Builder(pair).build(pair, pair.budget_k, ChangeType.SWAP, ChangeType.REPLACE)


def reduce_delete_to_swap(pair: InstancePair) -> ReducedInstance:
    """Simulate each deletion with one swap in a private two-agent appendix.

    For a deleted agent a, a new agent p2 (other side) and p3 (a's side) are
    added.  p3 accepts only p2.  p2 ranks p3 above a in the old profile and a
    above p3 in the new one, and a ranks p2 first in both; so in the new
    profile a is tied up with p2, which is the deletion.  Every original agent
    keeps its old list in both profiles.
    """
    _sm_only(pair)
    kind = classify_change(pair.profile_1, pair.profile_2)
    gone, came = _flips(pair.profile_1, pair.profile_2)
    if kind != ChangeType.DELETE and not (kind == ChangeType.SWAP and not gone and profile_distance(
            pair.profile_1, pair.profile_2) == 0):
        raise WrongChangeType(f"expected a deletion instance, got {kind.value}")
    bld = _Builder(pair)
    bld.pref[1] = {a: list(pl) for a, pl in bld.pref[0].items()}
    for a in sorted(gone):
        nm = bld.name(a)
        p2 = bld.add(a.side.other, f"{nm}.p2")
        p3 = bld.add(a.side, f"{nm}.p3")
        bld.set(p2, [p3, a], [a, p3])
        bld.set(p3, [p2], [p2])
        for prof in bld.pref:
            prof[a] = [(p2,)] + prof[a]
        bld.match(p2, p3)
    return bld.build(pair, pair.budget_k + 2 * len(gone), ChangeType.DELETE, ChangeType.SWAP)


def reduce_add_to_delete(pair: InstancePair) -> ReducedInstance:
    """Pre-occupy each added agent in the old profile with a partner who leaves.

    For an added agent a, a new agent p2 (other side) accepts only a in the
    old profile and has an empty list in the new one; a ranks p2 first.  Every
    original agent takes its new list in both profiles.
    """
    _sm_only(pair)
    kind = classify_change(pair.profile_1, pair.profile_2)
    gone, came = _flips(pair.profile_1, pair.profile_2)
    if kind != ChangeType.ADD and not (kind == ChangeType.SWAP and not came and profile_distance(
            pair.profile_1, pair.profile_2) == 0):
        raise WrongChangeType(f"expected an addition instance, got {kind.value}")
    bld = _Builder(pair)
    bld.pref[0] = {a: list(pl) for a, pl in bld.pref[1].items()}
    for a in sorted(came):
        p2 = bld.add(a.side.other, f"{bld.name(a)}.p2")
        bld.set(p2, [a], [])
        for prof in bld.pref:
            prof[a] = [(p2,)] + prof[a]
        bld.match(a, p2)
    return bld.build(pair, pair.budget_k + len(came), ChangeType.ADD, ChangeType.DELETE)


# (gadget agent, side relative to the man m, strict list) for the edge gadget
# of an old-matching edge {m, w}; "c_m"/"c_w" are the clones and names
# starting with "w." live in w's half of the gadget.
_GADGET = (
    ("m.lm", "w", ("m.lt", "c_m", "m.lb")),
    ("m.lt", "m", ("m.rt", "m.lm")),
    ("m.lb", "m", ("m.lm", "m.rb")),
    ("m.rt", "w", ("m.rrm", "m.lt")),
    ("m.rb", "w", ("m.lb", "m.rrm")),
    ("m.rrm", "m", ("m.rb", "w.lm", "m.rt")),
    ("w.lm", "w", ("w.lt", "m.rrm", "w.lb")),
    ("w.lt", "m", ("w.rt", "w.lm")),
    ("w.lb", "m", ("w.lm", "w.rb")),
    ("w.rt", "w", ("w.rrm", "w.lt")),
    ("w.rb", "w", ("w.lb", "w.rrm")),
    ("w.rrm", "m", ("w.rb", "c_w", "w.rt")),
)


def reduce_replace_to_add(pair: InstancePair) -> ReducedInstance:
    """Turn list replacements into additions via binding agents, clones and edge gadgets.

    Let R be the agents whose list changed plus their old partners.  For each
    a in R a binding agent b (empty, then accepting only a; a ranks it first)
    forces a out of the new profile, and a clone c (empty, then a's new list)
    takes a's place; c is ranked directly before a everywhere.  Each old
    matching edge inside R is routed through a 12-agent gadget so that
    restoring it in the clone world costs nothing extra.
    """
    _sm_only(pair)
    p1, p2 = pair.profile_1, pair.profile_2
    if not (p1.is_strict and p2.is_strict):
        raise TiesUnsupported("clone insertion is implemented for strict lists only")
    bld = _Builder(pair)
    old = {a: _strict_ids(g) for a, g in bld.pref[0].items()}
    new = {a: _strict_ids(g) for a, g in bld.pref[1].items()}
    repl = {a for a in old if old[a] != new[a]}
    partner = {}
    for x, y in bld.matching:
        partner[x], partner[y] = y, x
    star = sorted(repl | {partner[a] for a in repl if a in partner})
    edges = sorted((a, partner[a]) for a in star if a.side == Side.LEFT and a in partner)

    binding, clone = {}, {}
    for a in star:
        binding[a] = bld.add(a.side.other, f"{bld.name(a)}.b")
        clone[a] = bld.add(a.side, f"{bld.name(a)}.c")

    def with_clones(lst):
        out = []
        for x in lst:
            if x in clone:
                out.append(clone[x])
            out.append(x)
        return out

    lists1 = {a: with_clones(old[a]) for a in old}
    lists2 = dict(lists1)
    for a in star:
        lists1[a] = [binding[a]] + lists1[a]
        lists2[a] = list(lists1[a])
        lists1[binding[a]], lists2[binding[a]] = [], [a]
        lists1[clone[a]], lists2[clone[a]] = [], with_clones(new[a])

    for m, w in edges:
        ids = {}
        for key, rel, _ in _GADGET:
            owner = m if key.startswith("m.") else w
            side = Side.LEFT if rel == "m" else Side.RIGHT
            ids[key] = bld.add(side, f"{bld.name(owner)}.{key[2:]}")
        ids["c_m"], ids["c_w"] = clone[m], clone[w]
        for key, _, lst in _GADGET:
            g = [ids[x] for x in lst]
            lists2[ids[key]] = g
            lists1[ids[key]] = g if key in ("m.rrm", "w.lm") else []
        # the clones' mutual edge is rerouted through the gadget ends
        lists2[clone[m]] = [ids["m.lm"] if x == clone[w] else x for x in lists2[clone[m]]]
        lists2[clone[w]] = [ids["w.rrm"] if x == clone[m] else x for x in lists2[clone[w]]]
        bld.match(ids["m.rrm"], ids["w.lm"])

    for a in lists1:
        bld.set(a, lists1[a], lists2[a])
    k_prime = pair.budget_k + len(star) + 7 * len(edges)
    return bld.build(pair, k_prime, ChangeType.REPLACE, ChangeType.ADD)


REDUCTIONS = {
    ChangeType.SWAP: reduce_swap_to_replace,
    ChangeType.REPLACE: reduce_replace_to_add,
    ChangeType.ADD: reduce_add_to_delete,
    ChangeType.DELETE: reduce_delete_to_swap,
}


def reduce_chain(pair: InstancePair, source: ChangeType, target: ChangeType) -> ReducedInstance:
    """Apply reductions around the cycle from ``source`` until ``target``.

    ``source == target`` walks the whole cycle once.
    """
    if source == ChangeType.MIXED or target == ChangeType.MIXED:
        raise WrongChangeType("mixed changes have no reduction")
    amap = {AgentId(s, j): AgentId(s, j) for s in Side for j in range(len(pair.profile_1.lists(s)))}
    gadgets = set()
    cur, kind = pair, source
    while True:
        red = REDUCTIONS[kind](cur)
        amap = {a: red.agent_map[b] for a, b in amap.items()}
        gadgets = {red.agent_map.get(g, g) for g in gadgets} | set(red.gadget_agents)
        cur, kind = red.pair, red.target
        if kind == target:
            break
    return ReducedInstance(cur, amap, frozenset(gadgets), cur.budget_k, source, target,
                           cur.budget_k - pair.budget_k)


# ---------------------------------------------------------------------------
# verification

@dataclass(frozen=True)
class VerificationRow:
    k: int
    k_prime: int
    original: bool
    reduced: bool

    @property
    def agrees(self) -> bool:
        return self.original == self.reduced


@dataclass(frozen=True)
class VerificationReport:
    rows: tuple
    original_min: int
    reduced_min: int

    @property
    def mismatches(self) -> list:
        return [r for r in self.rows if not r.agrees]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def verify_reduction(pair: InstancePair, reduced: ReducedInstance, k_sweep=range(7),
                     max_agents: int = 40) -> VerificationReport:
    """Compare oracle yes/no answers of both instances for every k in ``k_sweep``.

    The reduced budget for original budget k is ``k + reduced.offset``.
    Raises ``InstanceTooLarge`` when the reduced instance exceeds
    ``max_agents``; the oracle's pruning keeps the gadget-heavy instances
    of a few dozen agents tractable.
    """
    if reduced.pair.profile_2.n_agents > max_agents:
        raise InstanceTooLarge(f"reduced instance has {reduced.pair.profile_2.n_agents} agents")
    lo = oracle_ism(pair, max_agents=max_agents)
    lo_red = oracle_ism(reduced.pair, max_agents=max_agents)
    rows = tuple(VerificationRow(k, k + reduced.offset, lo <= k, lo_red <= k + reduced.offset)
                 for k in k_sweep)
    return VerificationReport(rows, lo, lo_red)
