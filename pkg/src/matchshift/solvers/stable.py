"""Deferred acceptance, the rotation poset and maximum-weight stable matchings."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

import numpy as np

from .. import _kernels as K
from ..core import Matching, PreferenceProfile, Side
from ..errors import TiesUnsupported


def require_strict_sm(profile: PreferenceProfile) -> None:
    if profile.mode != "sm":
        raise ValueError("this operation needs a one-to-one (SM) profile")
    if not profile.is_strict:
        raise TiesUnsupported("preference lists contain ties")


def gale_shapley_partners(profile: PreferenceProfile, proposing: Side = Side.LEFT):
    """``(left_partners, right_partners)`` arrays of the proposing-optimal matching."""
    require_strict_sm(profile)
    a = profile.arrays
    if proposing == Side.LEFT:
        return K.gale_shapley(a.lpref, a.llen, a.rrank)
    rp, lp = K.gale_shapley(a.rpref, a.rlen, a.lrank)
    return lp, rp


def gale_shapley(profile: PreferenceProfile, proposing: Side = Side.LEFT) -> Matching:
    """The proposing-side-optimal stable matching."""
    lp, _ = gale_shapley_partners(profile, proposing)
    return Matching.from_left_partners(lp)


class EdgeWeights(dict):
    """Weight per (left, right) pair; missing pairs weigh 0."""

    def __missing__(self, key):
        return 0


def _integer_weights(profile: PreferenceProfile, weights) -> np.ndarray:
    """Scale rational weights to an int64 matrix with the same argmax."""
    shape = (profile.n_left, profile.n_right)
    if isinstance(weights, np.ndarray):
        if weights.shape != shape:
            raise ValueError(f"weight matrix has shape {weights.shape}, expected {shape}")
        if np.issubdtype(weights.dtype, np.integer):
            return weights.astype(np.int64)
        items = {(int(i), int(j)): weights[i, j] for i, j in zip(*np.nonzero(weights))}
    else:
        items = dict(weights.items()) if isinstance(weights, Mapping) else dict(weights)
    fr = {}
    for key, v in items.items():
        if isinstance(v, float) and not math.isfinite(v):
            raise ValueError("edge weights must be finite")
        fr[key] = Fraction(v)
    scale = 1
    for v in fr.values():
        scale = scale * v.denominator // math.gcd(scale, v.denominator)
    out = np.zeros(shape, dtype=np.int64)
    for (m, w), v in fr.items():
        out[m, w] = int(v * scale)
    return out


@dataclass(frozen=True)
class Rotation:
    """A cyclic exchange: each ``cycle[i][0]`` moves to ``cycle[i+1][1]``."""
    cycle: tuple

    def weight_delta(self, weights) -> Fraction:
        """Change in total weight when this rotation is eliminated."""
        def look(m, w):
            if isinstance(weights, np.ndarray):
                return Fraction(int(weights[m, w])) if np.issubdtype(weights.dtype, np.integer) \
                    else Fraction(float(weights[m, w]))
            return Fraction(weights.get((m, w), 0))

        k = len(self.cycle)
        gain = sum(look(m, self.cycle[(i + 1) % k][1]) for i, (m, _) in enumerate(self.cycle))
        loss = sum(look(m, w) for m, w in self.cycle)
        return gain - loss


@dataclass(frozen=True)
class RotationPoset:
    """Rotations of a strict SM profile with their precedence arcs.

    ``precedence`` holds (before, after) index pairs; rotations are indexed
    in the order they were eliminated along one maximal chain, which is a
    linear extension of the order.
    """
    profile: PreferenceProfile = field(repr=False)
    rotations: tuple
    precedence: frozenset
    men_optimal: Matching
    women_optimal: Matching
    _offsets: np.ndarray = field(repr=False, compare=False)
    _men: np.ndarray = field(repr=False, compare=False)
    _women: np.ndarray = field(repr=False, compare=False)
    _src: np.ndarray = field(repr=False, compare=False)
    _dst: np.ndarray = field(repr=False, compare=False)

    def predecessors(self, r: int) -> set:
        return {a for a, b in self.precedence if b == r}

    def is_closed(self, subset) -> bool:
        s = set(subset)
        return all(a in s for a, b in self.precedence if b in s)

    def matching_for(self, subset) -> Matching:
        """Stable matching reached by eliminating a closed subset."""
        if not self.is_closed(subset):
            raise ValueError("subset is not closed under precedence")
        partner = dict(self.men_optimal.pairs)
        for r in sorted(subset):
            cyc = self.rotations[r].cycle
            for i, (m, _) in enumerate(cyc):
                partner[m] = cyc[(i + 1) % len(cyc)][1]
        return Matching(partner.items())

    def closed_subsets(self) -> Iterator[frozenset]:
        """All closed subsets (exponential; meant for small instances)."""
        preds = [self.predecessors(r) for r in range(len(self.rotations))]

        def rec(i, chosen):
            if i == len(self.rotations):
                yield frozenset(chosen)
                return
            yield from rec(i + 1, chosen)
            # predecessors always carry smaller indices, so they are decided already
            if preds[i] <= chosen:
                chosen.add(i)
                yield from rec(i + 1, chosen)
                chosen.discard(i)

        yield from rec(0, set())


def build_rotation_poset(profile: PreferenceProfile) -> RotationPoset:
    require_strict_sm(profile)
    a = profile.arrays
    m0, _ = K.gale_shapley(a.lpref, a.llen, a.rrank)
    _, mz = K.gale_shapley(a.rpref, a.rlen, a.lrank)
    offsets, men, women, status = K.rotation_chain(a.lpref, a.llen, a.lrank, a.rrank, m0, mz)
    if status != K.OK:
        raise RuntimeError("rotation chain did not reach the women-optimal matching")
    src, dst = K.precedence_edges(offsets, men, women, a.lpref, a.lrank, a.rrank, m0)
    rotations = tuple(
        Rotation(tuple((int(men[t]), int(women[t])) for t in range(offsets[r], offsets[r + 1])))
        for r in range(len(offsets) - 1))
    prec = frozenset((int(s), int(d)) for s, d in zip(src, dst))
    return RotationPoset(profile, rotations, prec, Matching.from_left_partners(m0),
                         Matching.from_left_partners(mz), offsets, men, women, src, dst)


def max_weight_stable_partners(profile: PreferenceProfile, weights, poset: RotationPoset | None = None):
    """Left partner array of a maximum-weight stable matching."""
    require_strict_sm(profile)
    wmat = _integer_weights(profile, weights)
    a = profile.arrays
    if poset is None:
        lp, status = K.max_weight_stable(a.lpref, a.llen, a.lrank, a.rpref, a.rlen, a.rrank, wmat)
        if status != K.OK:
            raise RuntimeError("rotation chain did not reach the women-optimal matching")
        return lp
    wts = K.rotation_weights(poset._offsets, poset._men, poset._women, wmat)
    sel = K.max_closure(wts, poset._src, poset._dst)
    newp = K.rotation_targets(poset._offsets, poset._women)
    lp = poset.men_optimal.left_partners(profile.n_left)
    for r in np.flatnonzero(sel):
        for t in range(poset._offsets[r], poset._offsets[r + 1]):
            lp[poset._men[t]] = newp[t]
    return lp


def max_weight_stable_matching(profile: PreferenceProfile, weights,
                               poset: RotationPoset | None = None) -> Matching:
    """A stable matching of maximum total weight.

    Among optimal matchings the one closest to the men-optimal matching is
    returned (the inclusion-minimal optimal set of eliminated rotations).
    ``weights`` is a mapping ``(left, right) -> rational`` or a dense matrix.
    """
    return Matching.from_left_partners(max_weight_stable_partners(profile, weights, poset))
