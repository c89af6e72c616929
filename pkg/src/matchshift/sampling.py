"""Random preference profiles: uniform, identical, Mallows, exact swap distance.

Every sampler takes a ``seed`` that is either an integer or a
``numpy.random.Generator``; an integer seeds a fresh PCG64 generator, so
results depend only on the inputs and the seed.

Seed derivation contract: the seed for sample ``(i, j, ...)`` under root
seed ``s`` is ``derive_seed(s, i, j, ...)``, the first 64-bit word that
``numpy.random.SeedSequence(s, spawn_key=(i, j, ...))`` generates.
"""
from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import PreferenceProfile, validate_and_normalize
from .errors import DistanceOutOfRange, FractionOutOfRange

PHI_TOLERANCE = 1e-9


def derive_seed(root: int, *indices: int) -> int:
    ss = np.random.SeedSequence(int(root), spawn_key=tuple(int(i) for i in indices))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(int(seed))


def sample_uniform_profile(n_left: int, n_right: int, seed) -> PreferenceProfile:
    if n_left < 1 or n_right < 1:
        raise ValueError("both sides need at least one agent")
    rng = as_generator(seed)
    left = rng.permuted(np.tile(np.arange(n_right), (n_left, 1)), axis=1)
    right = rng.permuted(np.tile(np.arange(n_left), (n_right, 1)), axis=1)
    return validate_and_normalize(left.tolist(), right.tolist())


def sample_identical_profile(n: int, seed) -> PreferenceProfile:
    """All men share one random order of the women, all women one of the men."""
    if n < 1:
        raise ValueError("need at least one agent per side")
    rng = as_generator(seed)
    over_women = rng.permutation(n).tolist()
    over_men = rng.permutation(n).tolist()
    return validate_and_normalize([over_women] * n, [over_men] * n)


# ---------------------------------------------------------------------------
# Mallows

def expected_swap_distance(phi: float, n: int) -> float:
    """Mean number of inversions of a Mallows(phi) order of n items."""
    if not 0 <= phi <= 1:
        raise FractionOutOfRange(f"phi={phi} outside [0, 1]")
    if phi == 0 or n < 2:
        return 0.0
    if phi == 1:
        return n * (n - 1) / 4
    if phi < 0.9:
        return n * phi / (1 - phi) - sum(i * phi ** i / (1 - phi ** i) for i in range(1, n + 1))
    # the closed form cancels badly near 1; sum the per-insertion means instead
    total = 0.0
    for i in range(1, n):
        w = phi ** np.arange(i + 1)
        total += float(np.arange(i + 1) @ w / w.sum())
    return total


@dataclass(frozen=True)
class MallowsParams:
    norm_phi: float
    phi: float
    n: int


def mallows_from_norm_phi(norm_phi: float, n: int) -> MallowsParams:
    """Find phi whose expected swap distance is ``norm_phi`` times half of all pairs."""
    if not 0 <= norm_phi <= 1:
        raise FractionOutOfRange(f"norm_phi={norm_phi} outside [0, 1]")
    if norm_phi in (0, 1) or n < 2:
        return MallowsParams(norm_phi, float(norm_phi), n)
    target = norm_phi / 2 * n * (n - 1) / 2
    lo, hi = 0.0, 1.0
    while hi - lo > PHI_TOLERANCE:
        mid = (lo + hi) / 2
        if expected_swap_distance(mid, n) < target:
            lo = mid
        else:
            hi = mid
    return MallowsParams(norm_phi, (lo + hi) / 2, n)


def _insert_from_right(items, offsets):
    """Insert ``items[i]`` with ``offsets[i]`` already-placed items to its right."""
    out = []
    for x, j in zip(items, offsets):
        out.insert(len(out) - int(j), x)
    return out


def mallows_offsets(n: int, phi: float, rng: np.random.Generator) -> np.ndarray:
    """Insertion offsets: offset i is truncated-geometric on 0..i with ratio phi."""
    i = np.arange(n)
    if phi <= 0:
        return np.zeros(n, dtype=np.int64)
    if phi >= 1:
        return np.floor(rng.random(n) * (i + 1)).astype(np.int64)
    u = rng.random(n)
    # inverse CDF of P(j) proportional to phi**j, j = 0..i
    j = np.floor(np.log1p(-u * (1 - phi ** (i + 1))) / math.log(phi)).astype(np.int64)
    return np.minimum(j, i)


def sample_mallows(central, params: MallowsParams, seed) -> list:
    rng = as_generator(seed)
    central = list(central)
    return _insert_from_right(central, mallows_offsets(len(central), params.phi, rng))


def sample_mallows_profile(n: int, norm_phi: float, seed) -> PreferenceProfile:
    """Each side draws one uniform central order; every agent perturbs it by Mallows."""
    rng = as_generator(seed)
    params = mallows_from_norm_phi(norm_phi, n)
    c_women = rng.permutation(n).tolist()
    c_men = rng.permutation(n).tolist()
    left = [sample_mallows(c_women, params, rng) for _ in range(n)]
    right = [sample_mallows(c_men, params, rng) for _ in range(n)]
    return validate_and_normalize(left, right)


# ---------------------------------------------------------------------------
# exact swap distance

@lru_cache(maxsize=64)
def _inversion_tables(n: int):
    """Prefix sums over inversion-vector counts.

    ``count[i][s]`` is the number of vectors (c_0..c_{i-1}) with c_j in 0..j
    summing to s.  Entry i of the result holds ``[0] + cumsum(count[i])``;
    the last element is the full count row for n components.
    """
    top = n * (n - 1) // 2
    row = [1] + [0] * top
    prefixes = []
    for i in range(n):
        pre = [0] * (top + 2)
        acc = 0
        for s in range(top + 1):
            acc += row[s]
            pre[s + 1] = acc
        prefixes.append(pre)
        # next row: sum of row[s - v] for v = 0..i
        row = [pre[s + 1] - pre[max(0, s - i)] for s in range(top + 1)]
    return prefixes, row


def count_at_swap_distance(n: int, d: int) -> int:
    """Number of orders of n items at swap distance exactly d from a fixed one."""
    if not 0 <= d <= n * (n - 1) // 2:
        return 0
    return _inversion_tables(n)[1][d]


def _randbelow(rng: np.random.Generator, bound: int) -> int:
    """Exact uniform integer in [0, bound) for arbitrarily large bound."""
    bits = max(1, (bound - 1).bit_length())
    nbytes = (bits + 7) // 8
    while True:
        x = int.from_bytes(rng.bytes(nbytes), "little") >> (8 * nbytes - bits)
        if x < bound:
            return x


def sample_at_swap_distance(base, d: int, seed) -> list:
    """Uniform random order at swap distance exactly ``d`` from ``base``.

    Draws one uniform rank among all inversion vectors summing to d and
    unranks it, last component first.
    """
    base = list(base)
    n = len(base)
    top = n * (n - 1) // 2
    if not 0 <= d <= top:
        raise DistanceOutOfRange(f"distance {d} outside 0..{top}")
    if d == 0 or n < 2:
        return base
    if d == top:
        return base[::-1]
    rng = as_generator(seed)
    prefixes, last = _inversion_tables(n)
    rank = _randbelow(rng, last[d])
    offsets = [0] * n
    s = d
    for i in range(n - 1, 0, -1):
        q = prefixes[i]
        # component i takes v in 0..i; block for v covers count[i][s - v]
        x = q[s + 1] - rank
        t = bisect_left(q, x, 0, s + 2) - 1  # largest t with q[t] < x
        v = s - t
        rank -= q[s + 1] - q[s - v + 1]
        offsets[i] = v
        s -= v
    return _insert_from_right(base, offsets)
