import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from matchshift.core import swap_distance
from matchshift.errors import DistanceOutOfRange, FractionOutOfRange
from matchshift.oracle import enumerate_stable_matchings
from matchshift.sampling import (
    MallowsParams,
    count_at_swap_distance,
    derive_seed,
    expected_swap_distance,
    mallows_from_norm_phi,
    sample_at_swap_distance,
    sample_identical_profile,
    sample_mallows,
    sample_uniform_profile,
)
from matchshift.solvers import gale_shapley


def dist(a, b):
    return swap_distance([(x,) for x in a], [(x,) for x in b])


def test_uniform_profile_basics():
    p = sample_uniform_profile(1, 1, 0)
    assert p.left == (((0,),),) and p.right == (((0,),),)
    assert sample_uniform_profile(4, 3, 9) == sample_uniform_profile(4, 3, 9)
    assert sample_uniform_profile(4, 3, 9) != sample_uniform_profile(4, 3, 10)


def test_uniform_profile_frequencies():
    counts = Counter()
    rng = np.random.default_rng(0)
    for _ in range(10000):
        p = sample_uniform_profile(3, 3, rng)
        for pl in p.left + p.right:
            counts[pl] += 1
    total = sum(counts.values())
    assert len(counts) == 6
    for c in counts.values():
        assert abs(c / total - 1 / 6) < 0.01


def test_identical_profile():
    for seed in range(20):
        n = 1 + seed % 5
        p = sample_identical_profile(n, seed)
        assert len(set(p.left)) == 1 and len(set(p.right)) == 1
        stable = enumerate_stable_matchings(p)
        assert len(stable) == 1
        men_order = [g[0] for g in p.right[0]]
        women_order = [g[0] for g in p.left[0]]
        assert stable[0] == gale_shapley(p)
        assert set(stable[0].pairs) == set(zip(men_order, women_order))


def test_expected_swap_distance_values():
    assert expected_swap_distance(0, 5) == 0
    assert expected_swap_distance(1, 3) == pytest.approx(1.5)
    for n in (2, 7, 30):
        assert expected_swap_distance(1, n) == pytest.approx(n * (n - 1) / 4)


@pytest.mark.parametrize("phi", [0.3, 0.7, 0.85, 0.9, 0.95])
def test_expected_swap_distance_matches_enumeration(phi):
    n = 5
    weights = {}
    for p in itertools.permutations(range(n)):
        weights[p] = phi ** dist(range(n), p)
    z = sum(weights.values())
    exact = sum(w * dist(range(n), p) for p, w in weights.items()) / z
    assert expected_swap_distance(phi, n) == pytest.approx(exact, rel=1e-9)


def test_norm_phi_inversion():
    assert mallows_from_norm_phi(1, 10).phi == 1
    assert mallows_from_norm_phi(0, 10).phi == 0
    for nphi in (0.1, 0.5, 0.9):
        p = mallows_from_norm_phi(nphi, 20)
        assert expected_swap_distance(p.phi, 20) == pytest.approx(nphi / 2 * 190, abs=1e-5)
    with pytest.raises(FractionOutOfRange):
        mallows_from_norm_phi(1.5, 3)


def test_mallows_mean_n10():
    params = mallows_from_norm_phi(0.5, 10)
    rng = np.random.default_rng(1)
    ds = [dist(range(10), sample_mallows(range(10), params, rng)) for _ in range(100000)]
    assert abs(np.mean(ds) - 11.25) < 0.15


def test_mallows_small_cases():
    rng = np.random.default_rng(2)
    assert sample_mallows([3, 1, 2], MallowsParams(0, 0.0, 3), rng) == [3, 1, 2]
    c = Counter(tuple(sample_mallows(range(3), MallowsParams(1, 1.0, 3), rng)) for _ in range(60000))
    assert len(c) == 6 and all(abs(v / 60000 - 1 / 6) < 0.01 for v in c.values())
    c2 = Counter(tuple(sample_mallows(range(2), MallowsParams(0, 0.5, 2), rng)) for _ in range(30000))
    assert abs(c2[(0, 1)] / 30000 - 2 / 3) < 0.01


@pytest.mark.parametrize("n", [5, 10, 25, 50])
@pytest.mark.parametrize("phi", [0.1, 0.5, 0.9])
def test_mallows_mean_within_three_standard_errors(n, phi):
    rng = np.random.default_rng(n * 100 + int(phi * 10))
    params = MallowsParams(0, phi, n)
    ds = np.array([dist(range(n), sample_mallows(range(n), params, rng)) for _ in range(2000)])
    se = ds.std(ddof=1) / np.sqrt(len(ds)) if ds.std() > 0 else 1e-12
    assert abs(ds.mean() - expected_swap_distance(phi, n)) <= 3 * se + 1e-9


def test_exact_distance_edges():
    base = [4, 2, 0, 1]
    assert sample_at_swap_distance(base, 0, 1) == base
    assert sample_at_swap_distance(base, 6, 1) == base[::-1]
    with pytest.raises(DistanceOutOfRange):
        sample_at_swap_distance(base, 7, 1)
    with pytest.raises(DistanceOutOfRange):
        sample_at_swap_distance(base, -1, 1)


def test_exact_distance_uniform_n3():
    rng = np.random.default_rng(3)
    c = Counter(tuple(sample_at_swap_distance([0, 1, 2], 1, rng)) for _ in range(20000))
    assert set(c) == {(1, 0, 2), (0, 2, 1)}
    assert all(abs(v / 20000 - 0.5) < 0.02 for v in c.values())


def test_counts_match_enumeration():
    for n in range(1, 7):
        by_d = Counter(dist(range(n), p) for p in itertools.permutations(range(n)))
        for d in range(n * (n - 1) // 2 + 1):
            assert count_at_swap_distance(n, d) == by_d[d]


@given(st.integers(1, 8), st.data())
def test_exact_distance_hits_d(n, data):
    d = data.draw(st.integers(0, n * (n - 1) // 2))
    seed = data.draw(st.integers(0, 2 ** 32 - 1))
    base = list(np.random.default_rng(seed).permutation(n))
    out = sample_at_swap_distance(base, d, seed)
    assert sorted(out) == sorted(base) and dist(base, out) == d


def test_exact_distance_large_counts():
    # counts overflow 64 bits long before n = 50
    assert count_at_swap_distance(50, 600) > 2 ** 64
    out = sample_at_swap_distance(list(range(50)), 600, 5)
    assert dist(range(50), out) == 600


def test_seed_derivation():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert len({derive_seed(1, i, j) for i in range(10) for j in range(10)}) == 100
    assert 0 <= derive_seed(7) < 2 ** 64
