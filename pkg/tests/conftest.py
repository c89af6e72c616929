import random

import pytest
from hypothesis import HealthCheck, settings

from matchshift.core import InstancePair, Side, validate_and_normalize
from matchshift.solvers import gale_shapley

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_lists(rng, n_left, n_right, p=0.8):
    left = [[w for w in rng.sample(range(n_right), n_right) if rng.random() < p] for _ in range(n_left)]
    right = [[m for m in rng.sample(range(n_left), n_left) if rng.random() < p] for _ in range(n_right)]
    return left, right


def random_profile(rng, n, p=0.8):
    return validate_and_normalize(*random_lists(rng, n, n, p))


def perturbed(rng, profile, kind):
    """Strict lists of ``profile`` changed in one of a few random ways."""
    left = [[g[0] for g in pl] for pl in profile.left]
    right = [[g[0] for g in pl] for pl in profile.right]
    n_l, n_r = len(left), len(right)
    if kind == "delete":
        side, i = rng.randrange(2), rng.randrange(n_l)
        (left if side == 0 else right)[i] = []
    elif kind == "replace":
        side, i = rng.randrange(2), rng.randrange(n_l)
        lst = (left if side == 0 else right)[i]
        rng.shuffle(lst)
    elif kind == "swap":
        for _ in range(2):
            side, i = rng.randrange(2), rng.randrange(n_l)
            lst = (left if side == 0 else right)[i]
            if len(lst) > 1:
                j = rng.randrange(len(lst) - 1)
                lst[j], lst[j + 1] = lst[j + 1], lst[j]
    else:  # anything goes
        left, right = random_lists(rng, n_l, n_r)
    return validate_and_normalize(left, right)


def random_pair(rng, n, kind="random", k=0, b=0, p=0.8):
    p1 = random_profile(rng, n, p)
    p2 = perturbed(rng, p1, kind)
    m1 = gale_shapley(p1, Side.LEFT if rng.random() < 0.5 else Side.RIGHT)
    return InstancePair(p1, p2, m1, k, b)


def random_add_pair(rng, n, k=0):
    """P1 is P2 with one agent's list emptied."""
    p2 = random_profile(rng, n)
    left = [[g[0] for g in pl] for pl in p2.left]
    right = [[g[0] for g in pl] for pl in p2.right]
    (left if rng.random() < 0.5 else right)[rng.randrange(n)] = []
    p1 = validate_and_normalize(left, right)
    return InstancePair(p1, p2, gale_shapley(p1), k)


def random_hr_pair(rng, n_res, n_hosp):
    caps = [rng.randint(1, 2) for _ in range(n_hosp)]

    def prof():
        left, right = random_lists(rng, n_res, n_hosp)
        return validate_and_normalize(left, right, caps, mode="hr")
    from matchshift.solvers import resident_optimal
    p1, p2 = prof(), prof()
    return InstancePair(p1, p2, resident_optimal(p1))


@pytest.fixture
def rng():
    return random.Random(12345)
