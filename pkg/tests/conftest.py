import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from mcpc.generate import generate_instance
from mcpc.io import parse_instance
from mcpc.model import Cluster, CoverSet, Instance, Item, Knapsack, validate_and_normalize

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile(
    "repo", derandomize=True, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


def build(profits, sets, knapsacks, clusters, kind=None, normalize=True) -> Instance:
    """Compact constructor.

    ``sets`` is a list of ``(cost, members)``, ``knapsacks`` a list of
    ``(capacity, cluster)``, ``clusters`` a list of capacities.
    """
    F = Fraction
    raw = Instance(
        tuple(Item(i, F(p)) for i, p in enumerate(profits)),
        tuple(CoverSet(j, F(c), frozenset(m)) for j, (c, m) in enumerate(sets)),
        tuple(Knapsack(k, F(b), l) for k, (b, l) in enumerate(knapsacks)),
        tuple(Cluster(l, F(u)) for l, u in enumerate(clusters)),
        kind,
    )
    return validate_and_normalize(raw) if normalize else raw


def load_fixture(name: str) -> Instance:
    return parse_instance((FIXTURES / name).read_bytes())


@pytest.fixture
def e1() -> Instance:
    return load_fixture("e1.json")


def random_fractional(inst: Instance, rng: random.Random, denom: int = 12) -> dict:
    """Random x obeying set rows and knapsack budgets, over fitting pairs only."""
    x = {}
    for s in inst.sets:
        fits = [k.id for k in inst.knapsacks if s.cost <= k.capacity]
        budget = Fraction(rng.randint(0, denom), denom)
        for k in fits:
            if budget <= 0:
                break
            v = Fraction(rng.randint(0, denom), denom) * budget
            if v:
                x[(s.id, k)] = v
                budget -= v
    loads = {}
    for (j, k), v in x.items():
        loads[k] = loads.get(k, 0) + inst.sets[j].cost * v
    for (j, k) in list(x):
        cap = inst.knapsacks[k].capacity
        if loads[k] > cap:
            x[(j, k)] *= cap / loads[k]
    return x


def sized_instance(kind: str, seed: int, **extra) -> Instance:
    """Small instance with sizes drawn from the seed: n, m <= 6, p <= 4, q <= 2."""
    r = random.Random(seed * 7919 + 17)
    clustered = kind in ("mcpc", "mkpc")
    q = r.randint(1, 2)
    p = r.randint(2 * q if clustered else q, 4)
    m = r.randint(1, 6)
    n = m if kind in ("mkpc", "mkp") else r.randint(1, 6)
    extra.setdefault("tightness", Fraction(r.randint(1, 4), 4))
    extra.setdefault("cost_range", (1, r.choice([3, 5, 8])))
    return generate_instance(kind, n, m, p, q, seed=seed, **extra)


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def instances(draw, kind: str = "mcpc", **extra):
    return sized_instance(kind, draw(seeds), **extra)
