"""Seeded random instances for tests and experiments."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .model import Cluster, CoverSet, Instance, Item, Kind, Knapsack, validate_and_normalize


@dataclass(frozen=True)
class GeneratorParams:
    kind: Kind
    n: int
    m: int
    p: int
    q: int
    seed: int = 0
    cost_range: tuple = (1, 5)
    profit_range: tuple = (1, 9)
    tightness: Fraction = Fraction(1)
    disentangled: bool = False
    max_set_size: int = 3


def _check(params: GeneratorParams) -> None:
    kind = Kind(params.kind)
    if min(params.n, params.m, params.p, params.q) < 1:
        raise ValueError("n, m, p and q must be positive")
    if params.q > params.p:
        raise ValueError(f"q={params.q} clusters need at least as many knapsacks, got p={params.p}")
    if kind in (Kind.MCPC, Kind.MKPC) and params.p < 2 * params.q:
        raise ValueError("a non-redundant cluster needs at least two knapsacks; require p >= 2q")
    if kind in (Kind.MKP, Kind.MKPC) and params.n != params.m:
        raise ValueError("knapsack-type kinds have one item per set; require n == m")
    lo, hi = params.cost_range
    if not 1 <= lo <= hi:
        raise ValueError(f"bad cost range {params.cost_range}")
    lo, hi = params.profit_range
    if not 1 <= lo <= hi:
        raise ValueError(f"bad profit range {params.profit_range}")
    if not 0 < Fraction(params.tightness) <= 1:
        raise ValueError("tightness must lie in (0, 1]")


def _partition(rng: random.Random, p: int, q: int, minimum: int) -> list:
    sizes = [minimum] * q
    for _ in range(p - minimum * q):
        sizes[rng.randrange(q)] += 1
    return sizes


def _cluster_capacity(rng: random.Random, caps: list, tightness: Fraction) -> Fraction:
    top, total = max(caps), sum(caps)
    if total - top >= 2:
        u = Fraction(rng.randint(top + 1, total - 1))
    else:
        u = top + Fraction(total - top, 2)
    return top + tightness * (u - top)


def generate_instance(kind, n, m, p, q, seed=0, cost_range=(1, 5), profit_range=(1, 9),
                      tightness=1, disentangled=False, max_set_size=3) -> Instance:
    params = GeneratorParams(Kind(kind), n, m, p, q, seed, tuple(cost_range), tuple(profit_range),
                             Fraction(tightness), disentangled, max_set_size)
    return generate(params)


def generate(params: GeneratorParams) -> Instance:
    _check(params)
    kind = Kind(params.kind)
    rng = random.Random(params.seed)
    clustered = kind in (Kind.MCPC, Kind.MKPC)

    items = tuple(Item(i, Fraction(rng.randint(*params.profit_range))) for i in range(params.n))
    costs = [rng.randint(*params.cost_range) for _ in range(params.m)]
    if kind in (Kind.MKP, Kind.MKPC):
        members = [frozenset({j}) for j in range(params.m)]
    else:
        members = []
        for _ in range(params.m):
            size = rng.randint(1, min(params.max_set_size, params.n))
            members.append(frozenset(rng.sample(range(params.n), size)))
    sets = tuple(CoverSet(j, Fraction(costs[j]), members[j]) for j in range(params.m))

    # every knapsack holds at least the cheapest set
    cap_lo, cap_hi = min(costs), max(min(costs), 2 * params.cost_range[1])
    caps = [rng.randint(cap_lo, cap_hi) for _ in range(params.p)]
    sizes = _partition(rng, params.p, params.q, 2 if clustered else 1)
    if params.disentangled:
        caps.sort(reverse=True)
    else:
        rng.shuffle(caps)

    knapsacks, clusters, start = [], [], 0
    for l, size in enumerate(sizes):
        block = caps[start:start + size]
        if params.disentangled:
            # lift earlier blocks so bands never share a capacity
            block = [b + params.q - 1 - l for b in block]
        ids = tuple(range(start, start + size))
        knapsacks.extend(Knapsack(k, Fraction(b), l) for k, b in zip(ids, block))
        if clustered:
            u = _cluster_capacity(rng, block, params.tightness)
        else:
            u = Fraction(sum(block))
        clusters.append(Cluster(l, u))
        start += size

    return validate_and_normalize(Instance(items, sets, tuple(knapsacks), tuple(clusters), kind))
