"""
Algorithms for knapsack-type instances (every set covers one private item).

``greedy_lp`` solves the relaxation combinatorially: items are placed by
profit per unit cost into the smallest knapsack that can hold them, using the
reduced per-knapsack budgets. Its output already has the split structure the
pipage transformations produce, so the one-third algorithm reads candidates
off it directly. The iterative algorithm rounds one isolated cluster at a
time and re-solves the relaxation on what is left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .clusters import choose_best, effective_capacities, split_candidates
from .lp import build_mcpk_lp, solve_lp
from .model import Assignment, Instance, SolveResult, check_feasible, evaluate_assignment
from .pipage import (
    InvariantError,
    Matching,
    PreconditionError,
    build_support_graph,
    check_saturating,
    safe_ratio,
    saturating_matching,
)

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)
DEFAULT_POOL_LIMIT = 20
DEFAULT_ROUNDING_NODES = 2_000_000


class NoIsolatedCluster(RuntimeError):
    """No remaining cluster is isolated; the one-half guarantee does not apply."""

    def __init__(self, message: str, iteration: Optional[int] = None):
        super().__init__(message)
        self.iteration = iteration


@dataclass(frozen=True)
class GreedyAnnotation:
    x: dict  # (set, knapsack) -> fraction, nonzero entries only
    objective: Fraction
    effective_capacity: dict
    residual: dict  # knapsack -> effective capacity minus load
    split_items: frozenset
    unsplit_items: frozenset
    split_of: dict  # knapsack -> split set whose first host it is
    us_of: dict  # knapsack -> frozenset of sets placed there integrally
    first_host: dict  # split set -> knapsack it was placed in first
    matching: Matching

    def cluster_pool(self, inst: Instance, cluster_id: int) -> list:
        """Unsplit sets of the cluster plus the split sets it hosts first."""
        pool = set()
        for k in inst.clusters[cluster_id].knapsack_ids:
            pool |= self.us_of.get(k, frozenset())
            if k in self.split_of:
                pool.add(self.split_of[k])
        return sorted(pool)

    def cluster_profit(self, inst: Instance, cluster_id: int) -> Fraction:
        ks = set(inst.clusters[cluster_id].knapsack_ids)
        return sum((inst.set_profit(j) * v for (j, k), v in self.x.items() if k in ks), ZERO)


def _require_knapsack_type(inst: Instance) -> None:
    if not inst.is_knapsack_type():
        raise PreconditionError(f"expected a knapsack-type instance, got {inst.kind.value}")


def greedy_lp(inst: Instance, verify: bool = True) -> GreedyAnnotation:
    """Fractional greedy optimum of the reduced-budget relaxation.

    With ``verify`` the objective is compared against the simplex on the same
    program, and the support graph is checked for an S-saturating matching.
    """
    _require_knapsack_type(inst)
    eff = effective_capacities(inst)
    residual = {k.id: eff[k.id] for k in inst.knapsacks}
    order = sorted(range(inst.m), key=lambda j: (-inst.set_profit(j) / inst.sets[j].cost, j))
    x, first_host = {}, {}
    for j in order:
        c = inst.sets[j].cost
        holders = sorted(
            (k for k in inst.knapsacks if k.capacity >= c),
            key=lambda k: (k.capacity, -k.id),
        )
        left = ONE
        for k in holders:
            if left == 0:
                break
            if residual[k.id] <= 0:
                continue
            amount = min(left, residual[k.id] / c)
            x[(j, k.id)] = amount
            residual[k.id] -= amount * c
            left -= amount
            first_host.setdefault(j, k.id)

    unsplit = frozenset(j for (j, _), v in x.items() if v == ONE)
    split = frozenset(j for j, _ in x) - unsplit
    us_of = {}
    for (j, k), v in sorted(x.items()):
        if v == ONE:
            us_of[k] = us_of.get(k, frozenset()) | {j}
    split_of = {}
    for j in sorted(split):
        k = first_host[j]
        if k in split_of:
            raise InvariantError(f"knapsack {k} is the first host of split sets {split_of[k]} and {j}")
        split_of[k] = j
    if any(r < 0 for r in residual.values()):
        raise InvariantError("greedy exceeded a knapsack budget")

    objective = sum((inst.set_profit(j) * v for (j, _), v in x.items()), ZERO)
    g = build_support_graph(x)
    matching = saturating_matching(g)
    if verify:
        if not check_saturating(g, matching):
            raise InvariantError("greedy support graph has no saturating matching")
        lp_opt = solve_lp(build_mcpk_lp(inst, eff)).objective_value
        if lp_opt != objective:
            raise InvariantError(f"greedy objective {objective} differs from LP optimum {lp_opt}")
    return GreedyAnnotation(
        x, objective, eff, residual, split, unsplit,
        split_of, us_of, {j: first_host[j] for j in split}, matching,
    )


def solve_mkpc_third(inst: Instance) -> SolveResult:
    g = greedy_lp(inst)
    cands = split_candidates(inst, g.x, g.matching.pairs)
    values, best = choose_best(inst, cands)
    value = values[best]
    cert = {
        "lp_value": g.objective,
        "x1": values["x1"],
        "x2": values["x2"],
        "x3": values["x3"],
        "chosen": best,
        "ratio_vs_lp": safe_ratio(value, g.objective),
    }
    return SolveResult(cands[best], value, cert, g)


# ---------------------------------------------------------------------------
# Isolation
# ---------------------------------------------------------------------------

def is_isolated(inst: Instance, g: GreedyAnnotation, cluster_id: int) -> bool:
    mine = set(inst.clusters[cluster_id].knapsack_ids)
    for other in inst.clusters:
        if other.id == cluster_id:
            continue
        for j in g.cluster_pool(inst, other.id):
            if any(g.x.get((j, k), 0) > 0 for k in mine):
                return False
    return True


def find_isolated_cluster(inst: Instance, g: GreedyAnnotation, candidates: Optional[Iterable[int]] = None) -> int:
    ids = sorted(candidates) if candidates is not None else [c.id for c in inst.clusters]
    for l in ids:
        if is_isolated(inst, g, l):
            return l
    raise NoIsolatedCluster(f"none of clusters {ids} is isolated")


def detect_disentangled(inst: Instance, strict: bool = False) -> Optional[tuple]:
    """Cluster order with non-increasing capacity bands, or None if bands interleave.

    With ``strict`` adjacent bands may not share a capacity. Shared
    capacities let the greedy tie rule split an item across two clusters in
    both directions, so only strict bands certify isolation.
    """
    bands = []
    for c in inst.clusters:
        caps = [inst.knapsacks[k].capacity for k in c.knapsack_ids]
        bands.append((min(caps), max(caps), c.id))
    bands.sort(key=lambda b: (-b[0], -b[1], b[2]))
    for i, (lo, _, _) in enumerate(bands):
        if any(lo < hi or (strict and lo == hi) for _, hi, _ in bands[i + 1:]):
            return None
    return tuple(b[2] for b in bands)


# ---------------------------------------------------------------------------
# Rounding one cluster
# ---------------------------------------------------------------------------

def round_cluster(
    inst: Instance,
    g: GreedyAnnotation,
    cluster_id: int,
    pool_limit: int = DEFAULT_POOL_LIMIT,
    node_limit: int = DEFAULT_ROUNDING_NODES,
) -> Assignment:
    """Most profitable feasible placement of the cluster's pool into its knapsacks.

    Only placements whose fractional weight in the cluster reaches half the
    cluster's fractional profit are admitted. Such a placement always exists
    for an isolated cluster, and the best one is found by exhaustive search.
    """
    pool = g.cluster_pool(inst, cluster_id)
    if len(pool) > pool_limit:
        raise PreconditionError(f"cluster {cluster_id} pool has {len(pool)} sets; limit is {pool_limit}")
    cluster = inst.clusters[cluster_id]
    knaps = list(cluster.knapsack_ids)
    frac_profit = g.cluster_profit(inst, cluster_id)
    weight = {j: sum((g.x.get((j, k), ZERO) for k in knaps), ZERO) for j in pool}

    scale = math.lcm(
        *(inst.sets[j].cost.denominator for j in pool),
        *(inst.knapsacks[k].capacity.denominator for k in knaps),
        cluster.capacity.denominator,
    )
    cost = {j: int(inst.sets[j].cost * scale) for j in pool}
    kres = {k: int(inst.knapsacks[k].capacity * scale) for k in knaps}
    cres = [int(cluster.capacity * scale)]
    profit = {j: inst.set_profit(j) for j in pool}
    mid = {j: profit[j] * weight[j] for j in pool}
    need = frac_profit / 2

    order = sorted(pool, key=lambda j: (-profit[j], j))
    rest_profit = [ZERO] * (len(order) + 1)
    rest_mid = [ZERO] * (len(order) + 1)
    for d in range(len(order) - 1, -1, -1):
        rest_profit[d] = rest_profit[d + 1] + profit[order[d]]
        rest_mid[d] = rest_mid[d + 1] + mid[order[d]]

    best = [None, None]  # profit, placement
    choice = {}
    nodes = [0]

    def dfs(d: int, gained: Fraction, reached: Fraction) -> None:
        nodes[0] += 1
        if nodes[0] > node_limit:
            raise PreconditionError(f"rounding search for cluster {cluster_id} exceeded {node_limit} nodes")
        if reached + rest_mid[d] < need:
            return
        if best[0] is not None and gained + rest_profit[d] <= best[0]:
            return
        if d == len(order):
            best[0], best[1] = gained, dict(choice)
            return
        j = order[d]
        c = cost[j]
        tried = set()
        for k in knaps:
            # knapsacks with equal capacity and residual are interchangeable
            key = (inst.knapsacks[k].capacity, kres[k])
            if key in tried or c > kres[k] or c > cres[0] or inst.sets[j].cost > inst.knapsacks[k].capacity:
                continue
            tried.add(key)
            kres[k] -= c
            cres[0] -= c
            choice[j] = k
            dfs(d + 1, gained + profit[j], reached + mid[j])
            del choice[j]
            kres[k] += c
            cres[0] += c
        dfs(d + 1, gained, reached)

    dfs(0, ZERO, ZERO)
    if best[1] is None:
        raise InvariantError(f"cluster {cluster_id}: no placement recovers half its fractional profit")
    sigma = Assignment.from_pairs(sorted(best[1].items()))
    _check_rounding(inst, g, cluster_id, sigma, frac_profit)
    return sigma


def _weighted_profit(inst: Instance, g: GreedyAnnotation, cluster_id: int, sigma: Assignment) -> Fraction:
    knaps = inst.clusters[cluster_id].knapsack_ids
    return sum(
        (inst.set_profit(j) * g.x.get((j, k), ZERO) for j in sigma.assigned_sets() for k in knaps), ZERO
    )


def _check_rounding(inst, g, cluster_id, sigma, frac_profit) -> None:
    if not check_feasible(inst, sigma).feasible:
        raise InvariantError(f"cluster {cluster_id}: rounded placement is infeasible")
    profit = sum((inst.set_profit(j) for j in sigma.assigned_sets()), ZERO)
    middle = _weighted_profit(inst, g, cluster_id, sigma)
    if not profit >= middle >= frac_profit / 2:
        raise InvariantError(
            f"cluster {cluster_id}: rounding bound fails ({profit} >= {middle} >= {frac_profit}/2)"
        )


# ---------------------------------------------------------------------------
# Iterative rounding
# ---------------------------------------------------------------------------

@dataclass
class IterationRecord:
    index: int
    cluster: int  # original cluster id
    lp_value: Fraction  # relaxation value of the instance rounded in this step
    fractional_profit: Fraction  # cluster profit in that relaxation
    original_fractional_profit: Fraction  # cluster profit in the first relaxation
    rounded_profit: Fraction
    rounded_fractional_profit: Fraction  # fractional profit of the rounded sets in the cluster
    fixed_profit: Fraction  # cumulative, on the original instance
    original_half: Fraction  # half the cumulative original cluster profit
    rounded_clusters_so_far: tuple
    fixed_so_far: Assignment
    next_lp_value: Fraction = ZERO

    @property
    def cumulative_holds(self) -> bool:
        return self.fixed_profit >= self.original_half

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "cluster": self.cluster,
            "lp_value": self.lp_value,
            "fractional_profit": self.fractional_profit,
            "original_fractional_profit": self.original_fractional_profit,
            "rounded_profit": self.rounded_profit,
            "rounded_fractional_profit": self.rounded_fractional_profit,
            "fixed_profit": self.fixed_profit,
            "original_half": self.original_half,
            "cumulative_holds": self.cumulative_holds,
        }


@dataclass
class IterationState:
    remaining_instance: Instance
    fixed_assignment: Assignment = field(default_factory=Assignment)
    rounded_clusters: list = field(default_factory=list)
    iterations: list = field(default_factory=list)


def solve_mkpc_iterative(inst: Instance) -> SolveResult:
    """Round isolated clusters one at a time, re-solving the relaxation in between.

    Fixing a rounded cluster's variables detaches it from the rest of the
    program, so each round works on the instance without the rounded clusters
    and without the sets already placed.
    """
    _require_knapsack_type(inst)
    original = greedy_lp(inst)
    state = IterationState(inst)
    remaining_sets = set(range(inst.m))
    remaining_clusters = set(range(inst.q))
    original_total = ZERO

    for i in range(1, inst.q + 1):
        sub, set_map, knap_map, cluster_map = inst.restrict(remaining_sets, remaining_clusters)
        g = greedy_lp(sub)
        if state.iterations:
            state.iterations[-1].next_lp_value = g.objective
        try:
            local = find_isolated_cluster(sub, g)
        except NoIsolatedCluster as exc:
            raise NoIsolatedCluster(f"iteration {i}: {exc}", iteration=i) from None
        sigma_local = round_cluster(sub, g, local)
        sigma = Assignment.from_pairs(
            (set_map[j], knap_map[k]) for j, k in sigma_local.placement.items()
        )
        cluster = cluster_map[local]
        state.fixed_assignment = state.fixed_assignment.merged(sigma)
        state.rounded_clusters.append(cluster)
        state.remaining_instance = sub
        remaining_clusters.discard(cluster)
        remaining_sets -= set(sigma.placement)
        original_total += original.cluster_profit(inst, cluster)
        state.iterations.append(IterationRecord(
            index=i,
            cluster=cluster,
            lp_value=g.objective,
            fractional_profit=g.cluster_profit(sub, local),
            original_fractional_profit=original.cluster_profit(inst, cluster),
            rounded_profit=evaluate_assignment(inst, sigma),
            rounded_fractional_profit=_weighted_profit(sub, g, local, sigma_local),
            fixed_profit=evaluate_assignment(inst, state.fixed_assignment),
            original_half=original_total / 2,
            rounded_clusters_so_far=tuple(state.rounded_clusters),
            fixed_so_far=state.fixed_assignment,
        ))
        report = check_feasible(inst, state.fixed_assignment)
        if not report.feasible:
            raise InvariantError(f"iteration {i}: fixed assignment infeasible on the original instance")

    state.remaining_instance = inst.restrict(remaining_sets, remaining_clusters)[0]
    value = evaluate_assignment(inst, state.fixed_assignment)
    cert = {
        "lp_value": original.objective,
        "iterations": [r.as_dict() for r in state.iterations],
        "final": value,
        "ratio_vs_lp": safe_ratio(value, original.objective),
        "disentangled": detect_disentangled(inst, strict=True) is not None,
    }
    return SolveResult(state.fixed_assignment, value, cert, state)
