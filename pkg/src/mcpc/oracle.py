"""
Exact optimum by exhaustive search, plus LP cross-checks.

The search is exact, never approximate: when a size or node cap is hit it
raises instead of returning a bound. Costs and capacities are scaled to
integers by a common denominator so the inner loop avoids Fractions.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .clusters import effective_capacities
from .lp import LpStatus, build_joint_lp, build_mcpk_lp, solve_lp
from .model import Assignment, Instance, evaluate_assignment

DEFAULT_MAX_SETS = 12
DEFAULT_MAX_KNAPSACKS = 5
DEFAULT_NODE_LIMIT = 20_000_000


class OracleLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleLimits:
    max_sets: int = DEFAULT_MAX_SETS
    max_knapsacks: int = DEFAULT_MAX_KNAPSACKS
    node_limit: int = DEFAULT_NODE_LIMIT
    time_limit: Optional[float] = None  # seconds


@dataclass(frozen=True)
class OracleResult:
    opt_value: Fraction
    opt_assignment: Assignment
    nodes_explored: int
    time: float


def _common_scale(values) -> int:
    return math.lcm(*[Fraction(v).denominator for v in values]) if values else 1


def brute_force_opt(inst: Instance, limits: OracleLimits = OracleLimits()) -> OracleResult:
    """Depth-first search over every placement of every set.

    Sets are branched in order of non-increasing total member profit. A branch
    is cut when the profit still reachable cannot beat the incumbent; placing
    a set that covers nothing new is skipped since leaving it out dominates.
    """
    if inst.m > limits.max_sets or inst.p > limits.max_knapsacks:
        raise OracleLimitExceeded(
            f"instance has {inst.m} sets / {inst.p} knapsacks; caps are "
            f"{limits.max_sets} / {limits.max_knapsacks}"
        )
    start = time.perf_counter()
    cscale = _common_scale(
        [s.cost for s in inst.sets]
        + [k.capacity for k in inst.knapsacks]
        + [c.capacity for c in inst.clusters]
    )
    pscale = _common_scale([i.profit for i in inst.items])
    profit = [int(i.profit * pscale) for i in inst.items]
    cost = [int(s.cost * cscale) for s in inst.sets]
    kcap = [int(k.capacity * cscale) for k in inst.knapsacks]
    ccap = [int(c.capacity * cscale) for c in inst.clusters]
    kclus = [k.cluster_id for k in inst.knapsacks]
    masks = [sum(1 << i for i in s.members) for s in inst.sets]

    order = sorted(range(inst.m), key=lambda j: (-sum(profit[i] for i in inst.sets[j].members), j))
    # reach[d]: items coverable by sets order[d:]
    reach = [0] * (inst.m + 1)
    for d in range(inst.m - 1, -1, -1):
        reach[d] = reach[d + 1] | masks[order[d]]
    fits = [[k for k in range(inst.p) if cost[j] <= kcap[k]] for j in range(inst.m)]

    def value_of(mask: int) -> int:
        total, i = 0, 0
        while mask:
            if mask & 1:
                total += profit[i]
            mask >>= 1
            i += 1
        return total

    kres, cres = list(kcap), list(ccap)
    choice = [None] * inst.m
    best = [-1, None]
    nodes = [0]

    def dfs(d: int, covered: int, val: int) -> None:
        nodes[0] += 1
        if nodes[0] > limits.node_limit:
            raise OracleLimitExceeded(f"node limit {limits.node_limit} reached")
        if limits.time_limit is not None and nodes[0] % 4096 == 0:
            if time.perf_counter() - start > limits.time_limit:
                raise OracleLimitExceeded(f"time limit {limits.time_limit}s reached")
        if val > best[0]:
            best[0] = val
            best[1] = list(choice)
        if d == inst.m:
            return
        if val + value_of(reach[d] & ~covered) <= best[0]:
            return
        j = order[d]
        new = masks[j] & ~covered
        if new:
            gain = value_of(new)
            c = cost[j]
            for k in fits[j]:
                l = kclus[k]
                if c <= kres[k] and c <= cres[l]:
                    kres[k] -= c
                    cres[l] -= c
                    choice[j] = k
                    dfs(d + 1, covered | new, val + gain)
                    choice[j] = None
                    kres[k] += c
                    cres[l] += c
        dfs(d + 1, covered, val)

    dfs(0, 0, 0)
    a = Assignment.from_pairs((j, k) for j, k in enumerate(best[1]) if k is not None)
    value = evaluate_assignment(inst, a)
    if value * pscale != best[0]:
        raise RuntimeError("oracle bookkeeping mismatch")
    return OracleResult(value, a, nodes[0], time.perf_counter() - start)


# ---------------------------------------------------------------------------
# LP cross-checks
# ---------------------------------------------------------------------------

@dataclass
class CrossCheckReport:
    checks: dict = field(default_factory=dict)  # name -> (left, right)

    def record(self, name: str, left, right) -> None:
        self.checks[name] = (left, right)

    @property
    def ok(self) -> bool:
        return all(a == b for a, b in self.checks.values())

    def diff(self) -> list:
        return [f"{name}: {a} != {b}" for name, (a, b) in self.checks.items() if a != b]


def reduced_lp_value(inst: Instance) -> Fraction:
    sol = solve_lp(build_mcpk_lp(inst, effective_capacities(inst)))
    if sol.status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"reduced LP is {sol.status.value}")
    return sol.objective_value


def joint_lp_value(inst: Instance, fixings=None) -> Fraction:
    sol = solve_lp(build_joint_lp(inst, fixings))
    if sol.status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"joint LP is {sol.status.value}")
    return sol.objective_value


def lp_cross_check(inst: Instance, joint: bool = True, iterative: bool = False) -> CrossCheckReport:
    """Compare independently computed LP optima; every pair must agree exactly.

    * ``greedy_vs_simplex`` (knapsack-type instances): fractional greedy
      against the simplex on the same reduced-budget program.
    * ``joint_vs_reduced``: relaxation with free cluster split against the
      closed-form split.
    * ``iteration_<i>`` (with ``iterative``): after each rounding round, the
      joint relaxation with the rounded clusters pinned against the fixed
      profit plus the greedy value of the reduced instance. Skipped when
      no cluster is isolated.
    """
    from .mkpc import NoIsolatedCluster, greedy_lp, solve_mkpc_iterative

    report = CrossCheckReport()
    reduced = reduced_lp_value(inst)
    if inst.is_knapsack_type():
        report.record("greedy_vs_simplex", greedy_lp(inst).objective, reduced)
    if joint:
        report.record("joint_vs_reduced", joint_lp_value(inst), reduced)
    if iterative and inst.is_knapsack_type():
        try:
            iterations = solve_mkpc_iterative(inst).trace.iterations
        except NoIsolatedCluster:
            iterations = []
        for it in iterations:
            fixings = {}
            rounded_knaps = [
                k for l in it.rounded_clusters_so_far for k in inst.clusters[l].knapsack_ids
            ]
            placed = it.fixed_so_far.placement
            for k in rounded_knaps:
                for j in range(inst.m):
                    if inst.sets[j].cost <= inst.knapsacks[k].capacity:
                        fixings[(j, k)] = 1 if placed.get(j) == k else 0
            direct = joint_lp_value(inst, fixings)
            via_reduction = evaluate_assignment(inst, it.fixed_so_far) + it.next_lp_value
            report.record(f"iteration_{it.index}", direct, via_reduction)
    return report
