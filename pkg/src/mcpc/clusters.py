"""
Reduction of cluster capacities to per-knapsack budgets.

Within a cluster, knapsacks in canonical order receive their full capacity
until the cluster capacity runs out; the knapsack where it runs out (the
critical one) gets the remainder and all later ones get nothing. With those
budgets fixed the problem is a plain knapsack-constrained coverage problem,
except that a set fractionally placed on a critical knapsack may not fit
its budget integrally. Matched sets on critical knapsacks therefore form a
candidate of their own.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import Assignment, Cluster, Instance, SolveResult, evaluate_assignment
from .pipage import InvariantError, require_feasible, safe_ratio, bounded_split, integral_part, solve_relaxation

ZERO = Fraction(0)


@dataclass(frozen=True)
class ClusterAnalysis:
    cluster_id: int
    critical_index: object  # knapsack id, or None for a redundant cluster
    z_star: dict  # knapsack id -> share of the cluster capacity
    effective_capacity: dict  # knapsack id -> reduced budget


def critical_knapsack(cluster: Cluster, knapsacks) -> int:
    """The knapsack where the canonical prefix sum of capacities first exceeds U."""
    if cluster.redundant:
        raise ValueError(f"cluster {cluster.id} is redundant and has no critical knapsack")
    prefix = ZERO
    for k in cluster.knapsack_ids:
        if prefix <= cluster.capacity < prefix + knapsacks[k].capacity:
            return k
        prefix += knapsacks[k].capacity
    raise ValueError(f"cluster {cluster.id}: capacities never exceed {cluster.capacity}")


def analyze_cluster(inst: Instance, cluster: Cluster) -> ClusterAnalysis:
    if cluster.redundant:
        eff = {k: inst.knapsacks[k].capacity for k in cluster.knapsack_ids}
        z = {k: inst.knapsacks[k].capacity / cluster.capacity for k in cluster.knapsack_ids}
        return ClusterAnalysis(cluster.id, None, z, eff)
    r = critical_knapsack(cluster, inst.knapsacks)
    U = cluster.capacity
    z, eff, used, seen_r = {}, {}, ZERO, False
    for k in cluster.knapsack_ids:
        B = inst.knapsacks[k].capacity
        if seen_r:
            z[k] = ZERO
        elif k == r:
            z[k] = 1 - used
            seen_r = True
        else:
            z[k] = B / U
            used += z[k]
        eff[k] = min(B, U * z[k])
    return ClusterAnalysis(cluster.id, r, z, eff)


def compute_z_star(inst: Instance) -> list:
    """One :class:`ClusterAnalysis` per cluster, in cluster order."""
    out = []
    for c in inst.clusters:
        a = analyze_cluster(inst, c)
        if not c.redundant:
            total = sum(a.z_star.values(), ZERO)
            if total != 1 or any(v < 0 for v in a.z_star.values()):
                raise InvariantError(f"cluster {c.id}: capacity split {a.z_star} is not a distribution")
        out.append(a)
    return out


def effective_capacities(inst: Instance) -> dict:
    eff = {}
    for a in compute_z_star(inst):
        eff.update(a.effective_capacity)
    return eff


def critical_set(inst: Instance) -> set:
    return {a.critical_index for a in compute_z_star(inst) if a.critical_index is not None}


def split_candidates(inst: Instance, x_final: dict, matching_pairs) -> dict:
    """Integral part plus the matched pairs on non-critical and critical knapsacks."""
    crit = critical_set(inst)
    matched = sorted(matching_pairs)
    return {
        "x1": integral_part(x_final),
        "x2": Assignment.from_pairs((j, k) for j, k in matched if k not in crit),
        "x3": Assignment.from_pairs((j, k) for j, k in matched if k in crit),
    }


def choose_best(inst: Instance, candidates: dict):
    """Feasibility-checked values of each candidate and the argmax (first wins ties)."""
    values = {}
    for name, a in candidates.items():
        require_feasible(inst, a, name)
        values[name] = evaluate_assignment(inst, a)
    best = max(values, key=lambda name: (values[name], -list(values).index(name)))
    return values, best


def solve_mcpc_alg2(inst: Instance) -> SolveResult:
    """Best of three integral candidates read off the reduced-budget relaxation.

    The relaxation uses the closed-form budgets, but a set may still be
    placed on any knapsack whose original capacity fits it.
    """
    eff = effective_capacities(inst)
    x, lp_value = solve_relaxation(inst, eff)
    trace = bounded_split(inst, x, lp_value)
    cands = split_candidates(inst, trace.x_final, trace.matching.pairs)
    values, best = choose_best(inst, cands)
    value = values[best]
    cert = {
        "lp_value": lp_value,
        "x1": values["x1"],
        "x2": values["x2"],
        "x3": values["x3"],
        "chosen": best,
        "ratio_vs_lp": safe_ratio(value, lp_value),
    }
    trace.candidates = cands
    return SolveResult(cands[best], value, cert, trace)
