"""
Pipage rounding for coverage with knapsack constraints.

Fractional solutions are plain dicts ``{(set id, knapsack id): Fraction}``
holding the nonzero entries. The pipeline is

1. solve the coverage LP exactly,
2. cancel cycles of the support graph (linear objective unchanged),
3. remove paths between two degree-one set nodes (product objective never
   decreases),
4. read off a matching that saturates every fractional set,

after which the integral part and the matched part are two feasible
integral candidates; the better one is returned.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .lp import build_mcpk_lp, extract_x, solve_lp, LpStatus
from .model import Assignment, Instance, SolveResult, check_feasible, evaluate_assignment

ZERO = Fraction(0)
ONE = Fraction(1)

S, K = "S", "K"


class PreconditionError(ValueError):
    """Input does not satisfy the structural precondition of an operation."""


class InvariantError(RuntimeError):
    """A property guaranteed by the analysis failed at runtime."""


# ---------------------------------------------------------------------------
# objectives
# ---------------------------------------------------------------------------

def _set_totals(inst: Instance, x: Mapping) -> list:
    totals = [ZERO] * inst.m
    for (j, _), v in x.items():
        totals[j] += v
    return totals


def evaluate_L(inst: Instance, x: Mapping) -> Fraction:
    """Linear coverage objective with the optimal implied ``y``."""
    totals = _set_totals(inst, x)
    out = ZERO
    for it in inst.items:
        cover = sum((totals[j] for j in inst.sets_containing(it.id)), ZERO)
        out += it.profit * min(ONE, cover)
    return out


def evaluate_F(inst: Instance, x: Mapping) -> Fraction:
    """Product-form objective ``sum_i p_i (1 - prod_{j ∋ i} (1 - sum_k x_jk))``."""
    totals = _set_totals(inst, x)
    out = ZERO
    for it in inst.items:
        prod = ONE
        for j in inst.sets_containing(it.id):
            prod *= ONE - totals[j]
        out += it.profit * (ONE - prod)
    return out


def is_integral(x: Mapping) -> bool:
    return all(v == ONE or v == ZERO for v in x.values())


# ---------------------------------------------------------------------------
# support graph
# ---------------------------------------------------------------------------

def _node_key(node):
    return (0 if node[0] == S else 1, node[1])


@dataclass(frozen=True)
class SupportGraph:
    """Bipartite graph of the strictly fractional entries of ``x``."""

    edges: frozenset  # of (j, k)
    s_nodes: frozenset = frozenset()
    k_nodes: frozenset = frozenset()

    def adjacency(self) -> dict:
        adj = {}
        for j, k in self.edges:
            adj.setdefault((S, j), set()).add((K, k))
            adj.setdefault((K, k), set()).add((S, j))
        return adj

    def components(self) -> list:
        """Connected components as sorted node lists, ordered by smallest node."""
        adj = self.adjacency()
        seen, comps = set(), []
        for start in sorted(adj, key=_node_key):
            if start in seen:
                continue
            comp, queue = [], deque([start])
            seen.add(start)
            while queue:
                u = queue.popleft()
                comp.append(u)
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        queue.append(v)
            comps.append(sorted(comp, key=_node_key))
        return comps

    def is_acyclic(self) -> bool:
        adj = self.adjacency()
        return all(
            sum(len(adj[u]) for u in comp) // 2 == len(comp) - 1 for comp in self.components()
        )

    def s_leaves(self) -> list:
        adj = self.adjacency()
        return sorted(u[1] for u in adj if u[0] == S and len(adj[u]) == 1)

    def has_ss_path(self) -> bool:
        return _first_ss_pair(self) is not None


def build_support_graph(x: Mapping) -> SupportGraph:
    edges = frozenset(e for e, v in x.items() if ZERO < v < ONE)
    return SupportGraph(
        edges, frozenset(j for j, _ in edges), frozenset(k for _, k in edges)
    )


def _find_cycle(adj: dict) -> Optional[list]:
    """First cycle met by DFS from the lowest node, as a node list."""
    visited = set()
    for start in sorted(adj, key=_node_key):
        if start in visited:
            continue
        visited.add(start)
        path, pos = [start], {start: 0}
        stack = [(start, None, iter(sorted(adj[start], key=_node_key)))]
        while stack:
            node, parent, it = stack[-1]
            for nb in it:
                if nb == parent:
                    continue
                if nb in pos:
                    return path[pos[nb]:]
                if nb in visited:
                    continue
                visited.add(nb)
                pos[nb] = len(path)
                path.append(nb)
                stack.append((nb, node, iter(sorted(adj[nb], key=_node_key))))
                break
            else:
                stack.pop()
                del pos[path.pop()]
    return None


def _edge(u, v) -> tuple:
    return (u[1], v[1]) if u[0] == S else (v[1], u[1])


@dataclass(frozen=True)
class PathAdjustment:
    """One pipage step along a cycle or an S-S path.

    ``m1`` holds the edges at even positions of ``node_sequence`` (raised by
    ``eps / c_j``), ``m2`` the others (lowered). For a cycle only ``eps`` is
    set; for a path ``eps1``/``eps2`` bound the feasible shift interval and
    ``eps`` is the endpoint that was taken.
    """

    node_sequence: tuple
    m1: tuple
    m2: tuple
    eps: Fraction
    eps1: Optional[Fraction] = None
    eps2: Optional[Fraction] = None


def _shift(inst: Instance, x: Mapping, m1, m2, eps: Fraction) -> dict:
    out = dict(x)
    for j, k in m1:
        out[(j, k)] = out.get((j, k), ZERO) + eps / inst.sets[j].cost
    for j, k in m2:
        out[(j, k)] = out.get((j, k), ZERO) - eps / inst.sets[j].cost
    return {e: v for e, v in out.items() if v}


def _split_matchings(nodes: list, closed: bool):
    n = len(nodes)
    steps = range(n) if closed else range(n - 1)
    edges = [_edge(nodes[i], nodes[(i + 1) % n]) for i in steps]
    return tuple(edges[0::2]), tuple(edges[1::2])


def eliminate_cycles(inst: Instance, x: Mapping, steps: Optional[list] = None) -> dict:
    """Cancel support-graph cycles, keeping every knapsack load and set total.

    Each step raises the even cycle edges by ``eps / c_j`` and lowers the odd
    ones, with ``eps`` the largest shift keeping all entries in [0, 1]; at
    least one edge becomes integral. Appends a :class:`PathAdjustment` per
    step to ``steps`` when given.
    """
    x = {e: v for e, v in x.items() if v}
    while True:
        g = build_support_graph(x)
        cycle = _find_cycle(g.adjacency())
        if cycle is None:
            return x
        m1, m2 = _split_matchings(cycle, closed=True)
        c = lambda j: inst.sets[j].cost  # noqa: E731
        eps = min(
            min(c(j) * (ONE - x[(j, k)]) for j, k in m1),
            min(c(j) * x[(j, k)] for j, k in m2),
        )
        x = _shift(inst, x, m1, m2, eps)
        if steps is not None:
            steps.append(PathAdjustment(tuple(cycle), m1, m2, eps))


def _first_ss_pair(g: SupportGraph):
    """Lowest pair of degree-one set nodes sharing a tree, or None."""
    leaves = set(g.s_leaves())
    for comp in g.components():
        found = [u for u in comp if u[0] == S and u[1] in leaves]
        if len(found) >= 2:
            return found[0], found[1]
    return None


def _tree_path(adj: dict, src, dst) -> list:
    parent = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            break
        for v in sorted(adj[u], key=_node_key):
            if v not in parent:
                parent[v] = u
                queue.append(v)
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    return path[::-1]


def eliminate_ss_paths(inst: Instance, x: Mapping, steps: Optional[list] = None) -> dict:
    """Remove every path joining two degree-one set nodes.

    Requires an acyclic support graph. Along such a path the product
    objective is convex in the shift, so the better of the two extreme
    shifts never lowers it; each step makes at least one path edge integral.
    """
    x = {e: v for e, v in x.items() if v}
    if not build_support_graph(x).is_acyclic():
        raise PreconditionError("support graph has a cycle")
    c = lambda j: inst.sets[j].cost  # noqa: E731
    while True:
        g = build_support_graph(x)
        pair = _first_ss_pair(g)
        if pair is None:
            return x
        path = _tree_path(g.adjacency(), *pair)
        m1, m2 = _split_matchings(path, closed=False)
        eps1 = min(
            min(c(j) * x[(j, k)] for j, k in m1),
            min(c(j) * (ONE - x[(j, k)]) for j, k in m2),
        )
        eps2 = min(
            min(c(j) * (ONE - x[(j, k)]) for j, k in m1),
            min(c(j) * x[(j, k)] for j, k in m2),
        )
        down = _shift(inst, x, m1, m2, -eps1)
        up = _shift(inst, x, m1, m2, eps2)
        if evaluate_F(inst, up) >= evaluate_F(inst, down):
            x, eps = up, eps2
        else:
            x, eps = down, -eps1
        if steps is not None:
            steps.append(PathAdjustment(tuple(path), m1, m2, eps, eps1, eps2))


# ---------------------------------------------------------------------------
# saturating matching
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Matching:
    pairs: frozenset  # of (j, k)

    def knapsack_of(self, j: int) -> Optional[int]:
        for jj, k in self.pairs:
            if jj == j:
                return k
        return None


def saturating_matching(g: SupportGraph) -> Matching:
    """Matching covering every set node of an acyclic graph without S-S paths.

    Each tree is rooted at its lowest knapsack node. Set nodes on the path
    from the unique set leaf (if any) to the root take their parent; all
    other set nodes take their lowest child.
    """
    adj = g.adjacency()
    pairs = set()
    for comp in g.components():
        n_edges = sum(len(adj[u]) for u in comp) // 2
        if n_edges != len(comp) - 1:
            raise PreconditionError("support graph is not a forest")
        leaves = [u for u in comp if u[0] == S and len(adj[u]) == 1]
        if len(leaves) > 1:
            raise PreconditionError(
                f"S-S path between sets {leaves[0][1]} and {leaves[1][1]}"
            )
        root = next(u for u in comp if u[0] == K)
        parent = {root: None}
        order = [root]
        for u in order:
            for v in sorted(adj[u], key=_node_key):
                if v not in parent:
                    parent[v] = u
                    order.append(v)
        on_path = set()
        if leaves:
            u = leaves[0]
            while u is not None:
                on_path.add(u)
                u = parent[u]
        for u in order:
            if u[0] != S:
                continue
            if u in on_path:
                pairs.add(_edge(u, parent[u]))
            else:
                children = sorted((v for v in adj[u] if parent.get(v) == u), key=_node_key)
                pairs.add(_edge(u, children[0]))
    return Matching(frozenset(pairs))


def check_saturating(g: SupportGraph, mt: Matching) -> bool:
    used_s = [j for j, _ in mt.pairs]
    used_k = [k for _, k in mt.pairs]
    return (
        mt.pairs <= g.edges
        and len(set(used_s)) == len(used_s)
        and len(set(used_k)) == len(used_k)
        and set(used_s) == set(g.s_nodes)
    )


# ---------------------------------------------------------------------------
# MCPK algorithm
# ---------------------------------------------------------------------------

@dataclass
class PipageTrace:
    x_lp: dict
    lp_value: Fraction
    x_acyclic: dict = field(default_factory=dict)
    x_final: dict = field(default_factory=dict)
    matching: Optional[Matching] = None
    cycle_steps: list = field(default_factory=list)
    path_steps: list = field(default_factory=list)
    candidates: dict = field(default_factory=dict)


def solve_relaxation(inst: Instance, effective_capacity: Optional[Mapping] = None):
    lp = build_mcpk_lp(inst, effective_capacity)
    sol = solve_lp(lp)
    if sol.status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"coverage LP is {sol.status.value}")
    return extract_x(sol), sol.objective_value


def bounded_split(inst: Instance, x: Mapping, lp_value: Fraction) -> PipageTrace:
    """Run cycle and path elimination on an LP optimum and match the rest."""
    trace = PipageTrace(dict(x), lp_value)
    trace.x_acyclic = eliminate_cycles(inst, x, trace.cycle_steps)
    trace.x_final = eliminate_ss_paths(inst, trace.x_acyclic, trace.path_steps)
    g = build_support_graph(trace.x_final)
    trace.matching = saturating_matching(g)
    if not check_saturating(g, trace.matching):
        raise InvariantError("matching does not saturate the fractional sets")
    return trace


def integral_part(x: Mapping) -> Assignment:
    return Assignment.from_pairs(sorted(e for e, v in x.items() if v == ONE))


def require_feasible(inst: Instance, a: Assignment, name: str, clusters: bool = True) -> Assignment:
    bad = [v for v in check_feasible(inst, a).violations if clusters or v.kind != "cluster"]
    if bad:
        raise InvariantError(f"candidate {name} infeasible: " + "; ".join(v.describe() for v in bad))
    return a


def safe_ratio(value: Fraction, lp_value: Fraction):
    return value / lp_value if lp_value else None


def solve_mcpk_alg1(inst: Instance, effective_capacity: Optional[Mapping] = None) -> SolveResult:
    """Better of the integral part and the matched part of a rounded LP optimum.

    ``effective_capacity`` defaults to the knapsack capacities, in which case
    every cluster must be redundant. When budgets are supplied the cluster
    constraints are not enforced here.
    """
    if effective_capacity is None:
        live = [c.id for c in inst.clusters if not c.redundant]
        if live:
            raise PreconditionError(
                f"clusters {live} constrain the instance; supply effective capacities"
            )
    x, lp_value = solve_relaxation(inst, effective_capacity)
    trace = bounded_split(inst, x, lp_value)
    # with explicit budgets the cluster constraints are the caller's concern
    strict = effective_capacity is None
    x1 = require_feasible(inst, integral_part(trace.x_final), "x1", strict)
    x2 = require_feasible(inst, Assignment.from_pairs(sorted(trace.matching.pairs)), "x2", strict)
    v1, v2 = evaluate_assignment(inst, x1), evaluate_assignment(inst, x2)
    trace.candidates = {"x1": x1, "x2": x2}
    chosen, a, value = ("x1", x1, v1) if v1 >= v2 else ("x2", x2, v2)
    cert = {
        "lp_value": lp_value,
        "candidates": {"x1": v1, "x2": v2},
        "chosen": chosen,
        "ratio_vs_lp": safe_ratio(value, lp_value),
    }
    return SolveResult(a, value, cert, trace)
