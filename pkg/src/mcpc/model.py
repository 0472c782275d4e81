"""
Domain types for maximum coverage with knapsack and cluster capacities.

Every number that enters the model is an exact :class:`fractions.Fraction`.
Instances are immutable; normalization returns a new instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Optional


class ValidationError(ValueError):
    """Raised when an instance or assignment is malformed.

    ``entity`` names the offending object, e.g. ``"set 3"``.
    """

    def __init__(self, message: str, entity: Optional[str] = None):
        super().__init__(message if entity is None else f"{entity}: {message}")
        self.entity = entity


class Kind(str, Enum):
    MCPC = "mcpc"
    MCPK = "mcpk"
    MKPC = "mkpc"
    MKP = "mkp"


# which declared kinds admit which detected structures
_GENERALIZES = {
    Kind.MCPC: {Kind.MCPC, Kind.MCPK, Kind.MKPC, Kind.MKP},
    Kind.MCPK: {Kind.MCPK, Kind.MKP},
    Kind.MKPC: {Kind.MKPC, Kind.MKP},
    Kind.MKP: {Kind.MKP},
}


@dataclass(frozen=True)
class Item:
    id: int
    profit: Fraction


@dataclass(frozen=True)
class CoverSet:
    id: int
    cost: Fraction
    members: frozenset


@dataclass(frozen=True)
class Knapsack:
    id: int
    capacity: Fraction
    cluster_id: int


@dataclass(frozen=True)
class Cluster:
    """A group of knapsacks sharing an aggregated capacity.

    ``knapsack_ids`` is kept in canonical order: non-increasing capacity,
    ties by ascending id. A ``redundant`` cluster has total knapsack
    capacity at most its own capacity, so its constraint never binds.
    """

    id: int
    capacity: Fraction
    knapsack_ids: tuple = ()
    redundant: bool = False


@dataclass(frozen=True)
class Instance:
    items: tuple
    sets: tuple
    knapsacks: tuple
    clusters: tuple
    kind: Optional[Kind] = None

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def m(self) -> int:
        return len(self.sets)

    @property
    def p(self) -> int:
        return len(self.knapsacks)

    @property
    def q(self) -> int:
        return len(self.clusters)

    def cluster_of(self, k: int) -> Cluster:
        return self.clusters[self.knapsacks[k].cluster_id]

    def canonical_knapsacks(self) -> list:
        """All knapsack ids by non-increasing capacity, ties by ascending id."""
        return sorted(range(self.p), key=lambda k: (-self.knapsacks[k].capacity, k))

    def sets_containing(self, i: int) -> list:
        return [s.id for s in self.sets if i in s.members]

    def set_profit(self, j: int) -> Fraction:
        """Total profit of the items in set ``j`` (its profit in MKP-type instances)."""
        return sum((self.items[i].profit for i in self.sets[j].members), Fraction(0))

    def is_knapsack_type(self) -> bool:
        return self.kind in (Kind.MKP, Kind.MKPC)

    def restrict(self, set_ids: Iterable[int], cluster_ids: Iterable[int]):
        """Sub-instance keeping the given sets and whole clusters.

        Ids are re-indexed densely. Returns ``(sub, set_map, knapsack_map,
        cluster_map)`` where each map sends a sub-instance id to the id in
        ``self``. Items are restricted to those covered by the kept sets.
        """
        set_ids = sorted(set(set_ids))
        cluster_ids = sorted(set(cluster_ids))
        item_ids = sorted({i for j in set_ids for i in self.sets[j].members})
        item_new = {i: n for n, i in enumerate(item_ids)}
        cluster_new = {l: n for n, l in enumerate(cluster_ids)}
        knap_ids = [k.id for k in self.knapsacks if k.cluster_id in cluster_new]
        knap_new = {k: n for n, k in enumerate(knap_ids)}

        items = tuple(Item(item_new[i], self.items[i].profit) for i in item_ids)
        sets = tuple(
            CoverSet(n, self.sets[j].cost, frozenset(item_new[i] for i in self.sets[j].members))
            for n, j in enumerate(set_ids)
        )
        knaps = tuple(
            Knapsack(knap_new[k], self.knapsacks[k].capacity, cluster_new[self.knapsacks[k].cluster_id])
            for k in knap_ids
        )
        clusters = tuple(
            Cluster(
                cluster_new[l],
                self.clusters[l].capacity,
                tuple(knap_new[k] for k in self.clusters[l].knapsack_ids),
                self.clusters[l].redundant,
            )
            for l in cluster_ids
        )
        sub = Instance(items, sets, knaps, clusters, _detect_kind(sets, clusters))
        return sub, dict(enumerate(set_ids)), dict(enumerate(knap_ids)), dict(enumerate(cluster_ids))


@dataclass(frozen=True)
class Assignment:
    """Map from set id to knapsack id; sets absent from ``placement`` are unassigned."""

    placement: Mapping = field(default_factory=dict)

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "Assignment":
        placement = {}
        for j, k in pairs:
            if j in placement:
                raise ValidationError("assigned more than once", f"set {j}")
            placement[j] = k
        return cls(dict(sorted(placement.items())))

    def get(self, j: int) -> Optional[int]:
        return self.placement.get(j)

    def assigned_sets(self) -> list:
        return sorted(self.placement)

    def sets_in(self, k: int) -> list:
        return sorted(j for j, kk in self.placement.items() if kk == k)

    def merged(self, other: "Assignment") -> "Assignment":
        return Assignment.from_pairs(list(self.placement.items()) + list(other.placement.items()))

    def __len__(self) -> int:
        return len(self.placement)


@dataclass(frozen=True)
class FractionalSolution:
    """Fractional ``x`` (and optionally ``z``) of a relaxation.

    ``x`` maps ``(set id, knapsack id)`` to a rational in (0, 1]; zero entries
    are omitted. ``z`` maps ``(knapsack id, cluster id)`` to a rational.
    """

    x: Mapping
    z: Mapping = field(default_factory=dict)

    def set_total(self, j: int) -> Fraction:
        return sum((v for (jj, _), v in self.x.items() if jj == j), Fraction(0))

    def implied_y(self, inst: Instance) -> dict:
        return implied_y(inst, self.x)


def implied_y(inst: Instance, x: Mapping) -> dict:
    """Optimal coverage variables ``y_i = min(1, sum of x over sets containing i)``."""
    totals = [Fraction(0)] * inst.m
    for (j, _), v in x.items():
        totals[j] += v
    y = {}
    for item in inst.items:
        s = sum((totals[j] for j in inst.sets_containing(item.id)), Fraction(0))
        y[item.id] = min(Fraction(1), s)
    return y


def knapsack_loads(inst: Instance, x: Mapping) -> list:
    loads = [Fraction(0)] * inst.p
    for (j, k), v in x.items():
        loads[k] += inst.sets[j].cost * v
    return loads


# ---------------------------------------------------------------------------
# validation and normalization
# ---------------------------------------------------------------------------

def _detect_kind(sets, clusters) -> Kind:
    singletons = all(len(s.members) == 1 for s in sets)
    distinct = len({next(iter(s.members)) for s in sets}) == len(sets) if singletons else False
    all_redundant = all(c.redundant for c in clusters)
    if singletons and distinct:
        return Kind.MKP if all_redundant else Kind.MKPC
    return Kind.MCPK if all_redundant else Kind.MCPC


def _check_dense(ids: list, what: str) -> None:
    seen = set()
    for i in ids:
        if i in seen:
            raise ValidationError("duplicate id", f"{what} {i}")
        seen.add(i)
    for pos, i in enumerate(sorted(ids)):
        if i != pos:
            raise ValidationError(f"ids must be 0..{len(ids) - 1}", f"{what} {i}")


def _check_positive(value, entity: str, name: str) -> None:
    if not isinstance(value, Fraction):
        raise ValidationError(f"{name} must be a rational", entity)
    if value <= 0:
        raise ValidationError(f"{name} must be positive, got {value}", entity)


def validate_and_normalize(raw: Instance) -> Instance:
    """Check a raw instance and bring it into the canonical form.

    Knapsack capacities above their cluster capacity are clamped to it, and
    every cluster whose knapsacks fit in its capacity altogether is flagged
    redundant. The structural kind is detected and checked against the
    declared one. Idempotent.
    """
    if not raw.knapsacks:
        raise ValidationError("instance has no knapsacks", "knapsacks")
    if not raw.clusters:
        raise ValidationError("instance has no clusters", "clusters")
    _check_dense([i.id for i in raw.items], "item")
    _check_dense([s.id for s in raw.sets], "set")
    _check_dense([k.id for k in raw.knapsacks], "knapsack")
    _check_dense([c.id for c in raw.clusters], "cluster")

    items = tuple(sorted(raw.items, key=lambda i: i.id))
    sets = tuple(sorted(raw.sets, key=lambda s: s.id))
    knaps = tuple(sorted(raw.knapsacks, key=lambda k: k.id))
    clusters = tuple(sorted(raw.clusters, key=lambda c: c.id))

    for it in items:
        _check_positive(it.profit, f"item {it.id}", "profit")
    for s in sets:
        _check_positive(s.cost, f"set {s.id}", "cost")
        if not s.members:
            raise ValidationError("set has no items", f"set {s.id}")
        for i in s.members:
            if not 0 <= i < len(items):
                raise ValidationError(f"unknown item {i}", f"set {s.id}")
    for c in clusters:
        _check_positive(c.capacity, f"cluster {c.id}", "capacity")
    for k in knaps:
        _check_positive(k.capacity, f"knapsack {k.id}", "capacity")
        if not 0 <= k.cluster_id < len(clusters):
            raise ValidationError(f"unknown cluster {k.cluster_id}", f"knapsack {k.id}")

    knaps = tuple(
        replace(k, capacity=min(k.capacity, clusters[k.cluster_id].capacity)) for k in knaps
    )
    new_clusters = []
    for c in clusters:
        members = sorted(
            (k for k in knaps if k.cluster_id == c.id), key=lambda k: (-k.capacity, k.id)
        )
        if not members:
            raise ValidationError("cluster has no knapsacks", f"cluster {c.id}")
        total = sum((k.capacity for k in members), Fraction(0))
        new_clusters.append(
            Cluster(c.id, c.capacity, tuple(k.id for k in members), total <= c.capacity)
        )
    clusters = tuple(new_clusters)

    kind = _detect_kind(sets, clusters)
    if raw.kind is not None and kind not in _GENERALIZES[Kind(raw.kind)]:
        raise ValidationError(
            f"declared kind {Kind(raw.kind).value} does not match structure ({kind.value})", "kind"
        )
    return Instance(items, sets, knaps, clusters, kind)


# ---------------------------------------------------------------------------
# objective and feasibility
# ---------------------------------------------------------------------------

def _check_assignment_ids(inst: Instance, a: Assignment) -> None:
    for j, k in a.placement.items():
        if not 0 <= j < inst.m:
            raise ValidationError("unknown set", f"set {j}")
        if k is not None and not 0 <= k < inst.p:
            raise ValidationError(f"unknown knapsack {k}", f"set {j}")


def covered_items(inst: Instance, a: Assignment) -> set:
    covered = set()
    for j, k in a.placement.items():
        if k is not None:
            covered |= inst.sets[j].members
    return covered


def evaluate_assignment(inst: Instance, a: Assignment) -> Fraction:
    """Total profit of distinct items covered by the assigned sets."""
    _check_assignment_ids(inst, a)
    return sum((inst.items[i].profit for i in covered_items(inst, a)), Fraction(0))


@dataclass(frozen=True)
class Violation:
    kind: str  # "knapsack", "cluster" or "oversize"
    entity: int
    load: Fraction
    capacity: Fraction

    def describe(self) -> str:
        if self.kind == "oversize":
            return f"set {self.entity} has cost {self.load} > capacity {self.capacity} of its knapsack"
        return f"{self.kind} {self.entity} load {self.load} exceeds capacity {self.capacity}"


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple = ()

    @property
    def feasible(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.feasible


def check_feasible(inst: Instance, a: Assignment) -> FeasibilityReport:
    """List every violated knapsack or cluster capacity; empty means feasible.

    Redundant clusters are still checked: their constraint holds trivially
    whenever all knapsack constraints do.
    """
    _check_assignment_ids(inst, a)
    out = []
    loads = [Fraction(0)] * inst.p
    for j, k in sorted(a.placement.items()):
        if k is None:
            continue
        cost = inst.sets[j].cost
        loads[k] += cost
        if cost > inst.knapsacks[k].capacity:
            out.append(Violation("oversize", j, cost, inst.knapsacks[k].capacity))
    for k, kn in enumerate(inst.knapsacks):
        if loads[k] > kn.capacity:
            out.append(Violation("knapsack", k, loads[k], kn.capacity))
    for c in inst.clusters:
        load = sum((loads[k] for k in c.knapsack_ids), Fraction(0))
        if load > c.capacity:
            out.append(Violation("cluster", c.id, load, c.capacity))
    return FeasibilityReport(tuple(out))


@dataclass(frozen=True)
class SolveResult:
    """An integral solution together with the evidence an algorithm produced.

    ``certificate`` holds plain values (rationals, strings, lists) and is what
    the CLI prints; ``trace`` carries intermediate objects for inspection.
    """

    assignment: Assignment
    value: Fraction
    certificate: dict = field(default_factory=dict)
    trace: object = None
