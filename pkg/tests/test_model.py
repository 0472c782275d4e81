from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import build, instances
from mcpc.model import (
    Assignment,
    Kind,
    ValidationError,
    check_feasible,
    evaluate_assignment,
    validate_and_normalize,
)


def test_knapsack_capacity_is_clamped_to_cluster():
    inst = build([1], [(1, [0])], [(10, 0), (4, 0)], [7])
    assert [k.capacity for k in inst.knapsacks] == [7, 4]
    assert not inst.clusters[0].redundant


def test_cluster_with_room_for_everything_is_redundant():
    inst = build([1], [(1, [0])], [(5, 0), (4, 0)], [10])
    assert inst.clusters[0].redundant
    assert inst.kind is Kind.MKP


def test_canonical_knapsack_order_is_by_capacity_then_id():
    inst = build([1], [(1, [0])], [(3, 0), (5, 0), (3, 0), (4, 0)], [9])
    assert inst.clusters[0].knapsack_ids == (1, 3, 0, 2)


@pytest.mark.parametrize(
    "profits, sets, knapsacks, clusters, entity",
    [
        ([0], [(1, [0])], [(1, 0)], [1], "item 0"),
        ([1], [(-1, [0])], [(1, 0)], [1], "set 0"),
        ([1], [(1, [0])], [(0, 0)], [1], "knapsack 0"),
        ([1], [(1, [0])], [(1, 0)], [0], "cluster 0"),
        ([1], [(1, [3])], [(1, 0)], [1], "set 0"),
        ([1], [(1, [])], [(1, 0)], [1], "set 0"),
        ([1], [(1, [0])], [(1, 2)], [1], "knapsack 0"),
        ([1], [(1, [0])], [(1, 0)], [1, 2], "cluster 1"),
    ],
)
def test_invalid_instances_name_the_culprit(profits, sets, knapsacks, clusters, entity):
    with pytest.raises(ValidationError) as err:
        build(profits, sets, knapsacks, clusters)
    assert err.value.entity == entity


def test_declared_kind_must_match_structure():
    with pytest.raises(ValidationError):
        build([1, 1], [(1, [0, 1])], [(1, 0), (1, 0)], [1], kind=Kind.MKPC)
    # a knapsack-type instance is also a valid coverage instance
    inst = build([1], [(1, [0])], [(1, 0), (1, 0)], [1], kind=Kind.MCPC)
    assert inst.kind is Kind.MKPC


@given(instances("mcpc"))
def test_normalization_is_idempotent(inst):
    assert validate_and_normalize(inst) == inst


def test_empty_assignment_is_worth_nothing():
    inst = build([5], [(1, [0])], [(1, 0)], [1])
    assert evaluate_assignment(inst, Assignment()) == 0


def test_items_are_counted_once():
    inst = build([5], [(1, [0]), (1, [0])], [(1, 0), (1, 0)], [2])
    assert evaluate_assignment(inst, Assignment({0: 0, 1: 1})) == 5


def test_cluster_violation_is_reported():
    inst = build([1, 1], [(2, [0]), (2, [1])], [(2, 0), (2, 0)], [3])
    report = check_feasible(inst, Assignment({0: 0, 1: 1}))
    assert not report.feasible
    assert [(v.kind, v.entity, v.load, v.capacity) for v in report.violations] == [("cluster", 0, 4, 3)]


def test_knapsack_and_oversize_violations_are_reported():
    inst = build([1, 1, 1], [(2, [0]), (1, [1]), (3, [2])], [(2, 0), (2, 0)], [3])
    report = check_feasible(inst, Assignment({0: 0, 1: 0}))
    assert [v.kind for v in report.violations] == ["knapsack"]
    report = check_feasible(inst, Assignment({2: 1}))
    assert "oversize" in [v.kind for v in report.violations]


def test_nothing_assigned_is_feasible():
    inst = build([1], [(1, [0])], [(1, 0)], [1])
    assert check_feasible(inst, Assignment())


def test_assignment_rejects_unknown_ids_and_duplicates():
    inst = build([1], [(1, [0])], [(1, 0)], [1])
    with pytest.raises(ValidationError):
        check_feasible(inst, Assignment({3: 0}))
    with pytest.raises(ValidationError):
        Assignment.from_pairs([(0, 0), (0, 1)])


@given(instances("mcpc"), st.randoms(use_true_random=False))
def test_value_is_monotone_and_equals_union_profit(inst, rng):
    order = list(range(inst.m))
    rng.shuffle(order)
    placed, prev = {}, Fraction(0)
    for j in order:
        placed[j] = rng.randrange(inst.p)
        value = evaluate_assignment(inst, Assignment(dict(placed)))
        assert value >= prev
        prev = value
        mask = 0
        for jj in placed:
            for i in inst.sets[jj].members:
                mask |= 1 << i
        assert value == sum(it.profit for it in inst.items if mask >> it.id & 1)


def test_restrict_reindexes_and_maps_back():
    inst = build(
        [1, 2, 3], [(1, [0]), (1, [1]), (1, [2])],
        [(2, 0), (2, 0), (3, 1), (3, 1)], [3, 5],
    )
    sub, set_map, knap_map, cluster_map = inst.restrict([0, 2], [1])
    assert (sub.m, sub.p, sub.q, sub.n) == (2, 2, 1, 2)
    assert set_map == {0: 0, 1: 2}
    assert knap_map == {0: 2, 1: 3}
    assert cluster_map == {0: 1}
    assert [it.profit for it in sub.items] == [1, 3]
