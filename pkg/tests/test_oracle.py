import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import build, instances
from mcpc.model import Assignment, check_feasible, evaluate_assignment
from mcpc.oracle import OracleLimitExceeded, OracleLimits, brute_force_opt


def naive_opt(inst):
    best = Fraction(0)
    for choice in itertools.product([None, *range(inst.p)], repeat=inst.m):
        a = Assignment({j: k for j, k in enumerate(choice) if k is not None})
        if check_feasible(inst, a).feasible:
            best = max(best, evaluate_assignment(inst, a))
    return best


def test_e1_optimum(e1):
    res = brute_force_opt(e1)
    assert res.opt_value == 4
    assert check_feasible(e1, res.opt_assignment).feasible


@settings(max_examples=60)
@given(instances("mcpc"))
def test_search_agrees_with_full_enumeration(inst):
    if (inst.p + 1) ** inst.m > 20000:
        return
    res = brute_force_opt(inst)
    assert res.opt_value == naive_opt(inst)
    assert evaluate_assignment(inst, res.opt_assignment) == res.opt_value
    assert check_feasible(inst, res.opt_assignment).feasible


def test_fractional_data_is_scaled_exactly():
    inst = build(
        [Fraction(1, 3), Fraction(1, 2)], [(Fraction(3, 2), [0]), (Fraction(5, 3), [1])],
        [(Fraction(7, 4), 0), (Fraction(5, 3), 0)], [Fraction(10, 3)],
    )
    assert brute_force_opt(inst).opt_value == naive_opt(inst) == Fraction(5, 6)


def test_size_and_node_caps_raise():
    inst = build([1] * 13, [(1, [i]) for i in range(13)], [(1, 0)], [1])
    with pytest.raises(OracleLimitExceeded):
        brute_force_opt(inst)
    small = build([1, 1, 1], [(1, [0]), (1, [1]), (1, [2])], [(2, 0), (2, 0)], [3])
    with pytest.raises(OracleLimitExceeded):
        brute_force_opt(small, OracleLimits(node_limit=2))
