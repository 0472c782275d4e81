import json
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given

from conftest import instances
from mcpc.io import (
    assignment_to_document,
    instance_from_document,
    parse_assignment,
    parse_instance,
    serialize_instance,
    to_rational,
)
from mcpc.model import Assignment, ValidationError

MINIMAL = {
    "items": [{"id": 0, "profit": 5}],
    "sets": [{"id": 0, "cost": 2, "items": [0]}],
    "knapsacks": [{"id": 0, "capacity": 4, "cluster": 0}],
    "clusters": [{"id": 0, "capacity": 7}],
}


def test_minimal_document_parses():
    inst = parse_instance(json.dumps(MINIMAL))
    assert (inst.n, inst.m, inst.p, inst.q) == (1, 1, 1, 1)
    assert inst.clusters[0].redundant


@pytest.mark.parametrize(
    "raw, expected",
    [
        (3, Fraction(3)),
        ("1/3", Fraction(1, 3)),
        ("0.1", Fraction(1, 10)),
        (Decimal("2.25"), Fraction(9, 4)),
        ("7", Fraction(7)),
    ],
)
def test_rationals_are_exact(raw, expected):
    assert to_rational(raw) == expected


def test_decimal_numbers_in_json_stay_exact():
    text = json.dumps(MINIMAL).replace('"cost": 2', '"cost": 0.1')
    assert parse_instance(text).sets[0].cost == Fraction(1, 10)


@pytest.mark.parametrize("raw", [True, 0.5, "nan", "inf", "1/0", "abc", None, [1]])
def test_bad_rationals_are_rejected(raw):
    with pytest.raises(ValidationError):
        to_rational(raw)


def test_non_finite_json_is_rejected():
    text = json.dumps(MINIMAL).replace('"profit": 5', '"profit": NaN')
    with pytest.raises(ValidationError):
        parse_instance(text)


def test_unknown_fields_are_rejected():
    doc = json.loads(json.dumps(MINIMAL))
    doc["items"][0]["weight"] = 1
    with pytest.raises(ValidationError):
        instance_from_document(doc)
    doc = json.loads(json.dumps(MINIMAL))
    doc["extra"] = []
    with pytest.raises(ValidationError):
        instance_from_document(doc)


def test_malformed_json_is_rejected():
    with pytest.raises(ValidationError):
        parse_instance("{not json")


@given(instances("mcpc"))
def test_round_trip_identity(inst):
    assert parse_instance(serialize_instance(inst)) == inst
    assert serialize_instance(parse_instance(serialize_instance(inst))) == serialize_instance(inst)


def test_assignment_document_round_trip(e1):
    a = Assignment({0: 1})
    doc = assignment_to_document(e1, a, Fraction(4))
    assert doc == {"assignment": {"0": 1, "1": None}, "value": "4"}
    back, value = parse_assignment(json.dumps(doc))
    assert back == a and value == 4
