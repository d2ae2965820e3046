import pytest

from sldkit.errors import (
    ArityMismatch,
    MalformedMagnitude,
    UnknownQualifier,
    UnknownUnit,
)
from sldkit.units import (
    Quantity,
    parse_property_string,
    render_property_string,
)


def test_three_token_split():
    assert parse_property_string("100 MVA 3-ph", ("magnitude", "unit", "qualifier")) \
        == (100.0, "MVA", "3-ph")


def test_two_slot_schema():
    assert parse_property_string("13.8 kV", ("magnitude", "unit")) == (13.8, "kV")


def test_malformed_magnitude():
    with pytest.raises(MalformedMagnitude):
        parse_property_string("abc MVA", ("magnitude", "unit"))


def test_non_finite_magnitude_rejected():
    with pytest.raises(MalformedMagnitude):
        parse_property_string("inf MVA", ("magnitude", "unit"))


def test_unknown_unit():
    with pytest.raises(UnknownUnit):
        parse_property_string("5 parsec", ("magnitude", "unit"))


def test_unit_case_insensitive():
    assert parse_property_string("5 mva", ("magnitude", "unit")) == (5.0, "MVA")
    assert parse_property_string("2 OHM", ("magnitude", "unit")) == (2.0, "ohm")


def test_arity_mismatch():
    with pytest.raises(ArityMismatch):
        parse_property_string("100 MVA 3-ph extra", ("magnitude", "unit", "qualifier"))
    with pytest.raises(ArityMismatch):
        parse_property_string("100", ("magnitude", "unit"))


def test_optional_trailing_qualifier():
    schema = ("magnitude", "unit", "qualifier?")
    assert parse_property_string("100 MVA", schema) == (100.0, "MVA", None)
    assert parse_property_string("100 MVA 1-ph", schema) == (100.0, "MVA", "1-ph")


def test_unknown_qualifier():
    with pytest.raises(UnknownQualifier):
        parse_property_string("100 MVA 5-ph", ("magnitude", "unit", "qualifier"))


@pytest.mark.parametrize("tokens,schema", [
    ((100.0, "MVA", "3-ph"), ("magnitude", "unit", "qualifier")),
    ((13.8, "kV"), ("magnitude", "unit")),
    ((0.01938, 0.05917, "pu"), ("magnitude", "magnitude", "unit")),
    ((42.5, "ohm"), ("magnitude", "unit")),
    ((1e-3, "pu", "1-ph"), ("magnitude", "unit", "qualifier")),
])
def test_render_parse_round_trip(tokens, schema):
    assert parse_property_string(render_property_string(tokens), schema) == tokens


def test_quantity_si_scaling():
    assert Quantity(100, "MVA").si == 100e6
    assert Quantity(13.8, "kV").si == 13800.0
    assert Quantity(0.5, "pu").si == 0.5
    assert Quantity(0.5, "pu").is_per_unit


def test_quantity_render_round_trip():
    q = Quantity(13.8, "kV")
    parsed = parse_property_string(q.render(), ("magnitude", "unit"))
    assert Quantity(*parsed) == q
    q2 = Quantity(100, "MVA", "3-ph")
    parsed = parse_property_string(q2.render(), ("magnitude", "unit", "qualifier"))
    assert Quantity(*parsed) == q2
