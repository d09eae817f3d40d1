import pytest
from hypothesis import given

from scottrank.notation import (
    Lim,
    Succ,
    Zero,
    fundamental_seq,
    kleene_code,
    notation_from_json,
    notation_from_ordinal,
    notation_to_json,
    notation_value,
)
from scottrank.ordinal import parse

from strategies import ordinals, small_limits


def test_zero_and_successors():
    assert notation_from_ordinal(parse("0")) == Zero()
    assert notation_from_ordinal(parse("2")) == Succ(Succ(Zero()))
    assert notation_value(Succ(Zero())) == parse("1")


def test_limits_carry_their_value():
    b = notation_from_ordinal(parse("w"))
    assert isinstance(b, Lim)
    assert notation_value(b) == parse("w")
    assert notation_value(notation_from_ordinal(parse("w^2"))) == parse("w^2")
    assert notation_value(notation_from_ordinal(parse("w*2+3"))) == parse("w*2+3")


def test_fundamental_members():
    assert fundamental_seq(notation_from_ordinal(parse("w")), 5) == notation_from_ordinal(parse("5"))
    assert notation_value(fundamental_seq(notation_from_ordinal(parse("w^2")), 3)) == parse("w*3")
    with pytest.raises(ValueError):
        fundamental_seq(Succ(Zero()), 0)


def test_lim_requires_a_limit():
    with pytest.raises(ValueError):
        Lim(parse("w+1"))


@given(small_limits())
def test_sequence_values_increase(lam):
    b = notation_from_ordinal(lam)
    vals = [notation_value(fundamental_seq(b, n)) for n in range(64)]
    assert all(x < y for x, y in zip(vals, vals[1:]))
    assert vals[-1] < lam


def test_kleene_codes_of_finite_notations():
    assert kleene_code(Zero()) == 1
    assert kleene_code(Succ(Zero())) == 2
    assert kleene_code(Succ(Succ(Zero()))) == 4
    with pytest.raises(ValueError):
        kleene_code(notation_from_ordinal(parse("w")))


@given(ordinals(max_terms=2))
def test_json_round_trip(a):
    b = notation_from_ordinal(a)
    assert notation_from_json(notation_to_json(b)) == b


def test_json_forms():
    assert notation_to_json(Zero()) == {"form": "zero"}
    assert notation_to_json(notation_from_ordinal(parse("w"))) == {"form": "lim", "ordinal": "w"}
