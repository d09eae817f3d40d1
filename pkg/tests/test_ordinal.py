import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scottrank.notation import notation_from_ordinal, notation_value
from scottrank.ordinal import (
    INF,
    OMEGA,
    MalformedDescription,
    Ordinal,
    RankSetDescription,
    Tail,
    cnf_add,
    cnf_cmp,
    cnf_mul,
    omega_pow,
    order_type_of_finite_described_set,
    parse,
    parse_rank,
    rank_ge,
)

from strategies import ordinals, small_limits

W = parse


@pytest.mark.parametrize("a,b,want", [
    ("w", "w", 0),
    ("w*2+1", "w*3", -1),
    ("w^w", "w^3*5+w", 1),
    ("0", "1", -1),
    ("w^2", "w*100+7", 1),
])
def test_cnf_cmp_examples(a, b, want):
    assert cnf_cmp(W(a), W(b)) == want


@pytest.mark.parametrize("a,b,want", [
    ("1", "w", "w"),
    ("w", "1", "w+1"),
    ("w^2+w*2", "w*3+1", "w^2+w*5+1"),
    ("w*3+2", "w^2", "w^2"),
])
def test_cnf_add_examples(a, b, want):
    assert cnf_add(W(a), W(b)) == W(want)


@pytest.mark.parametrize("a,b,want", [
    ("w", "0", "0"),
    ("w", "3", "w*3"),
    ("w", "w", "w^2"),
    ("w+1", "2", "w*2+1"),
    ("2", "w", "w"),
])
def test_cnf_mul_examples(a, b, want):
    assert cnf_mul(W(a), W(b)) == W(want)


@pytest.mark.parametrize("a,want", [("0", "1"), ("1", "w"), ("w", "w^w")])
def test_omega_pow_examples(a, want):
    assert omega_pow(W(a)) == W(want)


@pytest.mark.parametrize("text", ["0", "7", "w", "w^2*3+w+4", "w^w+w^3", "w^(w+1)*2+5"])
def test_parse_print_round_trip(text):
    assert str(W(text)) == text


def test_parse_normalises():
    assert str(W("3+w")) == "w"
    assert str(W("w*2*w")) == "w^2"


@pytest.mark.parametrize("bad", ["", "w+", "x", "w^^2", "(w"])
def test_parse_rejects_garbage(bad):
    with pytest.raises(ValueError):
        W(bad)


def test_constructor_enforces_canonical_form():
    one = Ordinal.of(1)
    with pytest.raises(ValueError):
        Ordinal([(Ordinal.of(0), 1), (one, 1)])
    with pytest.raises(ValueError):
        Ordinal([(one, 0)])


def test_infinite_rank_sits_above_every_ordinal():
    assert parse_rank("inf") is INF
    assert rank_ge(INF, W("w^w"))
    assert not rank_ge(W("w*2"), W("w*2+1"))
    assert INF > W("w^w") and not INF < W("0")


@given(ordinals(), ordinals(), ordinals())
def test_addition_is_associative(a, b, c):
    assert cnf_add(cnf_add(a, b), c) == cnf_add(a, cnf_add(b, c))


@given(ordinals(), ordinals(), ordinals())
def test_multiplication_distributes_on_the_left(a, b, c):
    assert cnf_mul(a, cnf_add(b, c)) == cnf_add(cnf_mul(a, b), cnf_mul(a, c))


@given(ordinals(), ordinals())
def test_adding_never_decreases(a, b):
    s = cnf_add(a, b)
    assert cnf_cmp(s, a) != -1
    assert (s == a) == (b.is_zero())


@given(ordinals(), ordinals())
def test_comparison_is_antisymmetric(a, b):
    assert cnf_cmp(a, b) == -cnf_cmp(b, a)
    assert (cnf_cmp(a, b) == 0) == (a == b)


@given(ordinals())
def test_text_round_trip(a):
    assert W(str(a)) == a


@given(ordinals(max_terms=2))
def test_notation_round_trip(a):
    assert notation_value(notation_from_ordinal(a)) == a


def test_notation_round_trip_on_grid():
    for e in range(4):
        for c in range(1, 4):
            for k in range(3):
                a = cnf_add(cnf_mul(omega_pow(Ordinal.of(e)), Ordinal.of(c)), Ordinal.of(k))
                assert notation_value(notation_from_ordinal(a)) == a


@settings(max_examples=40)
@given(small_limits(), st.integers(0, 30))
def test_fundamental_sequences_increase_below_the_limit(lam, n):
    assert lam.fundamental(n) < lam.fundamental(n + 1) < lam


def test_fundamental_sequence_values():
    assert W("w").fundamental(5) == W("5")
    assert W("w^2").fundamental(3) == W("w*3")
    assert W("w^w").fundamental(2) == W("w^2")
    assert W("w*2").fundamental(4) == W("w+4")
    with pytest.raises(ValueError):
        W("w+1").fundamental(0)


# described rank sets -------------------------------------------------------------


def test_order_type_of_explicit_set():
    desc = RankSetDescription(frozenset({W("0"), W("3"), W("7")}))
    assert order_type_of_finite_described_set(desc) == W("3")


def test_order_type_of_single_tail():
    desc = RankSetDescription(frozenset(), (Tail(OMEGA, ((0, W("0")), (1, W("1")))),))
    assert order_type_of_finite_described_set(desc) == OMEGA


def test_finite_prefix_is_absorbed():
    desc = RankSetDescription(frozenset({W("5")}), (Tail(OMEGA, ((6, W("6")),)),))
    assert order_type_of_finite_described_set(desc) == OMEGA


def test_points_above_the_last_anchor_are_counted():
    desc = RankSetDescription(frozenset({W("w"), W("w+3"), W("2")}),
                              (Tail(OMEGA, ((0, W("0")),)),))
    assert order_type_of_finite_described_set(desc) == W("w+2")


def test_two_anchors_give_two_copies_of_omega():
    tails = (Tail(OMEGA, ((0, W("1")),)), Tail(W("w^2"), ((1, W("w+4")),)))
    assert order_type_of_finite_described_set(RankSetDescription(frozenset(), tails)) == W("w*2")


@pytest.mark.parametrize("tail", [
    Tail(W("w+1"), ()),                                   # anchor not a limit
    Tail(OMEGA, ((2, W("2")), (1, W("1")))),              # indices out of order
    Tail(OMEGA, ((0, W("w")),)),                          # member not below anchor
    Tail(W("w^2"), ((3, W("w*5")),)),                     # not finitely close
    Tail(W("w*2"), ((4, W("w+1")),)),                     # falls below its sequence
])
def test_malformed_tails_are_rejected(tail):
    with pytest.raises(MalformedDescription):
        order_type_of_finite_described_set(RankSetDescription(frozenset(), (tail,)))


def test_drop_allows_bounded_shortfall():
    tail = Tail(W("w*2"), ((4, W("w+1")),), drop=3)
    assert order_type_of_finite_described_set(RankSetDescription(frozenset(), (tail,))) == OMEGA
