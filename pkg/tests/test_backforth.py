import random

import numpy as np
import pytest

from scottrank.backforth import (
    GameReferee,
    bounded_game_check,
    eqv_classify,
    lemma34_check,
    orbits,
    rank_criterion,
    same_partition,
    scott_rank_structure,
    scott_rank_tuple,
    tuple_index,
    tuple_scott_ranks,
    zero_types,
)
from scottrank.morozov import GroupElement, build_structure
from scottrank.oracles import NaiveBackForth, random_structure, term_type
from scottrank.ordinal import Ordinal, parse
from scottrank.structure import FiniteStructure
from scottrank.tree import Tree, canonical_ranked_tree, tree_rank
from scottrank.verify import _linear_order

CHERRY = Tree([(), (0,), (1,)])


def test_one_element_structure():
    S = FiniteStructure(["0"])
    ec = eqv_classify(S, 1)
    assert ec.beta_star == 0
    assert scott_rank_structure(S) == Ordinal.of(1)


def test_two_element_linear_order():
    S = _linear_order(2)
    assert orbits(S, 1).tolist() == [0, 1]
    assert scott_rank_structure(S) == Ordinal.of(2)
    assert scott_rank_tuple(S, [0]) == Ordinal.of(1)
    assert scott_rank_tuple(S, [0, 0]) == Ordinal.of(1)
    assert scott_rank_tuple(S, [0, 1]) == Ordinal.of(0)


def test_empty_signature_has_one_orbit():
    S = FiniteStructure([str(i) for i in range(4)])
    assert set(orbits(S, 1).tolist()) == {0}
    assert scott_rank_structure(S, L=2) == Ordinal.of(1)


def test_cherry_view_orbit_of_singleton_is_all_of_level_one():
    M = build_structure(CHERRY, 1)
    orb = orbits(M.view(), 1)
    level1 = [M.index(GroupElement(1, m)) for m in
              [frozenset(), frozenset({(0,)}), frozenset({(1,)}), frozenset({(0,), (1,)})]]
    assert len({int(orb[i]) for i in level1}) == 1
    assert orb[M.id_index(0)] != orb[level1[0]]


def test_relations_are_monotone_and_reach_orbits():
    rng = random.Random(11)
    for _ in range(30):
        S = random_structure(rng)
        L = min(2, S.size)
        ec = eqv_classify(S, L)
        for length in range(1, L + 1):
            prev = ec.classes(0, length)
            for beta in range(1, ec.beta_star + 2):
                cur = ec.classes(beta, length)
                # each new class sits inside an old one
                pairs = {(int(c), int(p)) for c, p in zip(cur, prev)}
                assert len(pairs) == len(set(cur.tolist()))
                prev = cur
            assert same_partition(ec.classes(ec.beta_star, length), ec.orbits(length))
            orb = ec.orbits(length)
            cls = ec.classes(0, length)
            assert len({(int(o), int(c)) for o, c in zip(orb, cls)}) == len(set(orb.tolist()))


def test_zero_types_match_term_enumeration():
    rng = random.Random(5)
    for _ in range(40):
        S = random_structure(rng, max_size=4)
        for length in (1, 2):
            types = [term_type(S, t, S.size) for t in np.ndindex(*(S.size,) * length)]
            naive = np.unique(np.array([hash(t) for t in types]), return_inverse=True)[1]
            assert same_partition(zero_types(S, length), naive.reshape(-1))


def test_engine_matches_naive_recursion():
    rng = random.Random(2)
    for _ in range(25):
        S = random_structure(rng, max_size=4)
        nb = NaiveBackForth(S)
        ec = eqv_classify(S, 2)
        for beta in range(ec.beta_star + 2):
            assert same_partition(ec.classes(beta, 1), nb.classes(beta, 1))
        assert tuple_scott_ranks(ec, 1).tolist() == nb.tuple_ranks(1, ec.beta_star + 2)


def test_tuple_index_is_base_n():
    assert tuple_index([1, 2], 3) == 5


def test_lemma34_on_cherry():
    report = lemma34_check(build_structure(CHERRY, 1), L=2)
    assert report.ok and report.pairs_checked > 0


def test_lemma34_on_deeper_view():
    T = Tree([(), (0,), (1,), (0, 0)])
    assert lemma34_check(build_structure(T, 2), L=2).ok


def test_rank_criterion_examples():
    T = Tree([(), (0,), (0, 0), (0, 0, 0)])
    rk = tree_rank(T)
    a = GroupElement(1, frozenset({(0,)}))
    assert rank_criterion(a, 0, rk)
    assert not rank_criterion(a, 1, rk)
    assert rank_criterion(a, 2, {(0,): parse("w*2")})
    assert rank_criterion(GroupElement(2), 3, rk)


def test_game_at_level_zero_is_consistent():
    lazy = canonical_ranked_tree(parse("w"))
    res = bounded_game_check(lazy, GroupElement(1, frozenset({(2,)})), 0)
    assert res.verdict and res.outcome == "consistent"


def test_game_refutes_finite_rank_at_level_one():
    lazy = canonical_ranked_tree(parse("w"))
    res = bounded_game_check(lazy, GroupElement(1, frozenset({(2,)})), 1)
    assert not res.verdict and res.outcome == "consistent"


def test_game_defends_omega_anchor_at_level_one():
    lazy = canonical_ranked_tree(parse("w*2"))
    ref = GameReferee(lazy, width=3, pool_depth=4)
    a = GroupElement(1, frozenset({(0,)}))
    assert ref.anchor((0,)) == parse("w")
    res = ref.check(a, 1)
    assert res.verdict and res.outcome == "consistent"


def test_game_rejects_large_beta():
    with pytest.raises(ValueError):
        bounded_game_check(canonical_ranked_tree(parse("w")), GroupElement(1, frozenset({(0,)})), 4)
