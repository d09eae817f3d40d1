import itertools

import numpy as np
import pytest

from scottrank.morozov import (
    GroupElement,
    UniverseCapExceeded,
    automorphism_to_path,
    build_structure,
    commutes_with_f,
    derived_rank,
    f_apply,
    id_element,
    level_membership,
    path_to_automorphism,
    pred,
    sym_diff,
    zero_equivalent,
)
from scottrank.oracles import g_tree_ranks
from scottrank.ordinal import INF
from scottrank.tree import ExplorationBudget, Tree, all_rooted_trees, canonical_ranked_tree, tree_rank

X, Y = (0,), (1,)
CHERRY = Tree([(), X, Y])


def E(level, *members):
    return GroupElement(level, frozenset(members))


def _structures():
    yield build_structure(CHERRY, 1)
    yield build_structure(Tree([(), (0,), (1,), (0, 0), (0, 1), (1, 0)]), 2)
    yield build_structure(Tree([(), (0,), (0, 0), (0, 1), (0, 0, 0)]), 3)


def test_group_element_validation():
    with pytest.raises(ValueError):
        E(0, ())
    with pytest.raises(ValueError):
        E(2, (0,))
    assert GroupElement.parse("2:0.1,1.0") == E(2, (0, 1), (1, 0))
    assert GroupElement.parse("3:") == id_element(3)


def test_sym_diff_examples():
    a = E(1, X)
    assert sym_diff(a, a) == id_element(1)
    assert sym_diff(a, id_element(1)) == a
    assert sym_diff(E(1, X), E(1, X, Y)) == E(1, Y)
    with pytest.raises(ValueError):
        sym_diff(id_element(1), id_element(2))


def test_pred_examples():
    assert pred(id_element(3)) == id_element(2)
    assert pred(E(2, (0, 0), (0, 1))) == id_element(1)
    assert pred(E(2, (0, 1))) == E(1, (0,))
    with pytest.raises(ValueError):
        pred(id_element(0))


def test_f_examples():
    a = E(2, (0, 1))
    assert f_apply(a, id_element(2)) == a
    assert f_apply(a, a) == id_element(2)
    assert f_apply(E(1, X), E(2, (1, 0))) == E(1, X, Y)


def test_small_universes():
    s0 = build_structure(Tree(), 0)
    assert s0.size == 1 and s0.f_table.tolist() == [[0]]
    s1 = build_structure(Tree([(), X]), 1)
    assert s1.names() == ["0:", "1:", "1:0"]
    assert s1.f_table.tolist() == [[0, 0, 0], [0, 1, 2], [0, 2, 1]]
    assert build_structure(CHERRY, 1).sizes == [1, 4]


def test_f_table_matches_naive_evaluation():
    for S in _structures():
        F = S.f_table
        for i, j in itertools.product(range(S.size), repeat=2):
            assert S.element(int(F[i, j])) == f_apply(S.element(i), S.element(j))


def test_group_laws_and_homomorphism():
    for S in _structures():
        for n in range(1, S.level_bound + 1):
            elems = [S.element(i) for i in range(S.offsets[n], S.offsets[n + 1])]
            for a, b in itertools.product(elems, repeat=2):
                assert sym_diff(a, b) == sym_diff(b, a)
                assert sym_diff(a, a) == id_element(n)
                assert pred(sym_diff(a, b)) == sym_diff(pred(a), pred(b))
                for c in elems[:4]:
                    assert sym_diff(sym_diff(a, b), c) == sym_diff(a, sym_diff(b, c))


def test_f_is_symmetric():
    for S in _structures():
        assert np.array_equal(S.f_table, S.f_table.T)


def test_level_membership_recovers_levels():
    for S in _structures():
        assert [level_membership(S.f_table, x) for x in range(S.size)] == S.level_of.tolist()


def test_each_element_defines_everything_below_it():
    for S in _structures():
        F = S.f_table
        for a in range(S.size):
            lower = np.flatnonzero(S.level_of <= S.level_of[a])
            assert all(F[b, F[a, a]] == b for b in lower)


def test_path_automorphism():
    S = build_structure(Tree([(), (0,), (1,), (0, 0), (0, 1)]), 2)
    path = [(), (0,), (0, 1)]
    g = path_to_automorphism(S, path)
    assert S.element(int(g[S.id_index(2)])) == E(2, (0, 1))
    assert np.array_equal(g[g], np.arange(S.size))
    assert commutes_with_f(S, g)
    assert automorphism_to_path(S, g) == path


def test_binary_reading_of_f_is_not_preserved():
    # parameters are symbols: g(f_a(b)) = f_a(g(b)), not f_{g(a)}(g(b))
    S = build_structure(CHERRY, 1)
    g = path_to_automorphism(S, [(), X])
    F = S.f_table
    assert not np.array_equal(g[F], F[np.ix_(g, g)])


def test_identity_has_no_path():
    S = build_structure(CHERRY, 1)
    with pytest.raises(ValueError):
        automorphism_to_path(S, np.arange(S.size))


def test_bad_path_rejected():
    S = build_structure(CHERRY, 1)
    with pytest.raises(ValueError):
        path_to_automorphism(S, [(), (5,)])


def test_round_trip_on_infinite_path():
    lazy = canonical_ranked_tree(INF)
    T = lazy.materialize(ExplorationBudget(max_depth=3, max_children=2))
    S = build_structure(T, 3)
    path = [(0,) * k for k in range(4)]
    back = automorphism_to_path(S, path_to_automorphism(S, path))
    assert back == path and all(T.anchors[a] == INF for a in back)


def test_universe_cap():
    wide = Tree([()] + [(i,) for i in range(13)])
    with pytest.raises(UniverseCapExceeded):
        build_structure(wide, 1)


def test_derived_rank_examples():
    T = Tree([(), X, Y, (1, 0)])
    rk = tree_rank(T)
    assert derived_rank(E(1, Y), rk) == 1
    assert derived_rank(E(1, X, Y), rk) == 0
    assert g_tree_ranks(T)[(1, frozenset({X, Y}))] == 0
    with pytest.raises(ValueError):
        derived_rank(id_element(1), rk)


def test_derived_rank_matches_g_tree_oracle():
    for T in all_rooted_trees(7, 3):
        rk = tree_rank(T)
        for (n, members), r in g_tree_ranks(T).items():
            if members:
                assert derived_rank(GroupElement(n, members), rk) == r


def test_zero_equivalence():
    a, b = E(2, (0, 1)), E(2, (0, 0))
    assert zero_equivalent([a], [b])
    assert zero_equivalent([a, E(1, (0,))], [b, E(1, (0,))])
    assert not zero_equivalent([a, E(1, (0,))], [b, id_element(1)])
    assert not zero_equivalent([a], [id_element(1)])
