import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scottrank.notation import notation_from_ordinal, notation_value
from scottrank.ordinal import INF, parse
from scottrank.tree import (
    ExplorationBudget,
    LazyTree,
    Tree,
    all_rooted_trees,
    canonical_ranked_tree,
    find_path,
    labeled_tree_from_notation,
    random_tree,
    tree_rank,
    verify_rank_anchors,
)


def test_rank_of_single_node():
    assert tree_rank(Tree())[()] == 0


def test_rank_of_chain():
    rk = tree_rank(Tree([(), (0,), (0, 0)]))
    assert [rk[()], rk[(0,)], rk[(0, 0)]] == [2, 1, 0]


def test_rank_of_mixed_children():
    rk = tree_rank(Tree([(), (0,), (1,), (1, 0)]))
    assert (rk[(0,)], rk[(1,)], rk[()]) == (0, 1, 2)


def test_tree_rejects_orphans():
    with pytest.raises(ValueError):
        Tree([(), (0, 0)])


def test_rooted_tree_counts():
    counts = [sum(1 for t in all_rooted_trees(n, n) if len(t) == n) for n in range(1, 9)]
    assert counts == [1, 1, 2, 4, 9, 20, 48, 115]
    assert sum(1 for _ in all_rooted_trees(8, 3)) == 113


def _one_step_holds(t: Tree) -> bool:
    rk = tree_rank(t)
    for a, kids in t.children.items():
        for g in range(0, t.depth + 2):
            if (rk[a] >= g + 1) != any(rk[k] >= g for k in kids):
                return False
    return True


def test_one_step_rank_characterisation_exhaustive():
    assert all(_one_step_holds(t) for t in all_rooted_trees(8, 8))


def test_one_step_rank_characterisation_random():
    rng = random.Random(7)
    assert all(_one_step_holds(random_tree(rng, max_depth=5)) for _ in range(500))


def test_labeled_tree_of_two_is_a_chain():
    t = labeled_tree_from_notation(notation_from_ordinal(parse("2")), ExplorationBudget(6, 4))
    assert sorted(t.children) == [(), (0,), (0, 0)]
    assert [notation_value(t.labels[a]) for a in [(), (0,), (0, 0)]] == [2, 1, 0]


def test_labeled_tree_of_omega_children():
    t = labeled_tree_from_notation(notation_from_ordinal(parse("w")), ExplorationBudget(1, 4))
    assert [notation_value(t.labels[(i,)]) for i in range(4)] == [0, 1, 2, 3]


def test_labeled_tree_root_value():
    lazy = labeled_tree_from_notation(notation_from_ordinal(parse("w^2")))
    assert isinstance(lazy, LazyTree)
    assert lazy.anchor_of(lazy.root_info) == parse("w^2")


def test_labeled_trees_satisfy_one_step_characterisation():
    for text in ["3", "w", "w+2", "w*2", "w^2", "w^2+w"]:
        t = labeled_tree_from_notation(notation_from_ordinal(parse(text)), ExplorationBudget(4, 4))
        assert verify_rank_anchors(t).ok, text


def test_canonical_tree_fixtures():
    assert len(canonical_ranked_tree(0).materialize(ExplorationBudget(5, 5))) == 1
    t = canonical_ranked_tree(parse("w")).materialize(ExplorationBudget(1, 4))
    assert [t.anchors[(i,)] for i in range(4)] == [parse(str(i)) for i in range(4)]
    inf = canonical_ranked_tree(INF)
    assert find_path(inf, 4) == [(), (0,), (0, 0), (0, 0, 0)]


@pytest.mark.parametrize("rho", ["3", "w", "w+1", "w*2", "w^2", "w^2+w*3"])
@pytest.mark.parametrize("width", [2, 5])
def test_canonical_anchors_verify(rho, width):
    report = verify_rank_anchors(canonical_ranked_tree(parse(rho)), depth=5, width=width)
    assert report.ok, report.failures


def test_exact_ranks_along_a_finite_chain():
    report = verify_rank_anchors(canonical_ranked_tree(3), depth=6, width=3)
    assert report.ok
    assert [report.exact[a] for a in [(), (0,), (0, 0), (0, 0, 0)]] == [3, 2, 1, 0]


def test_infinite_anchor_verifies():
    assert verify_rank_anchors(canonical_ranked_tree(INF), depth=4, width=3).ok


def test_wrong_anchor_is_caught():
    t = Tree([(), (0,)], anchors={(): parse("2"), (0,): parse("0")})
    report = verify_rank_anchors(t)
    assert not report.ok and report.failures[0][0] == ()


def test_find_path():
    assert find_path(Tree([(), (0,)])) is None
    assert find_path(canonical_ranked_tree(INF), 6) == [(0,) * k for k in range(6)]
    assert find_path(canonical_ranked_tree(parse("w*2")), 10) is None


@settings(max_examples=30)
@given(st.integers(0, 10_000))
def test_json_round_trip(seed):
    t = random_tree(random.Random(seed))
    back = Tree.from_json(t.to_json())
    assert back.children == t.children


def test_json_round_trip_with_annotations():
    t = labeled_tree_from_notation(notation_from_ordinal(parse("w+1")), ExplorationBudget(3, 3))
    back = Tree.from_json(t.to_json())
    assert back.labels == t.labels and back.anchors == t.anchors


def test_dot_export_mentions_every_node():
    t = Tree([(), (0,), (1,)])
    dot = t.to_dot(tree_rank(t))
    assert dot.startswith("digraph") and '"root" -> "0"' in dot and "rk=1" in dot
