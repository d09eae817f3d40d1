import random

import numpy as np

from scottrank.oracles import (
    INF_RANK,
    NaiveBackForth,
    g_tree_ranks,
    narrow_random_tree,
    random_structure,
    term_type,
)
from scottrank.structure import FiniteStructure
from scottrank.tree import Tree


def test_g_tree_ranks_on_cherry():
    T = Tree([(), (0,), (1,)])
    r = g_tree_ranks(T)
    assert r[(0, frozenset())] == INF_RANK
    assert r[(1, frozenset())] == INF_RANK
    assert r[(1, frozenset({(0,)}))] == 0


def test_g_tree_ranks_chain():
    T = Tree([(), (0,), (0, 0)])
    r = g_tree_ranks(T)
    assert r[(1, frozenset({(0,)}))] == 1
    assert r[(2, frozenset({(0, 0)}))] == 0


def test_narrow_trees_respect_width():
    rng = random.Random(1)
    for _ in range(50):
        t = narrow_random_tree(rng, max_width=6)
        assert all(len(t.level(n)) <= 6 for n in range(t.depth + 1))


def test_term_type_distinguishes_function_values():
    S = FiniteStructure(["0", "1", "2"], {}, {"g": np.array([1, 1, 2])})
    assert term_type(S, [0], 2) == term_type(S, [0], 2)
    assert term_type(S, [0], 1) != term_type(S, [2], 1)
    assert term_type(S, [0], 1) != term_type(S, [1], 1)
    # with no terms applied only the equality atoms remain
    assert term_type(S, [0], 0) == term_type(S, [1], 0)


def test_naive_relations_refine():
    rng = random.Random(9)
    for _ in range(10):
        S = random_structure(rng, max_size=4)
        nb = NaiveBackForth(S)
        for a in range(S.size):
            for b in range(S.size):
                if nb.equivalent([a], [b], 2):
                    assert nb.equivalent([a], [b], 1)


def test_naive_scott_rank_of_linear_order():
    S = FiniteStructure(["0", "1"], {"lt": np.array([[False, True], [False, False]])})
    assert NaiveBackForth(S).scott_rank(2, 4) == 2
