"""Independent brute-force oracles used to cross-check the engines.

Nothing here shares code paths with the fast implementations: group
elements are bitmasks handled by plain loops, quantifier-free types come
from literal term enumeration, the back-and-forth relations follow the
textbook recursion, and orbits come from trying every permutation.
"""
from __future__ import annotations

import itertools
import random
from functools import lru_cache
from typing import Sequence

import numpy as np

from .structure import FiniteStructure, is_isomorphism
from .tree import Tree, random_tree

__all__ = [
    "INF_RANK",
    "g_tree_ranks",
    "narrow_random_tree",
    "term_type",
    "NaiveBackForth",
    "random_structure",
]

INF_RANK = 1 << 30  # stands for the infinite rank of the id chain


# the tree of G ordered by the predecessor map -------------------------------------------


def g_tree_ranks(tree: Tree) -> dict[tuple[int, frozenset], int]:
    """Rank of every element of ``G_0 .. G_d`` in the tree whose successors
    of ``a`` are the ``b`` one level up with ``p(b) = a``.

    ``d`` is the tree depth; above it every group is trivial, so ``id_d``
    continues the infinite chain of ids and gets ``INF_RANK``.
    """
    d = tree.depth
    levels = [sorted(tree.level(n)) for n in range(d + 1)]
    ranks: dict[tuple[int, frozenset], int] = {}
    above: dict[int, int] = {}  # mask at level n+1 -> rank
    for n in range(d, -1, -1):
        nodes = levels[n]
        width = len(nodes) if n else 0
        here = {mask: 0 for mask in range(1 << width)}
        here[0] = INF_RANK if n == d else here[0]
        if n < d:
            parent_bit = [1 << levels[n].index(a[:-1]) if n else 0 for a in levels[n + 1]]
            for mask, r in above.items():
                p = 0
                for j, bit in enumerate(parent_bit):
                    if mask >> j & 1:
                        p ^= bit
                here[p] = max(here[p], r + 1 if r < INF_RANK else INF_RANK)
        for mask, r in here.items():
            members = frozenset(nodes[j] for j in range(width) if mask >> j & 1)
            ranks[(n, members)] = r
        above = here
    return ranks


def narrow_random_tree(rng: random.Random, max_depth: int = 4, max_branch: int = 3,
                       max_width: int = 10, tries: int = 1000) -> Tree:
    """A random tree whose levels hold at most ``max_width`` nodes, so every
    group ``G_n`` stays enumerable."""
    for _ in range(tries):
        t = random_tree(rng, max_depth=max_depth, max_branch=max_branch)
        if all(len(t.level(n)) <= max_width for n in range(t.depth + 1)):
            return t
    raise RuntimeError("no narrow tree found")


# quantifier-free types by term enumeration ---------------------------------------------


def _function_symbols(S: FiniteStructure) -> list[tuple[str, int, np.ndarray]]:
    """(name, arity, table) for every function symbol; an indexed family
    contributes one unary symbol per parameter."""
    out = []
    for name in sorted(S.functions):
        tab = S.functions[name]
        if name in S.indexed:
            out += [(f"{name}[{a}]", 1, tab[a]) for a in range(S.size)]
        else:
            out.append((name, tab.ndim, tab))
    return out


def term_type(S: FiniteStructure, tup: Sequence[int], depth: int) -> tuple:
    """Truth values of all atomic formulas over terms of height <= depth,
    listed in a fixed syntactic order."""
    symbols = _function_symbols(S)
    terms: list[tuple[str, int]] = [(f"x{i}", int(v)) for i, v in enumerate(tup)]
    for _ in range(depth):
        new = []
        for name, arity, tab in symbols:
            for args in itertools.product(terms, repeat=arity):
                label = f"{name}({','.join(t for t, _ in args)})"
                new.append((label, int(tab[tuple(v for _, v in args)])))
        seen = {t for t, _ in terms}
        terms += [t for t in new if t[0] not in seen]
    values = [v for _, v in terms]
    atoms: list[bool] = [values[i] == values[j]
                         for i in range(len(values)) for j in range(len(values))]
    for name in sorted(S.relations):
        tab = S.relations[name]
        for args in itertools.product(values, repeat=tab.ndim):
            atoms.append(bool(tab[tuple(args)]))
    return tuple(atoms)


# back-and-forth by direct recursion ------------------------------------------------------


class NaiveBackForth:
    """The relations by their definition, one pair of tuples at a time:

    * level 0: same truth values on all atoms over terms of bounded height;
    * level b+1: for every c there is d with (a, c) ~b (b', d), and back.
    """

    def __init__(self, S: FiniteStructure, term_depth: int | None = None):
        self.S = S
        self.N = S.size
        self.term_depth = S.size if term_depth is None else term_depth
        self._type = lru_cache(maxsize=None)(self._type_uncached)
        self._eq = lru_cache(maxsize=None)(self._eq_uncached)

    def _type_uncached(self, tup: tuple) -> tuple:
        return term_type(self.S, tup, self.term_depth)

    def _eq_uncached(self, a: tuple, b: tuple, beta: int) -> bool:
        if beta == 0:
            return self._type(a) == self._type(b)
        forth = all(any(self._eq(a + (c,), b + (d,), beta - 1) for d in range(self.N))
                    for c in range(self.N))
        back = all(any(self._eq(a + (c,), b + (d,), beta - 1) for c in range(self.N))
                   for d in range(self.N))
        return forth and back

    def equivalent(self, a: Sequence[int], b: Sequence[int], beta: int) -> bool:
        return self._eq(tuple(a), tuple(b), beta)

    def classes(self, beta: int, length: int) -> np.ndarray:
        """Class labels of all tuples in base-N order, first-fit."""
        tuples = list(itertools.product(range(self.N), repeat=length))
        reps: list[tuple] = []
        labels = []
        for t in tuples:
            for k, r in enumerate(reps):
                if self._eq(t, r, beta):
                    labels.append(k)
                    break
            else:
                labels.append(len(reps))
                reps.append(t)
        return np.array(labels, dtype=np.int64)

    def automorphisms(self) -> list[np.ndarray]:
        return [np.array(p) for p in itertools.permutations(range(self.N))
                if is_isomorphism(self.S, self.S, np.array(p))]

    def orbits(self, length: int) -> np.ndarray:
        group = self.automorphisms()
        tuples = list(itertools.product(range(self.N), repeat=length))
        index = {t: i for i, t in enumerate(tuples)}
        labels = np.full(len(tuples), -1, dtype=np.int64)
        k = 0
        for i, t in enumerate(tuples):
            if labels[i] < 0:
                for g in group:
                    labels[index[tuple(int(g[x]) for x in t)]] = k
                k += 1
        return labels

    def tuple_ranks(self, length: int, max_beta: int) -> list[int]:
        orb = self.orbits(length)
        tuples = list(itertools.product(range(self.N), repeat=length))
        out = []
        for i, t in enumerate(tuples):
            for beta in range(max_beta + 1):
                cls = {j for j, u in enumerate(tuples) if self._eq(t, u, beta)}
                if cls == set(np.flatnonzero(orb == orb[i]).tolist()):
                    out.append(beta)
                    break
            else:
                raise RuntimeError(f"tuple {t} did not settle by level {max_beta}")
        return out

    def scott_rank(self, L: int, max_beta: int) -> int:
        return 1 + max(max(self.tuple_ranks(l, max_beta)) for l in range(1, L + 1))


# random small structures ------------------------------------------------------------------


def random_structure(rng: random.Random, max_size: int = 5, max_relations: int = 2,
                     max_functions: int = 1) -> FiniteStructure:
    """Random structure with relations of arity <= 2 and unary functions."""
    n = rng.randint(1, max_size)
    rels = {}
    for k in range(rng.randint(0, max_relations)):
        arity = rng.randint(1, 2)
        rels[f"R{k}"] = np.array([rng.random() < 0.4 for _ in range(n ** arity)]).reshape((n,) * arity)
    funcs = {}
    for k in range(rng.randint(0, max_functions)):
        funcs[f"g{k}"] = np.array([rng.randrange(n) for _ in range(n)])
    return FiniteStructure([str(i) for i in range(n)], rels, funcs)
