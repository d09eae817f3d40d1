"""The structure A(T): groups of finite subsets of tree levels.

``G_n`` holds the finite subsets of level ``n`` of ``T`` under symmetric
difference; the empty subset of level ``n`` is the identity ``id_n`` and
ids of different levels are distinct.  ``G_0`` is just ``{id_0}``.

The predecessor map ``p: G_{n+1} -> G_n`` sends a set to the sum of the
singletons of its members' parents, and ``f_a(b) = a* + b*`` with both
arguments pushed down by ``p`` to the lower of their two levels.  ``p`` is
a homomorphism, so ``f_a`` composes nicely: ``f_a(f_b(x)) = f_{f_a(b)}(x)``.

Each ``f_a`` is its own function symbol.  The finite view therefore stores
the family as an *indexed* table ``f[a, b]`` whose first argument is a
parameter, not a variable.  A path ``t_0, t_1, ...`` through ``T`` gives
the automorphism ``a -> a + {t_level(a)}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ordinal import RankValue
from .structure import FiniteStructure
from .tree import Address, Tree

__all__ = [
    "GroupElement",
    "id_element",
    "sym_diff",
    "pred",
    "pred_power",
    "f_apply",
    "zero_equivalent",
    "derived_rank",
    "UniverseCapExceeded",
    "MorozovStructure",
    "build_structure",
    "level_membership",
    "path_to_automorphism",
    "automorphism_to_path",
    "commutes_with_f",
]


@dataclass(frozen=True)
class GroupElement:
    level: int
    members: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(tuple(m) for m in self.members))
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if self.level == 0 and self.members:
            raise ValueError("G_0 consists of id_0 only")
        for m in self.members:
            if len(m) != self.level:
                raise ValueError(f"member {list(m)} is not at level {self.level}")

    @classmethod
    def _raw(cls, level: int, members: frozenset) -> "GroupElement":
        """Unchecked constructor for results of group operations."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "level", level)
        object.__setattr__(obj, "members", members)
        return obj

    @property
    def is_id(self) -> bool:
        return not self.members

    def name(self) -> str:
        return f"{self.level}:" + ",".join(".".join(map(str, m)) for m in sorted(self.members))

    @classmethod
    def parse(cls, text: str) -> "GroupElement":
        lvl, _, rest = text.partition(":")
        members = [tuple(int(x) for x in part.split(".")) if part else ()
                   for part in rest.split(",") if part]
        return cls(int(lvl), frozenset(members))

    def __str__(self):
        return f"id_{self.level}" if self.is_id else "{" + self.name() + "}"


def id_element(n: int) -> GroupElement:
    return GroupElement._raw(n, frozenset())


def sym_diff(a: GroupElement, b: GroupElement) -> GroupElement:
    if a.level != b.level:
        raise ValueError(f"levels differ: {a.level} vs {b.level}")
    return GroupElement._raw(a.level, a.members ^ b.members)


def pred(a: GroupElement) -> GroupElement:
    if a.level == 0:
        raise ValueError("id_0 has no predecessor")
    if a.level == 1:
        return id_element(0)
    out: set = set()
    for m in a.members:
        out ^= {m[:-1]}
    return GroupElement._raw(a.level - 1, frozenset(out))


def pred_power(a: GroupElement, k: int) -> GroupElement:
    for _ in range(k):
        a = pred(a)
    return a


def f_apply(a: GroupElement, b: GroupElement) -> GroupElement:
    k = min(a.level, b.level)
    return sym_diff(pred_power(a, a.level - k), pred_power(b, b.level - k))


def zero_equivalent(xs: Sequence[GroupElement], ys: Sequence[GroupElement]) -> bool:
    """Same quantifier-free type in A(T).

    Every term in one variable is some ``f_c(x)``, so the type of a tuple
    is fixed by its levels and by the differences ``x_i + y_i``: all of them
    must be the images under ``p`` of the difference at the top level.
    """
    if len(xs) != len(ys):
        return False
    if any(x.level != y.level for x, y in zip(xs, ys)):
        return False
    if not xs:
        return True
    top = max(range(len(xs)), key=lambda i: xs[i].level)
    delta = sym_diff(xs[top], ys[top])
    m = xs[top].level
    return all(sym_diff(x, y) == pred_power(delta, m - x.level) for x, y in zip(xs, ys))


def derived_rank(a: GroupElement, ranks: dict) -> RankValue:
    """Rank of ``a`` in the tree of ``G`` ordered by ``p``: the least rank of a member."""
    if a.is_id:
        raise ValueError("the member formula does not cover id_n")
    return min(ranks[m] for m in a.members)


# finite structure --------------------------------------------------------------


class UniverseCapExceeded(ValueError):
    pass


def _pred_table(parent_bits: Sequence[int]) -> np.ndarray:
    """p on all masks of a level, built by doubling over the node bits."""
    table = np.zeros(1, dtype=np.int64)
    for bit in parent_bits:
        table = np.concatenate([table, table ^ bit])
    return table


class MorozovStructure:
    """``G_0 .. G_B`` over a finite tree, with the full table of ``f``.

    Element ``i`` of level ``n`` is ``offsets[n] + mask`` where bit ``j`` of
    ``mask`` selects the ``j``-th node of ``T_n`` in tree order.
    """

    def __init__(self, tree: Tree, level_bound: int, cap: int = 4096):
        self.tree = tree
        self.level_bound = level_bound
        self.nodes: list[list[Address]] = [sorted(tree.level(n)) for n in range(level_bound + 1)]
        self.node_index = [{a: j for j, a in enumerate(lvl)} for lvl in self.nodes]
        sizes = [1] + [1 << len(self.nodes[n]) for n in range(1, level_bound + 1)]
        if sum(sizes) > cap:
            raise UniverseCapExceeded(f"universe of {sum(sizes)} elements exceeds cap {cap}")
        self.sizes = sizes
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.size = int(self.offsets[-1])
        self.level_of = np.repeat(np.arange(level_bound + 1), sizes)
        self.mask_of = np.arange(self.size) - self.offsets[self.level_of]
        self.pred_tables: list[np.ndarray | None] = [None]
        for n in range(1, level_bound + 1):
            bits = [0 if n == 1 else 1 << self.node_index[n - 1][a[:-1]] for a in self.nodes[n]]
            self.pred_tables.append(_pred_table(bits))
        self._f: np.ndarray | None = None

    # element conversion ------------------------------------------------------

    def element(self, i: int) -> GroupElement:
        n = int(self.level_of[i])
        mask = int(self.mask_of[i])
        return GroupElement(n, frozenset(a for j, a in enumerate(self.nodes[n]) if mask >> j & 1))

    def index(self, a: GroupElement) -> int:
        if a.level > self.level_bound:
            raise KeyError(f"level {a.level} beyond bound {self.level_bound}")
        mask = 0
        for m in a.members:
            mask |= 1 << self.node_index[a.level][m]
        return int(self.offsets[a.level]) + mask

    def id_index(self, n: int) -> int:
        return int(self.offsets[n])

    def names(self) -> list[str]:
        return [self.element(i).name() for i in range(self.size)]

    # tables -------------------------------------------------------------------

    def reduce_table(self, n: int, k: int) -> np.ndarray:
        """Masks of ``p^(n-k)`` on every mask of level ``n``."""
        table = np.arange(self.sizes[n], dtype=np.int64)
        for m in range(n, k, -1):
            table = self.pred_tables[m][table]
        return table

    @property
    def f_table(self) -> np.ndarray:
        if self._f is None:
            B = self.level_bound
            F = np.empty((self.size, self.size), dtype=np.int64)
            red = {(n, k): self.reduce_table(n, k) for n in range(B + 1) for k in range(n + 1)}
            for i in range(B + 1):
                for j in range(B + 1):
                    k = min(i, j)
                    block = red[(i, k)][:, None] ^ red[(j, k)][None, :]
                    F[self.offsets[i]:self.offsets[i + 1],
                      self.offsets[j]:self.offsets[j + 1]] = self.offsets[k] + block
            self._f = F
        return self._f

    def pred_index(self, i: int) -> int:
        n = int(self.level_of[i])
        if n == 0:
            raise ValueError("id_0 has no predecessor")
        return int(self.offsets[n - 1]) + int(self.pred_tables[n][self.mask_of[i]])

    def view(self) -> FiniteStructure:
        return FiniteStructure(self.names(), {}, {"f": self.f_table}, frozenset({"f"}))


def build_structure(tree: Tree, level_bound: int, cap: int = 4096) -> MorozovStructure:
    return MorozovStructure(tree, level_bound, cap)


def level_membership(F: np.ndarray, x: int) -> int:
    """Level of element ``x`` recovered from the ``f`` table alone.

    The ids are the fixed points of ``x -> f_x(x)``; they are ordered by
    ``f_{id_m}(id_n) = id_min(m,n)``, and ``x`` lies in ``G_n`` for the
    least ``n`` with ``f_{id_n}(x) = x``.
    """
    diag = F[np.arange(len(F)), np.arange(len(F))]
    ids = np.flatnonzero(diag == np.arange(len(F)))
    below = (F[np.ix_(ids, ids)] == ids[:, None]).sum(axis=1)
    ordered = ids[np.argsort(-below, kind="stable")]
    for n, u in enumerate(ordered):
        if F[u, x] == x:
            return n
    raise ValueError(f"element {x} fixed by no id")


# paths and automorphisms ----------------------------------------------------------


def _check_path(S: MorozovStructure, path: Sequence[Address]) -> list[Address]:
    path = [tuple(p) for p in path]
    if len(path) <= S.level_bound:
        raise ValueError(f"path prefix of length {len(path)} does not reach level {S.level_bound}")
    for n, t in enumerate(path[:S.level_bound + 1]):
        if len(t) != n or t not in S.tree:
            raise ValueError(f"path entry {list(t)} is not a level-{n} node of the tree")
        if n and t[:-1] != path[n - 1]:
            raise ValueError(f"path entry {list(t)} is not a child of {list(path[n - 1])}")
    return path


def path_to_automorphism(S: MorozovStructure, path: Sequence[Address]) -> np.ndarray:
    """Image array of ``a -> a + {t_level(a)}`` (``id_0`` is fixed)."""
    path = _check_path(S, path)
    g = np.arange(S.size)
    for n in range(1, S.level_bound + 1):
        bit = 1 << S.node_index[n][path[n]]
        lo, hi = S.offsets[n], S.offsets[n + 1]
        g[lo:hi] = lo + (np.arange(S.sizes[n]) ^ bit)
    return g


def commutes_with_f(S: MorozovStructure, g: np.ndarray) -> bool:
    """``g(f_a(b)) = f_a(g(b))`` for every parameter ``a`` and argument ``b``."""
    F = S.f_table
    return bool(np.array_equal(F[:, g], g[F]))


def automorphism_to_path(S: MorozovStructure, g: np.ndarray, d: int | None = None) -> list[Address]:
    """Path prefix ``t_0 .. t_d`` read off a nontrivial automorphism.

    At the first level ``n`` where ``g(id_n)`` moves, take its first member;
    go down through parents, and up by taking at each level the first child
    of the previous node that belongs to ``g(id_m)``.
    """
    d = S.level_bound if d is None else d
    if d > S.level_bound:
        raise ValueError(f"depth {d} beyond level bound {S.level_bound}")
    moved = [n for n in range(1, S.level_bound + 1) if g[S.id_index(n)] != S.id_index(n)]
    if not moved:
        raise ValueError("trivial automorphism: no witness level")
    n = moved[0]
    start = min(S.element(int(g[S.id_index(n)])).members, key=lambda a: S.node_index[n][a])
    path = [start[:m] for m in range(n + 1)]
    for m in range(n + 1, d + 1):
        members = S.element(int(g[S.id_index(m)])).members
        kids = [a for a in S.nodes[m] if a[:-1] == path[-1] and a in members]
        if not kids:
            raise ValueError(f"no child of {list(path[-1])} in g(id_{m}); not an automorphism")
        path.append(kids[0])
    return path[:d + 1]
