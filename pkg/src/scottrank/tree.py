"""Rooted trees over addresses in omega^{<omega}.

A node is identified by its address, a tuple of naturals; its level is the
address length and its parent is the address with the last entry dropped.

:class:`Tree` is a finite explicit table.  It may be the materialised
truncation of a :class:`LazyTree`, in which case ``complete`` records which
nodes had their full child list generated.  Trees may carry notation labels
(the trees T_a) and rank anchors (ordinals or ``INF``).
"""
from __future__ import annotations

import itertools
import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator

from .notation import Notation, fundamental_seq, notation_from_json, notation_to_json, notation_value, Lim, Succ
from .ordinal import INF, Ordinal, RankValue, parse_rank

Address = tuple

__all__ = [
    "Address",
    "ExplorationBudget",
    "Tree",
    "LazyTree",
    "AnchorReport",
    "tree_rank",
    "labeled_tree_from_notation",
    "canonical_ranked_tree",
    "verify_rank_anchors",
    "find_path",
    "all_rooted_trees",
    "random_tree",
]


@dataclass(frozen=True)
class ExplorationBudget:
    max_depth: int = 6          # largest address length materialised
    max_children: int = 4       # children taken from each infinite family
    max_nodes: int = 100_000


class Tree:
    """Finite prefix-closed set of addresses with optional annotations."""

    def __init__(self, addresses: Iterable[Address] = ((),), *,
                 labels: dict | None = None, anchors: dict | None = None,
                 complete: Iterable[Address] | None = None):
        self.children: dict[Address, list[Address]] = {}
        for addr in sorted({tuple(a) for a in addresses} | {()}, key=lambda a: (len(a), a)):
            if addr and addr[:-1] not in self.children:
                raise ValueError(f"address {list(addr)} has no parent in the tree")
            self.children[addr] = []
            if addr:
                self.children[addr[:-1]].append(addr)
        self.labels: dict[Address, Notation] = dict(labels or {})
        self.anchors: dict[Address, RankValue] = dict(anchors or {})
        self.complete: frozenset[Address] = (
            frozenset(self.children) if complete is None else frozenset(complete))

    # structure ------------------------------------------------------------

    @property
    def nodes(self) -> list[Address]:
        return list(self.children)

    def __len__(self) -> int:
        return len(self.children)

    def __contains__(self, addr) -> bool:
        return tuple(addr) in self.children

    def level(self, n: int) -> list[Address]:
        return [a for a in self.children if len(a) == n]

    @property
    def depth(self) -> int:
        return max(len(a) for a in self.children)

    @property
    def is_finite_explicit(self) -> bool:
        return self.complete == frozenset(self.children)

    def subtree_complete(self, addr: Address) -> bool:
        stack = [addr]
        while stack:
            a = stack.pop()
            if a not in self.complete:
                return False
            stack.extend(self.children[a])
        return True

    def restrict(self, keep: Iterable[Address]) -> "Tree":
        """Subtree on ``keep`` (closed under prefixes); annotations carried."""
        keep = {tuple(a) for a in keep}
        for a in list(keep):
            while a:
                a = a[:-1]
                keep.add(a)
        return Tree(keep,
                    labels={a: v for a, v in self.labels.items() if a in keep},
                    anchors={a: v for a, v in self.anchors.items() if a in keep})

    # serialisation -----------------------------------------------------------

    def to_json(self) -> dict:
        out = []
        for a in self.children:
            rec: dict[str, Any] = {"address": list(a)}
            if a in self.labels:
                rec["label"] = notation_to_json(self.labels[a])
            if a in self.anchors:
                rec["anchor"] = str(self.anchors[a])
            out.append(rec)
        return {"nodes": out}

    @classmethod
    def from_json(cls, obj: dict) -> "Tree":
        addrs, labels, anchors = [], {}, {}
        for rec in obj["nodes"]:
            a = tuple(rec["address"])
            addrs.append(a)
            if "label" in rec:
                labels[a] = notation_from_json(rec["label"])
            if "anchor" in rec:
                anchors[a] = parse_rank(rec["anchor"])
        return cls(addrs, labels=labels, anchors=anchors)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def to_dot(self, ranks: dict | None = None) -> str:
        def name(a):
            return '"' + (".".join(map(str, a)) or "root") + '"'

        lines = ["digraph T {", "  node [shape=box];"]
        for a in self.children:
            parts = [".".join(map(str, a)) or "()"]
            if ranks and a in ranks:
                parts.append(f"rk={ranks[a]}")
            if a in self.anchors:
                parts.append(f"anchor={self.anchors[a]}")
            if a in self.labels:
                parts.append(f"label={notation_value(self.labels[a])}")
            lines.append(f"  {name(a)} [label=\"{' '.join(parts)}\"];")
        for a, kids in self.children.items():
            for k in kids:
                lines.append(f"  {name(a)} -> {name(k)};")
        lines.append("}")
        return "\n".join(lines) + "\n"


class LazyTree:
    """A tree given by a deterministic child-generation rule.

    ``expand(info)`` returns an iterable (possibly infinite) of child infos;
    child ``i`` gets address ``parent + (i,)``.  ``anchor_of`` and
    ``label_of`` turn infos into annotations.
    """

    def __init__(self, root_info, expand: Callable[[Any], Iterable],
                 anchor_of: Callable[[Any], RankValue] | None = None,
                 label_of: Callable[[Any], Notation] | None = None):
        self.root_info = root_info
        self.expand = expand
        self.anchor_of = anchor_of
        self.label_of = label_of

    def info(self, addr: Address):
        x = self.root_info
        for i in addr:
            x = next(itertools.islice(iter(self.expand(x)), i, None))
        return x

    def materialize(self, budget: ExplorationBudget) -> Tree:
        infos = {(): self.root_info}
        complete = set()
        queue = deque([()])
        while queue:
            a = queue.popleft()
            if len(a) >= budget.max_depth:
                if next(iter(self.expand(infos[a])), None) is None:
                    complete.add(a)
                continue
            it = iter(self.expand(infos[a]))
            kids = list(itertools.islice(it, budget.max_children))
            if next(it, _END) is _END:
                complete.add(a)
            for i, k in enumerate(kids):
                if len(infos) >= budget.max_nodes:
                    complete.discard(a)
                    break
                infos[a + (i,)] = k
                queue.append(a + (i,))
        anchors = {a: self.anchor_of(x) for a, x in infos.items()} if self.anchor_of else None
        labels = {a: self.label_of(x) for a, x in infos.items()} if self.label_of else None
        return Tree(infos, labels=labels, anchors=anchors, complete=complete)


_END = object()


def tree_rank(T: Tree) -> dict[Address, int]:
    """Exact ranks of a finite tree, bottom-up: leaves 0, else max child + 1."""
    rk: dict[Address, int] = {}
    for a in sorted(T.children, key=len, reverse=True):
        kids = T.children[a]
        rk[a] = 1 + max(rk[k] for k in kids) if kids else 0
    return rk


# fixture generators ------------------------------------------------------------


def _notation_children(b: Notation) -> Iterator[Notation]:
    if isinstance(b, Succ):
        yield b.child
    elif isinstance(b, Lim):
        for n in itertools.count():
            yield fundamental_seq(b, n)


def labeled_tree_from_notation(a: Notation, budget: ExplorationBudget | None = None):
    """The tree T_a; materialised when a budget is given, else lazy."""
    lazy = LazyTree(a, _notation_children, anchor_of=notation_value, label_of=lambda b: b)
    return lazy if budget is None else lazy.materialize(budget)


def _anchor_children(r: RankValue) -> Iterator[RankValue]:
    if r is INF:
        yield INF
        for n in itertools.count():
            yield Ordinal.of(n)
    elif r.is_zero():
        return
    elif r.is_successor():
        yield r.predecessor()
    else:
        for n in itertools.count():
            yield r.fundamental(n)


def canonical_ranked_tree(rho: RankValue | int) -> LazyTree:
    if rho is not INF:
        rho = Ordinal.of(rho)
    return LazyTree(rho, _anchor_children, anchor_of=lambda r: r)


# anchor verification ---------------------------------------------------------


@dataclass
class AnchorReport:
    ok: bool
    failures: list[tuple[Address, str]] = field(default_factory=list)
    exact: dict[Address, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"ok": self.ok,
                "failures": [{"address": list(a), "reason": r} for a, r in self.failures],
                "exact": {".".join(map(str, a)): v for a, v in sorted(self.exact.items())}}


def verify_rank_anchors(T: "Tree | LazyTree", depth: int = 6, width: int = 4) -> AnchorReport:
    """Check rank anchors on a (depth, width) truncation.

    Nodes whose whole subtree got generated are checked exactly.  Others are
    checked one step at a time: children anchors lie strictly below (``INF``
    is above every ordinal), a fully generated child list pins the anchor
    to max+1, and a limit or ``INF`` anchor must not be refuted by it.
    """
    if isinstance(T, LazyTree):
        T = T.materialize(ExplorationBudget(depth, width))
    rk = tree_rank(T)
    failures: list[tuple[Address, str]] = []
    exact: dict[Address, int] = {}
    for a in T.children:
        if a not in T.anchors:
            continue
        anc = T.anchors[a]
        kids = [k for k in T.children[a] if k in T.anchors]
        kid_anchors = [T.anchors[k] for k in kids]
        if T.subtree_complete(a):
            exact[a] = rk[a]
            if anc != rk[a]:
                failures.append((a, f"anchor {anc} but exact rank {rk[a]}"))
            continue
        for k, ka in zip(kids, kid_anchors):
            if not (ka < anc or (anc is INF and ka is INF)):
                failures.append((a, f"child {list(k)} anchored {ka} not below {anc}"))
        if anc is INF:
            if a in T.complete and INF not in kid_anchors:
                failures.append((a, "infinite anchor without an infinite child"))
            continue
        if a in T.complete:
            want = max(kid_anchors).plus_finite(1) if kid_anchors else Ordinal.of(0)
            if INF in kid_anchors or anc != want:
                failures.append((a, f"anchor {anc} but complete children give {want}"))
        elif (T.children[a] and anc.is_successor()
              and not any(k == anc.predecessor() for k in kid_anchors)):
            failures.append((a, f"successor anchor {anc} lacks a child at {anc.predecessor()}"))
    return AnchorReport(not failures, failures, exact)


def find_path(T: "Tree | LazyTree", d: int = 6, width: int = 8) -> list[Address] | None:
    """First ``d`` nodes of a branch through ``INF`` anchors, or ``None``.

    A finite explicit tree has no infinite path, so the answer there is
    always ``None``.
    """
    if isinstance(T, Tree):
        return None
    if T.anchor_of is None or T.anchor_of(T.root_info) is not INF:
        return None
    addr: Address = ()
    info = T.root_info
    path = [addr]
    while len(path) < d:
        for i, k in enumerate(itertools.islice(iter(T.expand(info)), width)):
            if T.anchor_of(k) is INF:
                addr, info = addr + (i,), k
                path.append(addr)
                break
        else:
            return None
    return path


# enumeration -----------------------------------------------------------------


_SHAPE_CACHE: dict = {}


def _shapes_cached(n: int, depth: int) -> list[tuple]:
    """Canonical shapes (sorted tuples of child shapes) with n nodes."""
    key = (n, depth)
    if key in _SHAPE_CACHE:
        return _SHAPE_CACHE[key]
    if n == 1:
        out = [()]
    elif depth == 0:
        out = []
    else:
        out = []
        for forest in _forests(n - 1, depth - 1, None):
            out.append(forest)
    _SHAPE_CACHE[key] = out
    return out


def _forests(n: int, depth: int, bound) -> Iterator[tuple]:
    """Non-increasing sequences of shapes with n nodes total."""
    if n == 0:
        yield ()
        return
    for size in range(n, 0, -1):
        for s in _shapes_cached(size, depth):
            key = (size, s)
            if bound is not None and key > bound:
                continue
            for rest in _forests(n - size, depth, key):
                yield (s,) + rest


def _shape_size(s: tuple) -> int:
    return 1 + sum(_shape_size(c) for c in s)


def _shape_to_addresses(s: tuple, prefix: Address = ()) -> list[Address]:
    out = [prefix]
    for i, c in enumerate(s):
        out.extend(_shape_to_addresses(c, prefix + (i,)))
    return out


def all_rooted_trees(max_nodes: int, max_depth: int) -> Iterator[Tree]:
    """Every rooted tree up to isomorphism with <= max_nodes nodes and
    address length <= max_depth."""
    for n in range(1, max_nodes + 1):
        for s in _shapes_cached(n, max_depth):
            yield Tree(_shape_to_addresses(s))


def random_tree(rng: random.Random, max_depth: int = 4, max_branch: int = 3,
                p_stop: float = 0.35) -> Tree:
    addrs = [()]
    frontier = [()]
    while frontier:
        a = frontier.pop()
        if len(a) >= max_depth:
            continue
        k = 0 if (a and rng.random() < p_stop) else rng.randint(1 if not a else 0, max_branch)
        for i in range(k):
            addrs.append(a + (i,))
            frontier.append(a + (i,))
    return Tree(addrs)
