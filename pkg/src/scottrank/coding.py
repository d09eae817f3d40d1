"""Coding a finite relational structure as a graph with block orderings.

The coded structure has five disjoint sorts:

* ``L``: one node per relation symbol; the ``i``-th symbol (from 1) is
  joined to every node of its own cycle of length ``i + 1`` in ``Lstar``;
* ``A``: a copy of the universe;
* ``U``: one cycle ``u_0 -> u_1 -> ... -> u_0`` per tuple whose length is
  some symbol's arity, with ``u_j`` joined to the ``j``-th coordinate in A;
* ``T``: one block per symbol and tuple, every node of it joined to the
  symbol's L node and to ``u_0``; ``lt`` linearly orders each block, whose
  size tells whether the tuple is in the relation.

``E`` is symmetric except inside U, where the cycle edges point forward
so the coordinate order of a tuple can be read back without using the
element numbering.  A 1-tuple is a single node with a loop.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .structure import FiniteStructure, find_isomorphism

__all__ = [
    "RelationalStructure",
    "DistinguishingPair",
    "StarStructure",
    "MalformedStar",
    "StarReport",
    "encode",
    "decode",
    "verify_star",
    "isomorphic",
    "random_relational",
]

SORTS = ("L", "Lstar", "A", "U", "T")


class MalformedStar(ValueError):
    def __init__(self, invariant: str, detail: str):
        super().__init__(f"{invariant}: {detail}")
        self.invariant = invariant


@dataclass
class RelationalStructure:
    universe: list[str]
    symbols: list[tuple[str, int]]
    tables: dict[str, set] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.universe)
        for name, arity in self.symbols:
            if arity < 1:
                raise ValueError(f"symbol {name} needs arity >= 1")
            tups = {tuple(int(v) for v in t) for t in self.tables.get(name, set())}
            for t in tups:
                if len(t) != arity or any(not 0 <= v < n for v in t):
                    raise ValueError(f"tuple {t} does not fit symbol {name}/{arity}")
            self.tables[name] = tups

    def to_finite(self) -> FiniteStructure:
        n = len(self.universe)
        rels = {}
        for k, (name, arity) in enumerate(self.symbols):
            tab = np.zeros((n,) * arity, dtype=bool)
            for t in self.tables[name]:
                tab[t] = True
            rels[f"{k:03d}"] = tab  # position is the symbol's identity
        return FiniteStructure(list(self.universe), rels)

    def to_json(self) -> dict:
        return {"universe": list(self.universe),
                "symbols": [{"name": s, "arity": a, "tuples": sorted(map(list, self.tables[s]))}
                            for s, a in self.symbols]}

    @classmethod
    def from_json(cls, obj: dict) -> "RelationalStructure":
        symbols = [(s["name"], int(s["arity"])) for s in obj["symbols"]]
        tables = {s["name"]: {tuple(t) for t in s.get("tuples", [])} for s in obj["symbols"]}
        return cls([str(u) for u in obj["universe"]], symbols, tables)


@dataclass(frozen=True)
class DistinguishingPair:
    """Finite linear orders marking a false (``c1_size``) or true
    (``c2_size``) atomic fact."""
    c1_size: int = 3
    c2_size: int = 5

    def __post_init__(self):
        if self.c1_size < 1 or self.c2_size < 1 or self.c1_size == self.c2_size:
            raise ValueError("pair sizes must be positive and distinct")

    @classmethod
    def parse(cls, text: str) -> "DistinguishingPair":
        a, b = (int(x) for x in text.split(","))
        return cls(a, b)


@dataclass
class StarStructure:
    """The coded structure as a :class:`FiniteStructure` with unary
    relations for the sorts and binary ``E`` and ``lt``.  ``blocks`` maps
    (symbol position, tuple) to the T nodes of its block; it is metadata
    for tests and is never read by the decoder."""
    structure: FiniteStructure
    blocks: dict | None = None

    def sort_of(self, name: str) -> np.ndarray:
        return np.flatnonzero(self.structure.relations[name])

    def permuted(self, perm: np.ndarray) -> "StarStructure":
        return StarStructure(self.structure.permuted(perm))

    def to_json(self) -> dict:
        return self.structure.to_json()

    @classmethod
    def from_json(cls, obj: dict) -> "StarStructure":
        return cls(FiniteStructure.from_json(obj))


# encoding -------------------------------------------------------------------------------


def encode(A: RelationalStructure, pair: DistinguishingPair) -> StarStructure:
    names: list[str] = []
    sort: list[str] = []

    def new(label: str, s: str) -> int:
        names.append(label)
        sort.append(s)
        return len(names) - 1

    edges: set[tuple[int, int]] = set()
    order: set[tuple[int, int]] = set()

    def join(x: int, y: int) -> None:
        edges.add((x, y))
        edges.add((y, x))

    n = len(A.universe)
    a_nodes = [new(f"a:{u}", "A") for u in A.universe]
    l_nodes = []
    for i, (name, _) in enumerate(A.symbols, start=1):
        r = new(f"r:{i}", "L")
        l_nodes.append(r)
        cycle = [new(f"c:{i}.{j}", "Lstar") for j in range(i + 1)]
        for j, c in enumerate(cycle):
            join(c, cycle[(j + 1) % len(cycle)])
            join(r, c)
    origin: dict[tuple, int] = {}
    for arity in sorted({a for _, a in A.symbols}):
        for tup in itertools.product(range(n), repeat=arity):
            tag = ".".join(map(str, tup))
            cyc = [new(f"u:{tag}/{j}", "U") for j in range(arity)]
            for j, u in enumerate(cyc):
                edges.add((u, cyc[(j + 1) % arity]))
                join(u, a_nodes[tup[j]])
            origin[tup] = cyc[0]
    blocks = {}
    for k, (name, arity) in enumerate(A.symbols):
        for tup in itertools.product(range(n), repeat=arity):
            size = pair.c2_size if tup in A.tables[name] else pair.c1_size
            tag = ".".join(map(str, tup))
            block = [new(f"t:{k + 1}/{tag}/{j}", "T") for j in range(size)]
            for j, t in enumerate(block):
                join(t, l_nodes[k])
                join(t, origin[tup])
                order.update((t, s) for s in block[j + 1:])
            blocks[(k, tup)] = block
    N = len(names)
    rels = {s: np.array([x == s for x in sort], dtype=bool) for s in SORTS}
    E = np.zeros((N, N), dtype=bool)
    lt = np.zeros((N, N), dtype=bool)
    if edges:
        E[tuple(np.array(sorted(edges)).T)] = True
    if order:
        lt[tuple(np.array(sorted(order)).T)] = True
    rels["E"] = E
    rels["lt"] = lt
    return StarStructure(FiniteStructure(names, rels), blocks)


# invariants ----------------------------------------------------------------------------------


@dataclass
class StarReport:
    results: dict[str, list[str]]

    @property
    def ok(self) -> bool:
        return not any(self.results.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.results.items() if v]

    def to_json(self) -> dict:
        return {"ok": self.ok,
                "invariants": {k: {"pass": not v, "failures": v[:10]}
                               for k, v in self.results.items()}}


def _components(nodes: Sequence[int], adj: np.ndarray) -> list[list[int]]:
    """Connected components of the symmetric closure of ``adj`` on ``nodes``."""
    nodes = list(nodes)
    inside = set(nodes)
    sym = adj | adj.T
    seen: set[int] = set()
    out = []
    for x in nodes:
        if x in seen:
            continue
        comp, stack = [], [x]
        seen.add(x)
        while stack:
            y = stack.pop()
            comp.append(y)
            for z in np.flatnonzero(sym[y]).tolist():
                if z in inside and z not in seen:
                    seen.add(z)
                    stack.append(z)
        out.append(sorted(comp))
    return out


def _star_parts(S: StarStructure) -> tuple[dict, StarReport]:
    """Check every invariant and collect the parsed pieces the decoder needs."""
    st = S.structure
    res: dict[str, list[str]] = {k: [] for k in (
        "sorts_partition", "lstar_cycles", "u_cycles", "u_to_a", "blocks",
        "block_orders", "block_coverage")}
    missing = [k for k in SORTS + ("E", "lt") if k not in st.relations]
    if missing:
        res["sorts_partition"].append(f"missing relations {missing}")
        return {}, StarReport(res)
    E, lt = st.relations["E"], st.relations["lt"]
    sorts = {s: np.flatnonzero(st.relations[s]) for s in SORTS}
    count = np.sum([st.relations[s].astype(int) for s in SORTS], axis=0)
    for x in np.flatnonzero(count != 1).tolist():
        res["sorts_partition"].append(f"element {st.universe[x]} lies in {count[x]} sorts")
    if res["sorts_partition"]:
        return {}, StarReport(res)
    sort_of = np.empty(st.size, dtype=object)
    for s, xs in sorts.items():
        sort_of[xs] = s
    name = st.universe

    # symbol nodes and their cycles
    index_of: dict[int, int] = {}
    lstar = sorts["Lstar"]
    lstar_set = set(lstar.tolist())
    owner: dict[int, int] = {}
    for r in sorts["L"].tolist():
        cyc = [c for c in np.flatnonzero(E[r]).tolist() if c in lstar_set]
        comps = _components(cyc, E) if cyc else []
        if len(comps) != 1 or not _is_cycle(comps[0], E):
            res["lstar_cycles"].append(f"{name[r]} is not joined to exactly one cycle")
            continue
        for c in comps[0]:
            if c in owner:
                res["lstar_cycles"].append(f"{name[c]} belongs to two cycles")
            owner[c] = r
        index_of[r] = len(comps[0]) - 1
    for c in lstar.tolist():
        if c not in owner:
            res["lstar_cycles"].append(f"{name[c]} is on no symbol's cycle")
    if sorted(index_of.values()) != list(range(1, len(index_of) + 1)):
        res["lstar_cycles"].append(f"cycle lengths {sorted(i + 1 for i in index_of.values())} "
                                   "are not 2, 3, ... without gaps")

    # tuple cycles
    U = sorts["U"]
    u_set = set(U.tolist())
    a_set = set(sorts["A"].tolist())
    t_set = set(sorts["T"].tolist())
    nxt: dict[int, int] = {}
    coord: dict[int, int] = {}
    for u in U.tolist():
        succ = [v for v in np.flatnonzero(E[u]).tolist() if v in u_set]
        if len(succ) != 1:
            res["u_cycles"].append(f"{name[u]} has {len(succ)} successors in U")
            continue
        nxt[u] = succ[0]
        a_nbrs = [v for v in np.flatnonzero(E[u]).tolist() if v in a_set]
        if len(a_nbrs) != 1 or not E[a_nbrs[0], u]:
            res["u_to_a"].append(f"{name[u]} is not joined to exactly one element of A")
        else:
            coord[u] = a_nbrs[0]
    preds = {}
    for u, v in nxt.items():
        if v in preds:
            res["u_cycles"].append(f"{name[v]} has two predecessors in U")
        preds[v] = u
    cycles: dict[int, list[int]] = {}  # origin -> cycle from the origin
    seen: set[int] = set()
    for u in U.tolist():
        if u in seen or u not in nxt:
            continue
        cyc = [u]
        while nxt.get(cyc[-1], u) != u and len(cyc) <= len(U):
            cyc.append(nxt[cyc[-1]])
        seen.update(cyc)
        if nxt.get(cyc[-1]) != u:
            res["u_cycles"].append(f"{name[u]} is not on a closed cycle")
            continue
        heads = [v for v in cyc if any(t in t_set for t in np.flatnonzero(E[v]).tolist())]
        if len(heads) != 1:
            res["u_cycles"].append(f"cycle through {name[u]} has {len(heads)} nodes joined to T")
            continue
        k = cyc.index(heads[0])
        cycles[heads[0]] = cyc[k:] + cyc[:k]
    tuples = {}
    for o, cyc in cycles.items():
        if all(v in coord for v in cyc):
            tuples[o] = tuple(coord[v] for v in cyc)
    if len(set(tuples.values())) != len(tuples):
        res["u_cycles"].append("two cycles code the same tuple")

    # blocks
    groups: dict[tuple[int, int], list[int]] = {}
    for t in sorts["T"].tolist():
        nb = np.flatnonzero(E[t] & E[:, t]).tolist()
        rs = [v for v in nb if sort_of[v] == "L"]
        us = [v for v in nb if sort_of[v] == "U"]
        if len(rs) != 1 or len(us) != 1 or us[0] not in cycles:
            res["blocks"].append(f"{name[t]} is not joined to one symbol and one cycle origin")
            continue
        groups.setdefault((rs[0], us[0]), []).append(t)
    in_block = np.full(st.size, -1)
    for k, members in enumerate(groups.values()):
        in_block[members] = k
    for x, y in zip(*np.nonzero(lt)):
        if in_block[x] < 0 or in_block[x] != in_block[y]:
            res["block_orders"].append(f"order relates {name[x]} and {name[y]} across blocks")
    for (r, o), members in groups.items():
        sub = lt[np.ix_(members, members)]
        below = sub.sum(axis=0)
        if (np.diag(sub).any() or (sub & sub.T).any()
                or sorted(below.tolist()) != list(range(len(members)))
                or not _transitive(sub)):
            res["block_orders"].append(f"block of {name[r]} at {name[o]} is not linearly ordered")

    # each symbol has a block for every tuple of one common arity
    n_a = len(a_set)
    for r in index_of:
        lengths = {len(cycles[o]) for (s, o) in groups if s == r}
        if len(lengths) != 1:
            res["block_coverage"].append(f"{name[r]} has blocks for tuples of lengths {sorted(lengths)}")
            continue
        arity = lengths.pop()
        got = sorted(tuples[o] for (s, o) in groups if s == r and o in tuples)
        if got != sorted(itertools.product(sorted(a_set), repeat=arity)):
            res["block_coverage"].append(f"{name[r]} lacks blocks for some {arity}-tuples")
    if n_a == 0:
        res["block_coverage"].append("A is empty")
    parts = {"index_of": index_of, "A": sorted(a_set), "tuples": tuples, "groups": groups}
    return parts, StarReport(res)


def _is_cycle(comp: list[int], E: np.ndarray) -> bool:
    sub = E[np.ix_(comp, comp)]
    if len(comp) == 2:
        return bool(sub[0, 1] and sub[1, 0] and not sub[0, 0] and not sub[1, 1])
    return len(comp) >= 3 and (sub == sub.T).all() and (sub.sum(axis=1) == 2).all() \
        and not np.diag(sub).any()


def _transitive(sub: np.ndarray) -> bool:
    m = sub.astype(np.int64)
    return bool(((m @ m > 0) <= sub).all())


def verify_star(S: StarStructure) -> StarReport:
    return _star_parts(S)[1]


# decoding -------------------------------------------------------------------------------------


def decode(S: StarStructure, pair: DistinguishingPair) -> RelationalStructure:
    """Rebuild the coded structure using only the relations of ``S``."""
    parts, report = _star_parts(S)
    if not report.ok:
        bad = report.failed()[0]
        raise MalformedStar(bad, report.results[bad][0])
    names = S.structure.universe
    a_nodes = parts["A"]
    a_pos = {a: i for i, a in enumerate(a_nodes)}
    symbols_by_index = sorted(parts["index_of"].items(), key=lambda kv: kv[1])
    symbols, tables = [], {}
    for r, i in symbols_by_index:
        rel_name = f"R{i}"
        rows = [(o, m) for (s, o), m in parts["groups"].items() if s == r]
        arity = len(parts["tuples"][rows[0][0]]) if rows else 1
        symbols.append((rel_name, arity))
        truth = set()
        for o, members in rows:
            if len(members) == pair.c2_size:
                truth.add(tuple(a_pos[a] for a in parts["tuples"][o]))
            elif len(members) != pair.c1_size:
                raise MalformedStar("block_sizes",
                                    f"block at {names[o]} has size {len(members)}, "
                                    f"not {pair.c1_size} or {pair.c2_size}")
        tables[rel_name] = truth
    return RelationalStructure([names[a] for a in a_nodes], symbols, tables)


def isomorphic(A: RelationalStructure, B: RelationalStructure) -> bool:
    """Same arities in the same symbol order, and isomorphic universes."""
    if [a for _, a in A.symbols] != [a for _, a in B.symbols]:
        return False
    return find_isomorphism(A.to_finite(), B.to_finite()) is not None


def random_relational(rng, max_size: int = 5, max_symbols: int = 3,
                      max_arity: int = 2, density: float = 0.4) -> RelationalStructure:
    n = rng.randint(1, max_size)
    symbols = [(f"P{k}", rng.randint(1, max_arity)) for k in range(rng.randint(1, max_symbols))]
    tables = {name: {t for t in itertools.product(range(n), repeat=arity) if rng.random() < density}
              for name, arity in symbols}
    return RelationalStructure([str(i) for i in range(n)], symbols, tables)
