"""Explicit finite first-order structures and symmetry search.

Elements are integers ``0..N-1`` with display names in ``universe``.
Relations are boolean arrays of shape ``(N,)*arity``; functions are integer
arrays of shape ``(N,)*arity``.

A function name listed in ``indexed`` is a family of unary operations
``f_a`` parametrised by an element ``a`` (the table row).  The parameter
is part of the symbol, so automorphisms must satisfy
``g(f_a(x)) = f_a(g(x))`` with ``a`` left alone.

Symmetry search is individualisation/refinement: colour refinement over the
unary operations and relations of arity <= 2, then branch on a smallest
non-singleton colour class.  Every candidate map is checked against all
tables before it is accepted, so the refinement only prunes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

__all__ = ["FiniteStructure", "SearchCapExceeded", "refine_colors",
           "automorphism_group", "find_isomorphism", "is_isomorphism"]


class SearchCapExceeded(RuntimeError):
    pass


@dataclass
class FiniteStructure:
    universe: list[str]
    relations: dict[str, np.ndarray] = field(default_factory=dict)
    functions: dict[str, np.ndarray] = field(default_factory=dict)
    indexed: frozenset = frozenset()

    def __post_init__(self):
        n = len(self.universe)
        if n == 0:
            raise ValueError("universe must be nonempty")
        for name, tab in self.relations.items():
            tab = np.asarray(tab, dtype=bool)
            if any(d != n for d in tab.shape):
                raise ValueError(f"relation {name} has shape {tab.shape}, universe {n}")
            self.relations[name] = tab
        for name, tab in self.functions.items():
            tab = np.asarray(tab, dtype=np.int64)
            if tab.ndim == 0 or any(d != n for d in tab.shape):
                raise ValueError(f"function {name} has shape {tab.shape}, universe {n}")
            if tab.size and (tab.min() < 0 or tab.max() >= n):
                raise ValueError(f"function {name} leaves the universe")
            self.functions[name] = tab
        for name in self.indexed:
            if self.functions[name].ndim != 2:
                raise ValueError(f"indexed family {name} needs a 2-d table")
        self.indexed = frozenset(self.indexed)

    @property
    def size(self) -> int:
        return len(self.universe)

    def unary_rows(self) -> np.ndarray:
        """All unary operations (plain and indexed) stacked as rows."""
        rows = []
        for name in sorted(self.functions):
            tab = self.functions[name]
            if name in self.indexed:
                rows.append(tab)
            elif tab.ndim == 1:
                rows.append(tab[None, :])
        if not rows:
            return np.zeros((0, self.size), dtype=np.int64)
        return np.concatenate(rows, axis=0)

    @property
    def simple(self) -> bool:
        """Only unary (or indexed) operations and relations of arity <= 2."""
        return (all(t.ndim <= 2 for t in self.relations.values())
                and all(t.ndim == 1 or n in self.indexed for n, t in self.functions.items()))

    # json -------------------------------------------------------------------

    def to_json(self) -> dict:
        funcs = []
        for name in sorted(self.functions):
            tab = self.functions[name]
            rec = {"name": name, "arity": 2 if name in self.indexed else tab.ndim,
                   "table": tab.tolist()}
            if name in self.indexed:
                rec["indexed"] = True
            funcs.append(rec)
        rels = [{"name": name, "arity": tab.ndim, "tuples": np.argwhere(tab).tolist()}
                for name, tab in sorted(self.relations.items())]
        return {"universe": list(self.universe), "functions": funcs, "relations": rels}

    @classmethod
    def from_json(cls, obj: dict) -> "FiniteStructure":
        universe = [str(u) for u in obj["universe"]]
        n = len(universe)
        rels, funcs, indexed = {}, {}, set()
        for rec in obj.get("relations", []):
            tab = np.zeros((n,) * rec["arity"], dtype=bool)
            for tup in rec.get("tuples", []):
                if len(tup) != rec["arity"]:
                    raise ValueError(f"tuple {tup} has wrong arity for {rec['name']}")
                tab[tuple(tup)] = True
            rels[rec["name"]] = tab
        for rec in obj.get("functions", []):
            tab = np.asarray(rec["table"], dtype=np.int64)
            if tab.ndim != rec["arity"]:
                raise ValueError(f"table of {rec['name']} does not match arity {rec['arity']}")
            funcs[rec["name"]] = tab
            if rec.get("indexed"):
                indexed.add(rec["name"])
        return cls(universe, rels, funcs, frozenset(indexed))

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    def permuted(self, perm: np.ndarray) -> "FiniteStructure":
        """Image structure under the relabelling ``x -> perm[x]``.

        Indexed parameters are relabelled too, so the result is a genuine
        copy; it is the identity only when ``perm`` fixes every parameter.
        """
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        universe = [self.universe[i] for i in inv]
        rels = {}
        for name, tab in self.relations.items():
            rels[name] = tab[np.ix_(*([inv] * tab.ndim))] if tab.ndim else tab
        funcs = {}
        for name, tab in self.functions.items():
            funcs[name] = perm[tab[np.ix_(*([inv] * tab.ndim))]]
        return FiniteStructure(universe, rels, funcs, self.indexed)


# colour refinement ------------------------------------------------------------


def _relabel(sig: np.ndarray) -> np.ndarray:
    _, inv = np.unique(sig, axis=0, return_inverse=True)
    return inv.reshape(-1).astype(np.int64)


def refine_colors(structs: list[FiniteStructure], colors: list[np.ndarray]) -> list[np.ndarray]:
    """Joint stable refinement of colourings of several same-signature
    structures, so equal colours are comparable across structures."""
    sizes = [s.size for s in structs]
    cuts = np.cumsum([0] + sizes)
    unary = [s.unary_rows() for s in structs]
    cur = np.concatenate(colors)
    ncls = len(np.unique(cur))
    while True:
        parts = []
        for k, s in enumerate(structs):
            c = cur[cuts[k]:cuts[k + 1]]
            cols = [c[:, None], c[unary[k]].T]
            for name in sorted(s.relations):
                tab = s.relations[name]
                if tab.ndim == 2:
                    # multisets of neighbour colours, out and in
                    m = int(cur.max()) + 1
                    onehot = np.eye(m, dtype=np.int64)[c]
                    cols.append(tab.astype(np.int64) @ onehot)
                    cols.append(tab.T.astype(np.int64) @ onehot)
                    cols.append(np.diag(tab).astype(np.int64)[:, None])
            parts.append(np.concatenate(cols, axis=1))
        width = max(p.shape[1] for p in parts)
        if any(p.shape[1] != width for p in parts):
            raise ValueError("structures have different signatures")
        new = _relabel(np.concatenate(parts))
        n_new = len(np.unique(new))
        cur = new
        if n_new == ncls:
            break
        ncls = n_new
    return [cur[cuts[k]:cuts[k + 1]] for k in range(len(structs))]


def _initial_colors(s: FiniteStructure) -> np.ndarray:
    cols = [np.zeros((s.size, 1), dtype=np.int64)]
    for name in sorted(s.relations):
        tab = s.relations[name]
        if tab.ndim == 0:
            continue
        idx = np.arange(s.size)
        cols.append(tab[(idx,) * tab.ndim].astype(np.int64)[:, None])
    rows = s.unary_rows()
    if len(rows):
        cols.append((rows == np.arange(s.size)[None, :]).T.astype(np.int64))
    return np.concatenate(cols, axis=1)


def is_isomorphism(s1: FiniteStructure, s2: FiniteStructure, perm: np.ndarray) -> bool:
    """Does ``x -> perm[x]`` carry ``s1`` onto ``s2``?"""
    perm = np.asarray(perm)
    if sorted(perm.tolist()) != list(range(s2.size)) or s1.size != s2.size:
        return False
    if set(s1.relations) != set(s2.relations) or set(s1.functions) != set(s2.functions):
        return False
    for name, tab in s1.relations.items():
        other = s2.relations[name]
        if tab.ndim != other.ndim:
            return False
        if tab.ndim and not np.array_equal(other[np.ix_(*([perm] * tab.ndim))], tab):
            return False
    for name, tab in s1.functions.items():
        other = s2.functions[name]
        if tab.shape != other.shape:
            return False
        if name in s1.indexed:
            # parameters are symbols: row a of s1 must match row a of s2
            if not np.array_equal(other[:, perm], perm[tab]):
                return False
        elif not np.array_equal(other[np.ix_(*([perm] * tab.ndim))], perm[tab]):
            return False
    return True


def _search(s1: FiniteStructure, s2: FiniteStructure, c1: np.ndarray, c2: np.ndarray,
            find_all: bool, cap: int, counter: list[int]) -> Iterator[np.ndarray]:
    c1, c2 = refine_colors([s1, s2], [c1, c2])
    if not np.array_equal(np.bincount(c1, minlength=c1.max() + 1),
                          np.bincount(c2, minlength=c1.max() + 1)):
        return
    counts = np.bincount(c1)
    if counts.max() == 1:
        counter[0] += 1
        if counter[0] > cap:
            raise SearchCapExceeded(f"more than {cap} search leaves")
        perm = np.empty(s1.size, dtype=np.int64)
        perm[np.arange(s1.size)] = np.argsort(c2)[c1]
        if is_isomorphism(s1, s2, perm):
            yield perm
        return
    target = int(np.flatnonzero(counts == counts[counts > 1].min())[0])
    x = int(np.flatnonzero(c1 == target)[0])
    fresh = int(max(c1.max(), c2.max())) + 1
    for y in np.flatnonzero(c2 == target):
        n1, n2 = c1.copy(), c2.copy()
        n1[x] = fresh
        n2[y] = fresh
        found = False
        for perm in _search(s1, s2, n1, n2, find_all, cap, counter):
            found = True
            yield perm
            if not find_all:
                return
        if found and not find_all:
            return


def find_isomorphism(s1: FiniteStructure, s2: FiniteStructure,
                     cap: int = 200_000) -> np.ndarray | None:
    if s1.size != s2.size:
        return None
    i1, i2 = _initial_colors(s1), _initial_colors(s2)
    if i1.shape[1] != i2.shape[1]:
        return None
    joint = _relabel(np.concatenate([i1, i2]))  # one labelling for both sides
    c1, c2 = joint[:s1.size], joint[s1.size:]
    for perm in _search(s1, s2, c1, c2, False, cap, [0]):
        return perm
    return None


def automorphism_group(s: FiniteStructure, cap: int = 200_000,
                       initial: np.ndarray | None = None) -> list[np.ndarray]:
    """All automorphisms, each as an image array.

    ``initial`` is an optional invariant colouring to start from; it must be
    preserved by every automorphism (for instance a back-and-forth class
    labelling), otherwise automorphisms are lost.
    """
    c = _initial_colors(s)
    c = _relabel(c) if initial is None else _relabel(np.column_stack([c, initial]))
    return list(_search(s, s, c, c.copy(), True, cap, [0]))
