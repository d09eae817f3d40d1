"""Back-and-forth relations, orbits and Scott ranks on finite structures.

Tuples of length ``l`` over a universe of size ``N`` are numbered in base
``N`` (first coordinate most significant), so the extensions ``(a, c)`` of
tuple number ``i`` are exactly the numbers ``i*N .. i*N+N-1``.  A partition
is an integer class label per tuple.

* level 0: equal quantifier-free types;
* level ``b+1``: the set of level-``b`` classes of one-point extensions
  must agree (for every ``c`` some ``d`` and back).

On a finite structure the relations reach the orbit partition, and the
Scott rank of a tuple is the first level whose class equals its orbit.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .morozov import (
    GroupElement,
    MorozovStructure,
    derived_rank,
    f_apply,
    id_element,
    pred_power,
    sym_diff,
    zero_equivalent,
)
from .ordinal import INF, OMEGA, Ordinal, RankValue, cnf_mul, rank_ge
from .structure import FiniteStructure, automorphism_group
from .tree import Address, LazyTree

__all__ = [
    "CapExceeded",
    "tuples_of",
    "tuple_index",
    "zero_types",
    "refine_step",
    "same_partition",
    "orbit_labels",
    "EqvClassification",
    "eqv_classify",
    "orbits",
    "scott_rank_tuple",
    "tuple_scott_ranks",
    "scott_rank_structure",
    "Lemma34Report",
    "lemma34_check",
    "rank_criterion",
    "GameResult",
    "GameReferee",
    "bounded_game_check",
]

MAX_TUPLES = 1 << 22


class CapExceeded(ValueError):
    pass


def tuples_of(N: int, length: int) -> np.ndarray:
    if N ** length > MAX_TUPLES:
        raise CapExceeded(f"{N}^{length} tuples exceed the cap of {MAX_TUPLES}")
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((N,) * length).reshape(length, -1).T
    return grids.astype(np.int64)


def tuple_index(tup: Sequence[int], N: int) -> int:
    i = 0
    for x in tup:
        i = i * N + int(x)
    return i


def _dense(labels: np.ndarray) -> np.ndarray:
    if labels.ndim == 1:
        _, inv = np.unique(labels, return_inverse=True)
    else:
        _, inv = np.unique(labels, axis=0, return_inverse=True)
    return inv.reshape(-1).astype(np.int64)


def same_partition(p: np.ndarray, q: np.ndarray) -> bool:
    if p.shape != q.shape:
        return False
    joint = len(np.unique(p * (int(q.max()) + 1) + q))
    return joint == len(np.unique(p)) == len(np.unique(q))


# quantifier-free types ------------------------------------------------------------


class _Closures:
    """Per-element closure under the unary operations, in a canonical
    breadth-first order, plus element and pair type labels."""

    def __init__(self, S: FiniteStructure):
        self.S = S
        self.rows = S.unary_rows()
        N = S.size
        self.order: list[np.ndarray] = []
        keys = []
        bins = [t for t in S.relations.values() if t.ndim == 2]
        uns = [t for t in S.relations.values() if t.ndim == 1]
        nullary = [bool(t) for t in S.relations.values() if t.ndim == 0]
        for x in range(N):
            order = [x]
            pos = {x: 0}
            table = []
            i = 0
            while i < len(order):
                imgs = self.rows[:, order[i]]
                for v in imgs.tolist():
                    if v not in pos:
                        pos[v] = len(order)
                        order.append(v)
                table.append([pos[v] for v in imgs.tolist()])
                i += 1
            e = np.array(order, dtype=np.int64)
            self.order.append(e)
            key = [len(order), np.array(table, dtype=np.int64).tobytes(), tuple(nullary)]
            key += [t[e].tobytes() for t in uns]
            key += [t[np.ix_(e, e)].tobytes() for t in bins]
            keys.append(tuple(key))
        ids: dict = {}
        self.etype = np.array([ids.setdefault(k, len(ids)) for k in keys], dtype=np.int64)
        self._bins = bins
        self._ptype: np.ndarray | None = None

    @property
    def ptype(self) -> np.ndarray:
        if self._ptype is None:
            N = self.S.size
            ids: dict = {}
            out = np.empty((N, N), dtype=np.int64)
            for x in range(N):
                e1 = self.order[x]
                for y in range(N):
                    e2 = self.order[y]
                    key = [self.etype[x], self.etype[y],
                           np.packbits(e1[:, None] == e2[None, :]).tobytes()]
                    for t in self._bins:
                        key.append(t[np.ix_(e1, e2)].tobytes())
                        key.append(t[np.ix_(e2, e1)].tobytes())
                    out[x, y] = ids.setdefault(tuple(key), len(ids))
            self._ptype = out
        return self._ptype


def _joint_closure_key(S: FiniteStructure, tup: Sequence[int]) -> tuple:
    """Canonical description of the substructure generated by a tuple,
    for arbitrary arities (slow; small structures only)."""
    rows = S.unary_rows()
    order: list[int] = []
    pos: dict[int, int] = {}
    starts = []
    for x in tup:
        if x not in pos:
            pos[x] = len(order)
            order.append(x)
        starts.append(pos[x])
    others = [(name, tab) for name, tab in sorted(S.functions.items())
              if name not in S.indexed and tab.ndim != 1]
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(order):
            for v in rows[:, order[i]].tolist():
                if v not in pos:
                    pos[v] = len(order)
                    order.append(v)
                    changed = True
            i += 1
        for _, tab in others:
            for args in itertools.product(range(len(order)), repeat=tab.ndim):
                v = int(tab[tuple(order[a] for a in args)])
                if v not in pos:
                    pos[v] = len(order)
                    order.append(v)
                    changed = True
    e = np.array(order, dtype=np.int64)
    relabel = np.vectorize(lambda v: pos[int(v)], otypes=[np.int64])
    key = [tuple(starts), len(order), relabel(rows[:, e]).tobytes() if len(rows) else b""]
    for name, tab in sorted(S.functions.items()):
        if name in S.indexed or tab.ndim == 1:
            continue
        img = tab[np.ix_(*([e] * tab.ndim))]
        key.append(relabel(img).tobytes())
    for name, tab in sorted(S.relations.items()):
        key.append(tab[np.ix_(*([e] * tab.ndim))].tobytes() if tab.ndim else bool(tab))
    return tuple(key)


def zero_types(S: FiniteStructure, length: int, closures: _Closures | None = None) -> np.ndarray:
    """Quantifier-free type label of every tuple of the given length."""
    T = tuples_of(S.size, length)
    if length == 0:
        return np.zeros(1, dtype=np.int64)
    if S.simple:
        cl = closures or _Closures(S)
        cols = [cl.etype[T[:, i]] for i in range(length)]
        if length > 1:
            P = cl.ptype
            cols += [P[T[:, i], T[:, j]] for i in range(length) for j in range(i + 1, length)]
        return _dense(np.column_stack(cols))
    ids: dict = {}
    return np.array([ids.setdefault(_joint_closure_key(S, row), len(ids)) for row in T.tolist()],
                    dtype=np.int64)


def refine_step(prev: np.ndarray, ext: np.ndarray, N: int) -> np.ndarray:
    """Next level of a partition of ``l``-tuples from the current level on
    ``l+1``-tuples: keep the class and compare extension class *sets*."""
    M = np.sort(ext.reshape(-1, N), axis=1)
    if N > 1:
        dup = M[:, 1:] == M[:, :-1]
        tail = M[:, 1:]
        tail[dup] = -1
        M = np.sort(M, axis=1)
    return _dense(np.column_stack([prev, M]))


def orbit_labels(group: Sequence[np.ndarray], N: int, length: int) -> np.ndarray:
    """Orbit partition of tuples: each tuple labelled by its least image."""
    T = tuples_of(N, length)
    if length == 0:
        return np.zeros(1, dtype=np.int64)
    weights = N ** np.arange(length - 1, -1, -1, dtype=np.int64)
    best = T @ weights
    for g in group:
        best = np.minimum(best, g[T] @ weights)
    return _dense(best)


# classification ---------------------------------------------------------------------


@dataclass
class EqvClassification:
    structure: FiniteStructure
    L: int
    group: list
    beta_star: int = 0
    _levels: dict = field(default_factory=dict)
    _orbits: dict = field(default_factory=dict)
    _closures: _Closures | None = None

    def orbits(self, length: int) -> np.ndarray:
        if length not in self._orbits:
            self._orbits[length] = orbit_labels(self.group, self.structure.size, length)
        return self._orbits[length]

    def classes(self, beta: int, length: int) -> np.ndarray:
        """Partition of ``length``-tuples by the level-``beta`` relation."""
        key = (beta, length)
        if key in self._levels:
            return self._levels[key]
        if beta == 0:
            if self._closures is None and self.structure.simple:
                self._closures = _Closures(self.structure)
            out = zero_types(self.structure, length, self._closures)
        else:
            prev = self.classes(beta - 1, length)
            if same_partition(prev, self.orbits(length)):
                out = prev
            else:
                out = refine_step(prev, self.classes(beta - 1, length + 1), self.structure.size)
        self._levels[key] = out
        return out

    def to_json(self) -> dict:
        return {
            "beta_star": self.beta_star,
            "L": self.L,
            "partitions": {str(b): {str(l): self.classes(b, l).tolist()
                                    for l in range(1, self.L + 1)}
                           for b in range(self.beta_star + 1)},
        }


def eqv_classify(S: FiniteStructure, L: int, group: list | None = None,
                 max_beta: int | None = None) -> EqvClassification:
    """Levels of the back-and-forth hierarchy on tuples of length <= L,
    up to the first level where every class is an orbit."""
    if group is None:
        group = automorphism_group(S)
    ec = EqvClassification(S, L, group)
    limit = max_beta if max_beta is not None else S.size + L + 1
    for beta in range(limit + 1):
        if all(same_partition(ec.classes(beta, l), ec.orbits(l)) for l in range(1, L + 1)):
            ec.beta_star = beta
            return ec
    raise CapExceeded(f"no stabilisation below level {limit}")


def orbits(S: FiniteStructure, L: int, group: list | None = None) -> np.ndarray:
    if group is None:
        group = automorphism_group(S)
    return orbit_labels(group, S.size, L)


def tuple_scott_ranks(ec: EqvClassification, length: int) -> np.ndarray:
    """Scott rank of every tuple of the given length, vectorised."""
    orb = ec.orbits(length)
    orb_size = np.bincount(orb)[orb]
    ranks = np.full(len(orb), -1, dtype=np.int64)
    beta = 0
    while (ranks < 0).any():
        cls = ec.classes(beta, length)
        hit = (np.bincount(cls)[cls] == orb_size) & (ranks < 0)
        ranks[hit] = beta
        beta += 1
        if beta > ec.structure.size + ec.L + 2:
            raise CapExceeded("tuple ranks did not settle")
    return ranks


def scott_rank_tuple(S: FiniteStructure, tup: Sequence[int],
                     ec: EqvClassification | None = None) -> Ordinal:
    if ec is None or ec.L < len(tup):
        ec = eqv_classify(S, max(1, len(tup)))
    if not tup:
        return Ordinal.of(0)
    return Ordinal.of(int(tuple_scott_ranks(ec, len(tup))[tuple_index(tup, S.size)]))


def scott_rank_structure(S: FiniteStructure, L: int | None = None,
                         ec: EqvClassification | None = None) -> Ordinal:
    """Least ordinal above the ranks of all tuples of length <= L
    (default L = |universe|)."""
    L = S.size if L is None else L
    if ec is None or ec.L < L:
        ec = eqv_classify(S, L)
    top = max(int(tuple_scott_ranks(ec, l).max()) for l in range(1, L + 1))
    return Ordinal.of(top + 1)


# statements about A(T) -------------------------------------------------------------------


@dataclass
class Lemma34Report:
    ok: bool
    pairs_checked: int = 0
    beta_star: int = 0
    counterexamples: list = field(default_factory=list)
    rank_mismatches: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "pairs_checked": self.pairs_checked,
                "beta_star": self.beta_star,
                "counterexamples": self.counterexamples[:20],
                "rank_mismatches": self.rank_mismatches[:20]}


def lemma34_check(M: MorozovStructure, L: int = 2,
                  ec: EqvClassification | None = None) -> Lemma34Report:
    """For all ``a ~0 b`` of length <= L, with ``n`` the top level and
    ``g = f(a_i, b_i)`` at a top coordinate, check at every level that

        a ~ b   <=>   (a, id_n) ~ (b, g)   <=>   id_n ~ g,

    and that every tuple has the Scott rank of ``id_n``.
    """
    V = M.view()
    N = V.size
    F = M.f_table
    if ec is None or ec.L < L + 1:
        ec = eqv_classify(V, L + 1)
    report = Lemma34Report(True, beta_star=ec.beta_star)
    ids = np.array([M.id_index(n) for n in range(M.level_bound + 1)])
    id_ranks = tuple_scott_ranks(ec, 1)[ids]
    for length in range(1, L + 1):
        T = tuples_of(N, length)
        lv = M.level_of[T]
        top = lv.argmax(axis=1)
        n = lv.max(axis=1)
        zero = ec.classes(0, length)
        order = np.argsort(zero, kind="stable")
        bounds = np.flatnonzero(np.diff(zero[order])) + 1
        groups = np.split(order, bounds)
        ai = np.concatenate([np.repeat(gr, len(gr)) for gr in groups])
        bi = np.concatenate([np.tile(gr, len(gr)) for gr in groups])
        report.pairs_checked += len(ai)
        t = top[ai]
        g = F[T[ai, t], T[bi, t]]
        idn = ids[n[ai]]
        for beta in range(ec.beta_star + 2):
            c1 = ec.classes(beta, length)
            c2 = ec.classes(beta, length + 1)
            c3 = ec.classes(beta, 1)
            s1 = c1[ai] == c1[bi]
            s2 = c2[ai * N + idn] == c2[bi * N + g]
            s3 = c3[idn] == c3[g]
            bad = np.flatnonzero((s1 != s2) | (s2 != s3))
            for k in bad[:5]:
                report.counterexamples.append({
                    "beta": beta,
                    "a": [V.universe[x] for x in T[ai[k]]],
                    "b": [V.universe[x] for x in T[bi[k]]],
                    "statements": [bool(s1[k]), bool(s2[k]), bool(s3[k])]})
        ranks = tuple_scott_ranks(ec, length)
        want = id_ranks[n]
        for k in np.flatnonzero(ranks != want)[:5]:
            report.rank_mismatches.append({"tuple": [V.universe[x] for x in T[k]],
                                           "rank": int(ranks[k]), "id_rank": int(want[k])})
    report.ok = not report.counterexamples and not report.rank_mismatches
    return report


def rank_criterion(a: GroupElement, beta: Ordinal | int, ranks: dict) -> bool:
    """Decide ``a ~beta id_n`` in A(T) from tree ranks: rank(a) >= w*beta.

    ``id_n`` itself lies on the infinite chain of ids, so its rank is
    infinite and the criterion always holds.
    """
    threshold = cnf_mul(OMEGA, Ordinal.of(beta))
    if a.is_id:
        return True
    return rank_ge(derived_rank(a, ranks), threshold)


# bounded games on ranked lazy trees ---------------------------------------------------------


@dataclass
class GameResult:
    outcome: str                 # consistent | counterexample | inconclusive
    verdict: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"outcome": self.outcome, "verdict": self.verdict, "detail": self.detail}


_OK = ("consistent", "")


class GameReferee:
    """Plays the level-``beta`` game between ``a`` and ``id_n`` on a tree
    whose nodes carry exact rank anchors.

    When the rank criterion holds, the defender answers a challenge ``b``
    at level ``m = n + k`` with ``b + a*`` where ``a*`` is a ``k``-th
    successor of ``a`` of rank >= ``w*(beta-1)`` found through the anchors,
    and challenges at levels ``m <= n`` by translation ``f_a(b)``.  When it
    fails, with rank ``w*gamma + j``, the challenger plays ``id_{n+j+1}``
    and every candidate answer (pool elements and all constructed
    successors) is refuted, recursively where needed.
    """

    def __init__(self, tree: LazyTree, width: int = 3, subset_cap: int = 10,
                 pool_depth: int = 6, construct_width: int = 64, combo_cap: int = 64,
                 root_width: int | None = None, answer_sample: int = 8):
        self.tree = tree
        # defender answers are translations, correct by construction; only
        # this many per level are re-checked at level 0
        self.answer_sample = answer_sample
        self.width = width
        self.root_width = root_width or width
        self.construct_width = construct_width
        self.combo_cap = combo_cap
        self._info: dict[Address, object] = {(): tree.root_info}
        self._kids: dict[Address, list[Address]] = {}
        self._exhausted: set[Address] = set()
        self.pools: dict[int, list[GroupElement]] = {}
        layer: list[Address] = [()]
        for m in range(1, pool_depth + 1):
            layer = [c for u in layer for c in self.children(u, self._width_at(len(u)))]
            sizes = range(len(layer) + 1) if len(layer) <= subset_cap else range(3)
            self.pools[m] = [GroupElement(m, frozenset(c)) for r in sizes
                             for c in itertools.combinations(layer, r)]
        self._defend_memo: dict = {}
        self._challenge_memo: dict = {}

    def _width_at(self, level: int) -> int:
        return self.root_width if level == 0 else self.width

    # lazy tree access ------------------------------------------------------------

    def anchor(self, addr: Address) -> RankValue:
        return self.tree.anchor_of(self._info_of(addr))

    def _info_of(self, addr: Address):
        if addr not in self._info:
            parent = addr[:-1]
            self.children(parent, addr[-1] + 1)
        return self._info[addr]

    def children(self, addr: Address, limit: int) -> list[Address]:
        known = self._kids.get(addr, [])
        if len(known) < limit and addr not in self._exhausted:
            kids = list(itertools.islice(iter(self.tree.expand(self._info_of(addr))), limit))
            known = []
            for i, k in enumerate(kids):
                self._info[addr + (i,)] = k
                known.append(addr + (i,))
            self._kids[addr] = known
            if len(known) < limit:
                self._exhausted.add(addr)
        return known[:limit]

    def rank(self, a: GroupElement) -> RankValue:
        if a.is_id:
            return INF
        return min(self.anchor(m) for m in a.members)

    # proof-constructed witnesses -------------------------------------------------------

    def _deep_node(self, t: Address, k: int, floor: Ordinal) -> Address | None:
        """A depth-``k`` descendant of ``t`` with anchor >= ``floor``."""
        for step in range(k, 0, -1):
            need = floor.plus_finite(step - 1)
            for c in self.children(t, self.construct_width):
                if rank_ge(self.anchor(c), need):
                    t = c
                    break
            else:
                return None
        return t

    def high_successor(self, x: GroupElement, k: int, floor: Ordinal) -> GroupElement | None:
        if x.is_id:
            return id_element(x.level + k)
        picks = []
        for t in sorted(x.members):
            d = self._deep_node(t, k, floor)
            if d is None:
                return None
            picks.append(d)
        return GroupElement(x.level + k, frozenset(picks))

    def _descendants(self, t: Address, k: int) -> list[Address]:
        layer = [t]
        for _ in range(k):
            layer = [c for u in layer for c in self.children(u, self._width_at(len(u)))]
        return layer

    def successor_candidates(self, x: GroupElement, k: int) -> list[GroupElement]:
        m = x.level + k
        out = {c for c in self.pools.get(m, []) if pred_power(c, k) == x}
        options = [self._descendants(t, k) for t in sorted(x.members)]
        if all(options):
            for combo in itertools.islice(itertools.product(*options), self.combo_cap):
                if len(set(combo)) == len(combo):
                    out.add(GroupElement(m, frozenset(combo)))
            greedy = self.high_successor(x, k, Ordinal.of(0))
            if greedy is not None:
                out.add(greedy)
        return sorted(out, key=lambda c: c.name())

    # strategies ---------------------------------------------------------------------------

    def defend(self, x: GroupElement, beta: int) -> tuple[str, str]:
        key = (x, beta)
        if key in self._defend_memo:
            return self._defend_memo[key]
        self._defend_memo[key] = _OK  # provisional; recursion is well-founded in beta
        res = self._defend(x, beta)
        self._defend_memo[key] = res
        return res

    def _defend(self, x: GroupElement, beta: int) -> tuple[str, str]:
        n = x.level
        idn = id_element(n)
        if not zero_equivalent([x], [idn]):
            return "counterexample", f"{x} and id_{n} differ at level 0"
        if beta == 0:
            return _OK
        gamma = beta - 1
        floor = cnf_mul(OMEGA, Ordinal.of(gamma))
        inconclusive = None
        for m in sorted(self.pools):
            if m <= n:
                for b in self.pools[m][:self.answer_sample]:
                    c = f_apply(x, b)
                    if not (zero_equivalent([x, c], [idn, b]) and zero_equivalent([x, b], [idn, c])):
                        return "counterexample", f"translation answer to {b} fails at level 0"
                res = self.defend(x, gamma)
            else:
                k = m - n
                star = self.high_successor(x, k, floor)
                if star is None:
                    inconclusive = f"no {k}-th successor of {x} with rank >= {floor} within reach"
                    continue
                if not rank_ge(self.rank(star), floor):
                    return "counterexample", f"constructed {star} has rank below {floor}"
                if pred_power(star, k) != x:
                    return "counterexample", f"{star} is not a {k}-th successor of {x}"
                idm = id_element(m)
                for b in self.pools[m][:self.answer_sample]:
                    c = sym_diff(b, star)
                    if not (zero_equivalent([star, x, c], [idm, idn, b])
                            and zero_equivalent([star, x, b], [idm, idn, c])):
                        return "counterexample", f"answer {c} to {b} fails at level 0"
                res = self.defend(star, gamma)
            if res[0] == "counterexample":
                return res
            if res[0] == "inconclusive":
                inconclusive = res[1]
        return ("inconclusive", inconclusive) if inconclusive else _OK

    def challenge(self, x: GroupElement, beta: int) -> tuple[str, str]:
        key = (x, beta)
        if key not in self._challenge_memo:
            self._challenge_memo[key] = self._challenge(x, beta)
        return self._challenge_memo[key]

    def _challenge(self, x: GroupElement, beta: int) -> tuple[str, str]:
        if beta == 0:
            return "counterexample", f"level 0 always holds, but {x} was claimed apart from id"
        gamma = beta - 1
        r = self.rank(x)
        floor = cnf_mul(OMEGA, Ordinal.of(gamma))
        if r is INF or rank_ge(r, cnf_mul(OMEGA, Ordinal.of(beta))):
            return "counterexample", f"{x} has rank {r}, not below w*{beta}"
        if not rank_ge(r, floor):
            return self.challenge(x, gamma)
        j = r.finite_part
        k = j + 1
        n = x.level
        idn, idm = id_element(n), id_element(n + k)
        for c in self.successor_candidates(x, k):
            if not zero_equivalent([x, c], [idn, idm]):
                continue
            if gamma == 0:
                return "counterexample", f"{c} answers the challenge id_{n + k}"
            if rank_ge(self.rank(c), floor):
                return "counterexample", f"{c} answers id_{n + k} with rank {self.rank(c)}"
            res = self.challenge(c, gamma)
            if res[0] != "consistent":
                return res
        return _OK

    def check(self, a: GroupElement, beta: int) -> GameResult:
        verdict = self.rank_criterion(a, beta)
        outcome, detail = self.defend(a, beta) if verdict else self.challenge(a, beta)
        return GameResult(outcome, verdict, detail)

    def rank_criterion(self, a: GroupElement, beta: int) -> bool:
        return a.is_id or rank_ge(self.rank(a), cnf_mul(OMEGA, Ordinal.of(beta)))


def bounded_game_check(tree: LazyTree, a: GroupElement, beta: int,
                       referee: GameReferee | None = None, **kw) -> GameResult:
    if beta > 3:
        raise ValueError("bounded games are limited to beta <= 3")
    referee = referee or GameReferee(tree, pool_depth=a.level + beta + 2, **kw)
    return referee.check(a, beta)
