"""Thin trees from ordinal notations by delayed expansion of limits.

Starting from a notation ``a``, the builder grows a tree ``T`` stage by
stage together with an injective map ``t`` from the labelled tree ``T_a``
into ``T``.  Successor labels pass straight through; a limit-labelled node
is queued and, until its turn comes, its image grows a chain of padding
nodes.  Exactly one queued node begins expansion per stage (FIFO).  Its
attachment node ``tau`` is the chain node at the current stage level, and
from then on ``tau`` receives one new child ``t(sigma_n)`` per stage.

Because attachments begin at distinct stages they sit at distinct levels,
which is what keeps the set of ranks on each level small (order type at
most ``w*n`` on level ``n``).

Ranks in the full infinite tree are known in closed form:

* the attachment of a limit node labelled ``lam`` has rank exactly ``lam``;
* padding and images above it add one per level;
* a successor image adds the offset of the limit at the bottom of its
  successor chain (zero if the chain ends in a zero label).
"""
from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass, field

from .notation import Lim, Notation, Succ, Zero, fundamental_seq, notation_value
from .ordinal import (
    OMEGA,
    MalformedDescription,
    Ordinal,
    RankSetDescription,
    Tail,
    cnf_mul,
    order_type_of_finite_described_set,
)
from .tree import Address, Tree, tree_rank

__all__ = [
    "StagedBuild",
    "build_thin_tree",
    "symbolic_ranks",
    "level_rank_description",
    "check_thin",
    "ThinReport",
    "level_rank_bound",
    "stage_invariant_failures",
    "truncation_failures",
    "sandwich_failures",
]

_LOOKAHEAD_CAP = 10_000


def _addr(a: Address) -> list[int]:
    return list(a)


@dataclass
class Expansion:
    sigma: Address
    tau: Address
    next_n: int
    start_stage: int


class StagedBuild:
    """State of the staged construction after ``stage`` stages."""

    def __init__(self, a: Notation):
        self.a = a
        self.stage = 0
        self.labels: dict[Address, Notation] = {}
        self.t: dict[Address, Address] = {}
        self.t_inv: dict[Address, Address] = {}
        self.pad_owner: dict[Address, Address] = {}
        self.children: dict[Address, list[Address]] = {(): []}
        self.levels: list[list[Address]] = [[()]]
        self.queue: deque[Address] = deque()
        self.chain_end: dict[Address, Address] = {}
        self.expansions: list[Expansion] = []
        self.attach: dict[Address, Address] = {}      # sigma -> tau
        self.attach_sigma: dict[Address, Address] = {}  # tau -> sigma
        self.trace: list[dict] = []
        self._delta: list = []
        self._pads: list = []
        self._place_image((), (), a)

    # node creation --------------------------------------------------------

    def _new_node(self, parent: Address) -> Address:
        addr = parent + (len(self.children[parent]),)
        self.children[parent].append(addr)
        self.children[addr] = []
        while len(self.levels) <= len(addr):
            self.levels.append([])
        self.levels[len(addr)].append(addr)
        return addr

    def _place_image(self, sigma: Address, addr: Address, label: Notation) -> None:
        self.labels[sigma] = label
        self.t[sigma] = addr
        self.t_inv[addr] = sigma
        self._delta.append([_addr(sigma), _addr(addr)])
        if isinstance(label, Lim):
            self.queue.append(sigma)
            self.chain_end[sigma] = addr

    def _extend_once(self, addr: Address) -> Address | None:
        """Give a non-attachment frontier node its single child."""
        if addr in self.t_inv:
            sigma = self.t_inv[addr]
            label = self.labels[sigma]
            if isinstance(label, Zero):
                return None
            if isinstance(label, Succ):
                child = self._new_node(addr)
                self._place_image(sigma + (0,), child, label.child)
                return child
            owner = sigma
        else:
            owner = self.pad_owner[addr]
        child = self._new_node(addr)
        self.pad_owner[child] = owner
        self.chain_end[owner] = child
        self._pads.append(_addr(child))
        return child

    def _grow(self, addr: Address, target: int) -> None:
        while addr is not None and len(addr) < target:
            addr = self._extend_once(addr)

    # stages -----------------------------------------------------------------

    def step(self) -> None:
        s = self.stage
        self._delta, self._pads = [], []
        begun = None
        if self.queue:
            sigma = self.queue.popleft()
            tau = self.chain_end.pop(sigma)
            assert len(tau) == s, "queued chain must reach the stage level"
            self.expansions.append(Expansion(sigma, tau, 0, s + 1))
            self.attach[sigma] = tau
            self.attach_sigma[tau] = sigma
            begun = {"sigma": _addr(sigma), "tau": _addr(tau)}
        for addr in list(self.levels[s]) if s < len(self.levels) else []:
            if self.children[addr] or addr in self.attach_sigma:
                continue
            self._extend_once(addr)
        for ex in self.expansions:
            n = ex.next_n
            ex.next_n += 1
            sigma_n = ex.sigma + (n,)
            child = self._new_node(ex.tau)
            self._place_image(sigma_n, child, fundamental_seq(self.labels[ex.sigma], n))
            self._grow(child, s + 1)
        self.stage = s + 1
        self.trace.append({
            "stage": self.stage,
            "begun": begun,
            "queue": [_addr(q) for q in self.queue],
            "t_delta": self._delta,
            "padding": self._pads,
        })

    def advance(self, stages: int) -> "StagedBuild":
        for _ in range(stages):
            self.step()
        return self

    # views --------------------------------------------------------------------

    def tree(self) -> Tree:
        labels = {addr: self.labels[sig] for sig, addr in self.t.items()}
        return Tree(self.children, labels=labels)

    def attach_level(self, sigma: Address) -> int | None:
        if sigma in self.attach:
            return len(self.attach[sigma])
        try:
            return self.stage + self.queue.index(sigma)
        except ValueError:
            return None

    def trace_json(self) -> dict:
        return {"alpha": str(notation_value(self.a)), "stages": self.trace}


def build_thin_tree(a: Notation, stages: int) -> StagedBuild:
    if stages < 1:
        raise ValueError("stages must be >= 1")
    return StagedBuild(a).advance(stages)


# symbolic ranks ---------------------------------------------------------------


class _RankOracle:
    """Closed-form ranks, peeking ahead on a private copy when the limit at
    the bottom of a successor chain has not been reached yet."""

    def __init__(self, build: StagedBuild):
        self.build = build
        self.ahead: StagedBuild | None = None

    def attach_level(self, sigma: Address) -> int:
        lvl = self.build.attach_level(sigma)
        if lvl is not None:
            return lvl
        if self.ahead is None:
            self.ahead = copy.deepcopy(self.build)
        for _ in range(_LOOKAHEAD_CAP):
            lvl = self.ahead.attach_level(sigma)
            if lvl is not None:
                return lvl
            self.ahead.step()
        raise RuntimeError(f"limit node {list(sigma)} never scheduled")

    def image_rank(self, sigma: Address) -> Ordinal:
        label = self.build.labels[sigma]
        level = len(self.build.t[sigma])
        k, base, bottom = 0, label, sigma
        while isinstance(base, Succ):
            k += 1
            base = base.child
            bottom = bottom + (0,)
        if isinstance(base, Zero):
            return notation_value(label)
        offset = self.attach_level(bottom) - (level + k)
        if offset < 0:
            raise RuntimeError(f"attachment above image for {list(bottom)}")
        return notation_value(label).plus_finite(offset)

    def pad_rank(self, addr: Address) -> Ordinal:
        owner = self.build.pad_owner[addr]
        lam = notation_value(self.build.labels[owner])
        offset = self.attach_level(owner) - len(addr)
        if offset < 0:
            raise RuntimeError(f"padding node {list(addr)} below its attachment")
        return lam.plus_finite(offset)


def symbolic_ranks(build: StagedBuild) -> dict[Address, Ordinal]:
    """Rank in the full (infinite) tree of every node built so far."""
    oracle = _RankOracle(build)
    out: dict[Address, Ordinal] = {}
    for addr in build.children:
        if addr in build.t_inv:
            out[addr] = oracle.image_rank(build.t_inv[addr])
        else:
            out[addr] = oracle.pad_rank(addr)
    for tau, sigma in build.attach_sigma.items():
        if out[tau] != notation_value(build.labels[sigma]):
            raise RuntimeError(f"attachment {list(tau)} has rank {out[tau]}, "
                               f"expected {notation_value(build.labels[sigma])}")
    return out


# per-level rank sets -------------------------------------------------------------


def _nearest_attachment(build: StagedBuild, addr: Address) -> tuple[Address, int] | None:
    a = addr
    while a:
        child_index = a[-1]
        a = a[:-1]
        if a in build.attach_sigma:
            return a, child_index
    return None


def level_rank_description(build: StagedBuild, m: int,
                           ranks: dict[Address, Ordinal] | None = None) -> RankSetDescription:
    """All ranks on level ``m`` of the full tree, finitely described.

    Level-``m`` nodes with no attachment above them are listed explicitly.
    Every attachment ``tau`` above level ``m`` feeds one omega-tail toward
    ``rank(tau)``; the members built so far are recorded with their child
    index under ``tau``.
    """
    if m > build.stage:
        raise ValueError(f"level {m} not yet complete at stage {build.stage}")
    if ranks is None:
        ranks = symbolic_ranks(build)
    explicit = set()
    members: dict[Address, list] = {tau: [] for tau in build.attach_sigma if len(tau) < m}
    for addr in build.levels[m] if m < len(build.levels) else []:
        near = _nearest_attachment(build, addr)
        if near is None:
            explicit.add(ranks[addr])
        else:
            members[near[0]].append((near[1], ranks[addr]))
    tails = []
    for tau in sorted(members, key=len):
        tails.append(Tail(ranks[tau], tuple(sorted(members[tau])), drop=m - len(tau) - 1))
    return RankSetDescription(frozenset(explicit), tuple(tails))


@dataclass
class ThinReport:
    ok: bool
    order_types: dict[int, Ordinal] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok,
                "order_types": {str(n): str(o) for n, o in self.order_types.items()},
                "failures": self.failures}


def check_description(desc: RankSetDescription, n: int) -> tuple[Ordinal | None, str | None]:
    try:
        ot = order_type_of_finite_described_set(desc)
    except MalformedDescription as exc:
        return None, str(exc)
    if ot > cnf_mul(OMEGA, Ordinal.of(n)):
        return ot, f"order type {ot} exceeds w*{n}"
    return ot, None


def check_thin(build: StagedBuild, max_level: int) -> ThinReport:
    if max_level > build.stage:
        build = copy.deepcopy(build).advance(max_level - build.stage)
    ranks = symbolic_ranks(build)
    report = ThinReport(True)
    for n in range(1, max_level + 1):
        desc = level_rank_description(build, n, ranks)
        ot, err = check_description(desc, n)
        if ot is not None:
            report.order_types[n] = ot
        if err:
            report.ok = False
            report.failures.append({"level": n, "reason": err, "description": desc.to_json()})
    return report


def level_rank_bound(build: StagedBuild, n: int) -> Ordinal:
    desc = level_rank_description(build, n)
    sup = desc.supremum()
    return Ordinal.of(0) if sup is None else sup.plus_finite(1)


# invariants ------------------------------------------------------------------------


def stage_invariant_failures(build: StagedBuild) -> list[str]:
    out = []
    for addr, kids in build.children.items():
        if kids or len(addr) == build.stage:
            continue
        sigma = build.t_inv.get(addr)
        if sigma is None or not isinstance(build.labels[sigma], Zero):
            out.append(f"terminal {list(addr)} at level {len(addr)} is not a zero image")
    if len(set(build.t.values())) != len(build.t):
        out.append("t is not injective")
    for sigma, addr in build.t.items():
        if sigma:
            up = build.t[sigma[:-1]]
            if not (len(up) < len(addr) and addr[:len(up)] == up):
                out.append(f"t({list(sigma)}) not below t of its parent")
    levels = [len(tau) for tau in build.attach_sigma]
    if len(levels) != len(set(levels)):
        out.append("two attachments share a level")
    for lvl, nodes in enumerate(build.levels):
        if sum(1 for a in nodes if len(build.children[a]) > 1) > 1:
            out.append(f"level {lvl} has two branching nodes")
    return out


def truncation_failures(build: StagedBuild, ranks: dict[Address, Ordinal]) -> list[str]:
    """Finite ranks of the stage truncation sit below the symbolic ranks,
    and match them on nodes whose whole subtree is already built."""
    tr = tree_rank(Tree(build.children))
    finished: dict[Address, bool] = {}
    for addr in sorted(build.children, key=len, reverse=True):
        kids = build.children[addr]
        if addr in build.attach_sigma:
            finished[addr] = False
        elif not kids:
            sigma = build.t_inv.get(addr)
            finished[addr] = sigma is not None and isinstance(build.labels[sigma], Zero)
        else:
            finished[addr] = all(finished[k] for k in kids)
    out = []
    for addr, r in tr.items():
        sym = ranks[addr]
        if sym < Ordinal.of(r):
            out.append(f"{list(addr)}: truncated rank {r} above symbolic {sym}")
        if finished[addr] and sym != Ordinal.of(r):
            out.append(f"{list(addr)}: finished subtree rank {r} differs from {sym}")
    return out


def sandwich_failures(build: StagedBuild, ranks: dict[Address, Ordinal]) -> list[str]:
    """Every image ``t(sigma)`` has rank in ``[|sigma|, |sigma| + w)``."""
    out = []
    for sigma, addr in build.t.items():
        lo = notation_value(build.labels[sigma])
        r = ranks[addr]
        if r < lo or r.limit_part != lo.limit_part:
            out.append(f"t({list(sigma)}) has rank {r} outside [{lo}, {lo}+w)")
    return out
