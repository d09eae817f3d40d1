"""Executable checks of the constructions, grouped into named suites.

Each suite returns a :class:`SuiteResult` whose JSON form holds no timing
information, so identical arguments and seed give identical reports.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .backforth import (
    GameReferee,
    eqv_classify,
    lemma34_check,
    orbit_labels,
    rank_criterion,
    same_partition,
    scott_rank_structure,
    tuple_scott_ranks,
)
from .coding import DistinguishingPair, decode, encode, isomorphic, random_relational, verify_star
from .morozov import (
    GroupElement,
    UniverseCapExceeded,
    automorphism_to_path,
    build_structure,
    commutes_with_f,
    derived_rank,
    path_to_automorphism,
)
from .notation import notation_from_ordinal
from .oracles import NaiveBackForth, g_tree_ranks, narrow_random_tree, random_structure
from .ordinal import INF, OMEGA, Ordinal, cnf_mul, parse, rank_ge
from .structure import FiniteStructure, automorphism_group
from .thintree import (
    StagedBuild,
    check_thin,
    sandwich_failures,
    stage_invariant_failures,
    symbolic_ranks,
    truncation_failures,
)
from .tree import (
    ExplorationBudget,
    LazyTree,
    Tree,
    all_rooted_trees,
    canonical_ranked_tree,
    find_path,
    tree_rank,
)

__all__ = ["SuiteResult", "SUITES", "run_suite", "run_all", "gallery_tree", "small_views",
           "thm37_witnesses"]


@dataclass
class SuiteResult:
    name: str
    ok: bool
    checked: int = 0
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    skipped: str | None = None

    def to_json(self) -> dict:
        out = {"suite": self.name, "status": self.status, "checked": self.checked,
               "failures": self.failures[:20], "details": self.details}
        if self.skipped:
            out["skipped"] = self.skipped
        return out

    @property
    def status(self) -> str:
        if self.skipped:
            return "skipped"
        return "pass" if self.ok else "fail"


def _result(name: str, checked: int, failures: list, **details) -> SuiteResult:
    return SuiteResult(name, not failures, checked, failures, details)


# tree rank of group elements ---------------------------------------------------------------


def suite_lemma33(seed: int = 0, exhaustive_nodes: int = 8, exhaustive_depth: int = 3,
                  random_trees: int = 500, **_) -> SuiteResult:
    """Rank of a non-identity element = least rank of its members, against
    brute force on the tree of all group elements."""
    rng = random.Random(seed)
    trees = list(all_rooted_trees(exhaustive_nodes, exhaustive_depth))
    n_exhaustive = len(trees)
    trees += [narrow_random_tree(rng) for _ in range(random_trees)]
    failures, checked = [], 0
    for t in trees:
        ranks = tree_rank(t)
        for (n, members), r in g_tree_ranks(t).items():
            if not members:
                continue
            checked += 1
            got = derived_rank(GroupElement(n, members), ranks)
            if got != r:
                failures.append({"tree": t.to_json(), "element": GroupElement(n, members).name(),
                                 "formula": got, "brute_force": r})
    return _result("lemma33", checked, failures, exhaustive_trees=n_exhaustive,
                   random_trees=random_trees)


# views of A(T) ------------------------------------------------------------------------------


def small_views(max_nodes: int = 6, max_depth: int = 4, max_size: int = 64):
    """Views of every small tree at level bounds ``depth`` (paths reach the
    top, so there are symmetries) and ``depth + 1`` (rigid)."""
    for t in all_rooted_trees(max_nodes, max_depth):
        for bound in sorted({max(t.depth, 1), t.depth + 1}):
            try:
                yield t, build_structure(t, bound, cap=max_size)
            except UniverseCapExceeded:
                continue


def suite_lemma34(max_nodes: int = 6, max_depth: int = 4, max_size: int = 64,
                  length: int = 2, **_) -> SuiteResult:
    """Reduction of tuple equivalence to the top-level identity, and equal
    Scott ranks of every tuple and the identity of its top level."""
    failures, checked, views, beta_max = [], 0, 0, 0
    for t, M in small_views(max_nodes, max_depth, max_size):
        rep = lemma34_check(M, length)
        views += 1
        checked += rep.pairs_checked
        beta_max = max(beta_max, rep.beta_star)
        if not rep.ok:
            failures.append({"tree": t.to_json(), "level_bound": M.level_bound,
                             "report": rep.to_json()})
    return _result("lemma34", checked, failures, views=views, max_beta_star=beta_max)


def suite_orbit_formula(max_nodes: int = 6, max_depth: int = 4, max_size: int = 64,
                        **_) -> SuiteResult:
    """The orbit of ``a`` is the ``f_a``-image of the orbit of ``id_n``."""
    failures, checked, views, nontrivial = [], 0, 0, 0
    for t, M in small_views(max_nodes, max_depth, max_size):
        V = M.view()
        group = automorphism_group(V)
        orb = orbit_labels(group, V.size, 1)
        F = M.f_table
        views += 1
        nontrivial += len(group) > 1
        for a in range(V.size):
            n = int(M.level_of[a])
            idn = M.id_index(n)
            want = set(np.flatnonzero(orb == orb[a]).tolist())
            got = {int(F[a, u]) for u in np.flatnonzero(orb == orb[idn]).tolist()}
            checked += 1
            if want != got:
                failures.append({"tree": t.to_json(), "level_bound": M.level_bound,
                                 "element": V.universe[a]})
    return _result("orbit", checked, failures, views=views, views_with_symmetry=nontrivial)


# bounded games ------------------------------------------------------------------------------

GALLERY_ANCHORS = ["0", "1", "2", "3", "w", "w+1", "w*2", "w*3"]


def gallery_tree() -> LazyTree:
    """A root whose children are canonical ranked trees for every anchor of
    the gallery, so level 1 mixes all of them."""
    values = [parse(x) for x in GALLERY_ANCHORS]
    top = values[-1].plus_finite(1)

    def expand(info):
        if info == "root":
            return iter(values)
        return canonical_ranked_tree(info).expand(info)

    return LazyTree("root", expand, anchor_of=lambda i: top if i == "root" else i)


def suite_lemma36(betas=(0, 1, 2, 3), width: int = 3, **_) -> SuiteResult:
    """Replay the back-and-forth game of every level-1 element against
    ``id_1``; the outcome must match the rank criterion."""
    fixtures = [("gallery", gallery_tree(), len(GALLERY_ANCHORS))]
    fixtures += [(x, canonical_ranked_tree(parse(x)), None) for x in GALLERY_ANCHORS]
    failures, counts, checked = [], {"consistent": 0, "inconclusive": 0, "counterexample": 0}, 0
    verdicts = {True: 0, False: 0}
    for name, lazy, root_width in fixtures:
        for beta in betas:
            ref = GameReferee(lazy, width=width, pool_depth=1 + beta + 2, root_width=root_width)
            for a in sorted(ref.pools.get(1, []), key=lambda e: e.name()):
                res = ref.check(a, beta)
                checked += 1
                counts[res.outcome] += 1
                verdicts[res.verdict] += 1
                if res.outcome == "counterexample":
                    failures.append({"tree": name, "beta": beta, "element": a.name(),
                                     **res.to_json()})
    rate = counts["inconclusive"] / max(checked, 1)
    if rate >= 0.05:
        failures.append({"reason": f"inconclusive rate {rate:.3f} is not below 0.05"})
    return _result("lemma36", checked, failures, outcomes=counts,
                   verdicts={"true": verdicts[True], "false": verdicts[False]})


# paths and automorphisms -------------------------------------------------------------------


def suite_thm31(depth: int = 6, width: int = 4, **_) -> SuiteResult:
    """A path gives an automorphism commuting with every ``f_a``, and the
    path read back from it runs through infinitely ranked nodes only."""
    lazy = canonical_ranked_tree(INF)
    tree = lazy.materialize(ExplorationBudget(max_depth=depth, max_children=width))
    M = build_structure(tree, depth)
    path = find_path(lazy, depth + 1, width=width)
    failures = []
    g = path_to_automorphism(M, path)
    if not commutes_with_f(M, g):
        failures.append({"reason": "path automorphism does not commute with f"})
    if not np.array_equal(g[g], np.arange(M.size)):
        failures.append({"reason": "path automorphism is not an involution"})
    back = automorphism_to_path(M, g)
    if back != [tuple(p) for p in path]:
        failures.append({"reason": "recovered path differs", "path": [list(p) for p in back]})
    anchors = [tree.anchors[p] for p in back]
    if any(a is not INF for a in anchors):
        failures.append({"reason": "recovered path leaves the infinite branch"})
    try:
        automorphism_to_path(M, np.arange(M.size))
        failures.append({"reason": "identity accepted as a path witness"})
    except ValueError:
        pass
    return _result("thm31", M.size * M.size, failures, universe=M.size,
                   path=[list(p) for p in back])


# thin trees ------------------------------------------------------------------------------


THIN_ALPHAS = ["w", "w*2", "w^2", "w^2+w*3"]


def suite_lemma43(stages: int = 40, max_level: int = 10, alphas=THIN_ALPHAS, **_) -> SuiteResult:
    failures, checked, details = [], 0, {}
    for text in alphas:
        alpha = parse(text)
        build = StagedBuild(notation_from_ordinal(alpha))
        for _ in range(stages):
            build.step()
            for msg in stage_invariant_failures(build):
                failures.append({"alpha": text, "stage": build.stage, "reason": msg})
            checked += 1
        ranks = symbolic_ranks(build)
        for msg in sandwich_failures(build, ranks) + truncation_failures(build, ranks):
            failures.append({"alpha": text, "reason": msg})
        if any(r is INF for r in ranks.values()):
            failures.append({"alpha": text, "reason": "infinite rank"})
        if ranks[()] < alpha:
            failures.append({"alpha": text, "reason": f"root rank {ranks[()]} below {alpha}"})
        thin = check_thin(build, max_level)
        if not thin.ok:
            failures.append({"alpha": text, "reason": "thinness", "report": thin.to_json()})
        checked += len(ranks)
        details[text] = {"root_rank": str(ranks[()]), "nodes": len(ranks),
                         "order_types": thin.to_json()["order_types"]}
    return _result("lemma43", checked, failures, builds=details)


def _witness_view(tree: Tree, node, width: int):
    """Ancestors of ``node`` plus the first few nodes of each level up to
    one below it, closed under parents; the level bound lies past the
    deepest kept node, as no branch of the full tree is infinite."""
    keep = {node[:k] for k in range(len(node) + 1)}
    for m in range(1, len(node) + 2):
        extra = [a for a in sorted(tree.level(m)) if a[:-1] in keep and a not in keep]
        keep.update(extra[:width])
    sub = tree.restrict(keep)
    return sub, build_structure(sub, sub.depth + 1)


def thm37_witnesses(alpha: str = "w^2", stages: int = 40, betas=(1, 2, 3), width: int = 2):
    """For each beta an element ``{node}`` with rank >= w*beta, its view
    and whether it is in the orbit of the identity of its level."""
    build = StagedBuild(notation_from_ordinal(parse(alpha))).advance(stages)
    ranks = symbolic_ranks(build)
    tree = Tree(build.children)
    out = []
    for beta in betas:
        floor = cnf_mul(OMEGA, Ordinal.of(beta))
        node = next(a for a in sorted(build.children, key=lambda a: (len(a), a))
                    if len(a) >= 1 and rank_ge(ranks[a], floor))
        sub, M = _witness_view(tree, node, width)
        a = GroupElement(len(node), frozenset([node]))
        group = automorphism_group(M.view())
        orb = orbit_labels(group, M.size, 1)
        in_orbit = bool(orb[M.index(a)] == orb[M.id_index(len(node))])
        out.append({"beta": beta, "level": len(node), "element": a.name(),
                    "rank": str(ranks[node]), "criterion": rank_criterion(a, beta, ranks),
                    "in_orbit": in_orbit, "view_size": M.size, "automorphisms": len(group)})
    return out


def suite_thm37(**_) -> SuiteResult:
    failures = []
    wits = thm37_witnesses()
    for w in wits:
        if not w["criterion"] or w["in_orbit"]:
            failures.append(w)
    return _result("thm37", len(wits), failures, witnesses=wits)


# coding ----------------------------------------------------------------------------------


def suite_coding(seed: int = 0, count: int = 200, pair: str = "3,5",
                 inject_fault: bool = False, **_) -> SuiteResult:
    rng = random.Random(seed)
    p = DistinguishingPair.parse(pair)
    failures, checked = [], 0
    for k in range(count):
        A = random_relational(rng)
        S = encode(A, p)
        if inject_fault and k == 0:
            # cut the A-edges of one tuple node
            st = S.structure
            u = int(np.flatnonzero(st.relations["U"])[0])
            st.relations["E"][u, st.relations["A"]] = False
            st.relations["E"][st.relations["A"], u] = False
        rep = verify_star(S)
        if not rep.ok:
            failures.append({"case": k, "invariants": rep.failed()})
            continue
        perm = np.array(rng.sample(range(S.structure.size), S.structure.size))
        for label, star in (("plain", S), ("permuted", S.permuted(perm))):
            checked += 1
            if not isomorphic(decode(star, p), A):
                failures.append({"case": k, "variant": label, "reason": "round trip not isomorphic"})
    return _result("coding", checked, failures, structures=count, pair=pair)


# back-and-forth engine ----------------------------------------------------------------------


def _linear_order(n: int) -> FiniteStructure:
    return FiniteStructure([str(i) for i in range(n)],
                           {"lt": np.triu(np.ones((n, n), dtype=bool), 1)})


def suite_backforth(seed: int = 0, count: int = 60, **_) -> SuiteResult:
    """Fixed values, and agreement with the definitional recursion on
    random structures of at most five elements."""
    failures, checked = [], 0
    fixed = {"linear order of 2": (_linear_order(2), 2),
             "one element": (FiniteStructure(["0"]), 1)}
    for name, (S, want) in fixed.items():
        got = scott_rank_structure(S)
        naive = NaiveBackForth(S).scott_rank(S.size, S.size + 2)
        checked += 1
        if got != Ordinal.of(want) or naive != want:
            failures.append({"structure": name, "engine": str(got), "naive": naive, "want": want})
    rng = random.Random(seed)
    for k in range(count):
        S = random_structure(rng)
        L = min(2, S.size)
        ec = eqv_classify(S, L)
        nb = NaiveBackForth(S)
        for length in range(1, L + 1):
            for beta in range(ec.beta_star + 2):
                checked += 1
                if not same_partition(ec.classes(beta, length), nb.classes(beta, length)):
                    failures.append({"case": k, "length": length, "beta": beta,
                                     "structure": S.to_json()})
            checked += 1
            if tuple_scott_ranks(ec, length).tolist() != nb.tuple_ranks(length, ec.beta_star + 2):
                failures.append({"case": k, "length": length, "reason": "tuple ranks"})
        checked += 1
        if not same_partition(ec.orbits(L), nb.orbits(L)):
            failures.append({"case": k, "reason": "orbits"})
    return _result("backforth", checked, failures, random_structures=count)


# registry --------------------------------------------------------------------------------


@dataclass(frozen=True)
class Suite:
    run: Callable[..., SuiteResult]
    cost: float  # rough seconds at default budgets, used for skipping


SUITES: dict[str, Suite] = {
    "lemma33": Suite(suite_lemma33, 2),
    "lemma34": Suite(suite_lemma34, 20),
    "lemma36": Suite(suite_lemma36, 5),
    "thm31": Suite(suite_thm31, 1),
    "lemma43": Suite(suite_lemma43, 10),
    "thm37": Suite(suite_thm37, 2),
    "coding": Suite(suite_coding, 3),
    "backforth": Suite(suite_backforth, 3),
    "orbit": Suite(suite_orbit_formula, 2),
}


def run_suite(name: str, max_seconds: float | None = None, **kw) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    suite = SUITES[name]
    if max_seconds is not None and suite.cost > max_seconds:
        return SuiteResult(name, True, skipped=f"estimated {suite.cost:g}s exceeds budget "
                                                f"{max_seconds:g}s")
    return suite.run(**kw)


def run_all(max_seconds: float | None = None, **kw) -> list[SuiteResult]:
    """Every suite in registry order; with a budget, suites are skipped
    once their estimated cost no longer fits (decided from the estimates
    alone, so the report does not depend on machine speed)."""
    out = []
    left = max_seconds
    for name, suite in SUITES.items():
        if left is not None and suite.cost > left:
            out.append(SuiteResult(name, True, skipped=f"estimated {suite.cost:g}s exceeds "
                                                       f"remaining budget {left:g}s"))
            continue
        out.append(suite.run(**kw))
        if left is not None:
            left -= suite.cost
    return out
