"""Command line: build, classify, code, verify and export.

Exit status is 0 on success, 1 when a check fails and 2 on usage or
input errors.  ``--json`` prints a deterministic machine-readable report.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .backforth import GameReferee, eqv_classify, scott_rank_structure, tuple_scott_ranks
from .coding import (
    DistinguishingPair,
    MalformedStar,
    RelationalStructure,
    StarStructure,
    decode,
    encode,
    verify_star,
)
from .morozov import GroupElement, build_structure
from .notation import notation_from_ordinal
from .ordinal import parse, parse_rank
from .structure import FiniteStructure
from .thintree import StagedBuild, check_thin, symbolic_ranks
from .tree import LazyTree, Tree, canonical_ranked_tree, tree_rank
from .verify import SUITES, gallery_tree, run_all, run_suite


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)


def _emit(args, payload: dict, text: str) -> None:
    print(_dump(payload) if args.json else text)


def _ordinal(text: str):
    try:
        return parse(text)
    except ValueError as exc:
        raise UsageError(f"bad ordinal {text!r}: {exc}") from exc


# verbs --------------------------------------------------------------------------------


def cmd_ordinal_eval(args) -> int:
    value = _ordinal(args.expr)
    _emit(args, {"value": str(value), "limit": value.is_limit,
                 "successor": value.is_successor}, str(value))
    return 0


def _build(args) -> StagedBuild:
    if args.stages < 1:
        raise UsageError("--stages must be >= 1")
    return StagedBuild(notation_from_ordinal(_ordinal(args.alpha))).advance(args.stages)


def cmd_thin_build(args) -> int:
    build = _build(args)
    ranks = symbolic_ranks(build)
    _write(args.trace, _dump(build.trace_json()) + "\n")
    _write(args.dot, build.tree().to_dot(ranks))
    payload = {"alpha": args.alpha, "stages": build.stage, "nodes": len(build.children),
               "root_rank": str(ranks[()]),
               "expansions": [{"sigma": list(e.sigma), "tau": list(e.tau)}
                              for e in build.expansions]}
    _emit(args, payload, f"{len(build.children)} nodes after {build.stage} stages, "
                         f"root rank {ranks[()]}")
    return 0


def cmd_thin_check(args) -> int:
    report = check_thin(_build(args), args.max_level)
    lines = [f"level {n}: order type {o}" for n, o in report.order_types.items()]
    lines += [f"FAIL level {f['level']}: {f['reason']}" for f in report.failures]
    lines.append("thin: pass" if report.ok else "thin: fail")
    _emit(args, report.to_json(), "\n".join(lines))
    return 0 if report.ok else 1


def _load_tree(path: str) -> Tree:
    try:
        return Tree.from_json(_read_json(path))
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"{path} is not a tree: {exc}") from exc


def cmd_morozov_build(args) -> int:
    tree = _load_tree(args.tree)
    try:
        M = build_structure(tree, args.levels, cap=args.cap)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    text = M.view().dumps()
    _write(args.out, text + "\n")
    payload = {"universe": M.size, "levels": M.level_bound, "level_sizes": M.sizes}
    _emit(args, payload, f"{M.size} elements over levels 0..{M.level_bound}")
    return 0


def _load_structure(path: str) -> FiniteStructure:
    try:
        return FiniteStructure.from_json(_read_json(path))
    except (KeyError, ValueError, TypeError, IndexError) as exc:
        raise UsageError(f"{path} is not a structure: {exc}") from exc


def cmd_bf_classify(args) -> int:
    S = _load_structure(args.struct)
    ec = eqv_classify(S, args.len)
    payload = ec.to_json()
    payload["tuple_ranks"] = {str(l): tuple_scott_ranks(ec, l).tolist()
                              for l in range(1, args.len + 1)}
    text = [f"stabilises at level {ec.beta_star}"]
    for l in range(1, args.len + 1):
        for b in range(ec.beta_star + 1):
            text.append(f"length {l}, level {b}: {len(set(ec.classes(b, l).tolist()))} classes")
    _emit(args, payload, "\n".join(text))
    return 0


def cmd_bf_scott_rank(args) -> int:
    S = _load_structure(args.struct)
    rank = scott_rank_structure(S, args.len)
    _emit(args, {"scott_rank": str(rank), "L": args.len or S.size}, str(rank))
    return 0


def _lazy_from_source(source: str) -> tuple[LazyTree, int | None]:
    if source == "gallery":
        return gallery_tree(), 8
    if source.startswith("canonical:"):
        return canonical_ranked_tree(parse_rank(source.split(":", 1)[1])), None
    tree = _load_tree(source)
    if set(tree.anchors) != set(tree.children):
        raise UsageError(f"{source}: every node needs a rank anchor")
    return LazyTree((), lambda a: iter(tree.children[a]),
                    anchor_of=lambda a: tree.anchors[a]), None


def cmd_bf_game(args) -> int:
    lazy, root_width = _lazy_from_source(args.tree)
    try:
        a = GroupElement.parse(args.element)
    except ValueError as exc:
        raise UsageError(f"bad element {args.element!r}: {exc}") from exc
    if args.level is not None and args.level != a.level:
        raise UsageError(f"element {args.element} is not at level {args.level}")
    if not 0 <= args.beta <= 3:
        raise UsageError("--beta must be between 0 and 3")
    ref = GameReferee(lazy, width=args.width, pool_depth=a.level + args.beta + 2,
                      root_width=root_width)
    try:
        res = ref.check(a, args.beta)
    except (KeyError, StopIteration, IndexError) as exc:
        raise UsageError(f"element {args.element} is not in the tree") from exc
    _emit(args, res.to_json(), f"criterion {str(res.verdict).lower()}: {res.outcome}"
                               + (f" ({res.detail})" if res.detail else ""))
    return 1 if res.outcome == "counterexample" else 0


def cmd_code_encode(args) -> int:
    try:
        A = RelationalStructure.from_json(_read_json(args.struct))
        pair = DistinguishingPair.parse(args.pair)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    S = encode(A, pair)
    _write(args.out, S.structure.dumps() + "\n")
    counts = {s: int(S.structure.relations[s].sum()) for s in ("L", "Lstar", "A", "U", "T")}
    _emit(args, {"size": S.structure.size, "sorts": counts},
          " ".join(f"{k}={v}" for k, v in counts.items()))
    return 0


def cmd_code_decode(args) -> int:
    try:
        S = StarStructure.from_json(_read_json(args.star))
        pair = DistinguishingPair.parse(args.pair)
    except (KeyError, ValueError, TypeError, IndexError) as exc:
        raise UsageError(str(exc)) from exc
    report = verify_star(S)
    if not report.ok:
        _emit(args, report.to_json(), "invalid coded structure: " + ", ".join(report.failed()))
        return 1
    try:
        A = decode(S, pair)
    except MalformedStar as exc:
        _emit(args, {"ok": False, "invariant": exc.invariant, "error": str(exc)}, str(exc))
        return 1
    _emit(args, A.to_json(), _dump(A.to_json()))
    return 0


def cmd_verify(args) -> int:
    kw = {"seed": args.seed, "inject_fault": args.inject_fault}
    if args.exhaustive_nodes is not None:
        kw["exhaustive_nodes"] = args.exhaustive_nodes
    if args.name == "all":
        results = run_all(max_seconds=args.max_seconds, **kw)
    else:
        results = [run_suite(args.name, max_seconds=args.max_seconds, **kw)]
    failed = [r for r in results if r.status == "fail"]
    lines = []
    for r in results:
        line = f"{r.name:10s} {r.status.upper():7s} checked={r.checked}"
        if r.skipped:
            line += f" ({r.skipped})"
        lines.append(line)
        for f in r.failures[:3]:
            lines.append(f"    {json.dumps(f, sort_keys=True)[:200]}")
    payload = {"ok": not failed, "suites": [r.to_json() for r in results]}
    _emit(args, payload, "\n".join(lines))
    return 1 if failed else 0


def cmd_export_dot(args) -> int:
    if args.tree:
        tree = _load_tree(args.tree)
        text = tree.to_dot(tree_rank(tree) if tree.is_finite_explicit else None)
    elif args.alpha:
        build = _build(args)
        text = build.tree().to_dot(symbolic_ranks(build))
    else:
        raise UsageError("give --tree or --alpha")
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


# parser --------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for randomised suites")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--max-seconds", type=float, default=None,
                        help="budget; suites estimated to exceed it are skipped")

    p = argparse.ArgumentParser(prog="scottrank", description=__doc__.splitlines()[0])
    verbs = p.add_subparsers(dest="verb", required=True)

    def group(name: str, help_text: str):
        sub = verbs.add_parser(name, help=help_text)
        return sub.add_subparsers(dest="action", required=True)

    o = group("ordinal", "ordinal arithmetic")
    e = o.add_parser("eval", parents=[common], help="normalise an ordinal expression")
    e.add_argument("expr")
    e.set_defaults(func=cmd_ordinal_eval)

    t = group("thin", "thin trees from notations")
    for name, func, hlp in (("build", cmd_thin_build, "run the staged construction"),
                            ("check", cmd_thin_check, "check per-level order types")):
        sp = t.add_parser(name, parents=[common], help=hlp)
        sp.add_argument("--alpha", required=True)
        sp.add_argument("--stages", type=int, default=12)
        sp.set_defaults(func=func)
        if name == "build":
            sp.add_argument("--trace")
            sp.add_argument("--dot")
        else:
            sp.add_argument("--max-level", type=int, default=10)

    m = group("morozov", "the group structure of a tree")
    mb = m.add_parser("build", parents=[common], help="build the finite view")
    mb.add_argument("--tree", required=True)
    mb.add_argument("--levels", type=int, required=True)
    mb.add_argument("--cap", type=int, default=4096)
    mb.add_argument("--out")
    mb.set_defaults(func=cmd_morozov_build)

    b = group("bf", "back-and-forth relations")
    bc = b.add_parser("classify", parents=[common], help="partitions per level")
    bc.add_argument("--struct", required=True)
    bc.add_argument("--len", type=int, default=2)
    bc.set_defaults(func=cmd_bf_classify)
    bs = b.add_parser("scott-rank", parents=[common], help="Scott rank of a structure")
    bs.add_argument("--struct", required=True)
    bs.add_argument("--len", type=int, default=None, help="tuple length bound (default: size)")
    bs.set_defaults(func=cmd_bf_scott_rank)
    bg = b.add_parser("game", parents=[common], help="play a bounded game against id_n")
    bg.add_argument("--tree", required=True,
                    help="anchored tree JSON, 'canonical:<rank>' or 'gallery'")
    bg.add_argument("--beta", type=int, required=True)
    bg.add_argument("--level", type=int)
    bg.add_argument("--element", required=True, help="e.g. 1:0 or 2:0.1,1.0")
    bg.add_argument("--width", type=int, default=3)
    bg.set_defaults(func=cmd_bf_game)

    c = group("code", "coding relational structures")
    ce = c.add_parser("encode", parents=[common])
    ce.add_argument("--struct", required=True)
    ce.add_argument("--pair", default="3,5")
    ce.add_argument("--out")
    ce.set_defaults(func=cmd_code_encode)
    cd = c.add_parser("decode", parents=[common])
    cd.add_argument("--star", required=True)
    cd.add_argument("--pair", default="3,5")
    cd.set_defaults(func=cmd_code_decode)

    v = verbs.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("name", choices=list(SUITES) + ["all"])
    v.add_argument("--exhaustive-nodes", type=int, default=None)
    v.add_argument("--inject-fault", action="store_true",
                   help="corrupt a coded structure to exercise the failure path")
    v.set_defaults(func=cmd_verify)

    x = group("export", "export trees")
    xd = x.add_parser("dot", parents=[common], help="Graphviz DOT")
    xd.add_argument("--tree")
    xd.add_argument("--alpha")
    xd.add_argument("--stages", type=int, default=6)
    xd.add_argument("--out")
    xd.set_defaults(func=cmd_export_dot)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
