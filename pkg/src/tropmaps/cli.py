"""Command-line entry point: ``python3 -m tropmaps <verb> ...``.

Exit status: 0 on success, 1 when a verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence, TextIO

from .errors import InvalidInputError, ResourceError, SearchFailureError, TropMapsError
from .invariants import (
    Insertion,
    connected_through_codim1,
    descendant,
    hurwitz_cycle,
    hurwitz_number,
    parse_rational,
)
from .lattice.cones import Fan, balancing_failures, fan_violations, subdivision_report
from .moduli import (
    build_delta_rub,
    replay_stellar,
    split_coefficients,
    subdivide_tree_cone,
    tree_cone,
    verify_stellar_factorization,
)
from .oracle import format_report, oracle_hurwitz, oracle_vs_tropical_report, sweep
from .relmaps import (
    RamificationData,
    format_split_combination,
    gap_ray_coefficients,
    linear_extensions,
    vertex_partial_order,
)
from .trees import MarkedTree, enumerate_trees, parse_splits, tree_from_splits

VALUE_FLAGS = {"--x", "--points", "--insert", "--tree", "--against"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def normalize_argv(argv: Sequence[str]) -> list[str]:
    """Glue ``--x -6,3`` into ``--x=-6,3`` so values may start with a minus sign."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") \
                and not argv[i + 1].startswith("--"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tropmaps", description="Tropical relative maps to the line.")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    s = sub.add_parser("trees", help="enumerate leaf-labeled trees")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--trivalent", action="store_true")
    s.add_argument("--dot", type=Path, help="write all trees as DOT graphs")

    s = sub.add_parser("types", help="list map types (tree and vertex order)")
    s.add_argument("--x", required=True)
    s.add_argument("--tree", help='splits like "1,4;1,3,4;5,6"')

    s = sub.add_parser("subdivide", help="refine tree cones by map types")
    s.add_argument("--x", required=True)
    s.add_argument("--tree")
    s.add_argument("--out", type=Path)

    s = sub.add_parser("stellar-replay", help="factor a tree-cone subdivision into stellar steps")
    s.add_argument("--x", required=True)
    s.add_argument("--tree", required=True)

    s = sub.add_parser("descendant", help="rigid descendant invariant")
    s.add_argument("--x", required=True)
    s.add_argument("--insert", action="append", required=True, help="k=K or k=K,pt=Q")
    s.add_argument("--evaluation-index", action="store_true",
                   help="also weight each type by its bounded edge weights")

    s = sub.add_parser("hurwitz-number", help="double Hurwitz number")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--x")
    g.add_argument("--sweep", type=int, metavar="D", help="all tuples of degree <= D")
    s.add_argument("--max-n", type=int, default=6)
    s.add_argument("--oracle", action="store_true")

    s = sub.add_parser("hurwitz-cycle", help="weighted Hurwitz cycle")
    s.add_argument("--x", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--points", default="")
    s.add_argument("--out", type=Path)

    s = sub.add_parser("check", help="verify a fan file")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--balancing", type=Path)
    g.add_argument("--subdivision", type=Path)
    s.add_argument("--against", help="tree splits of the coarse cone")
    return p


def _ram(text: str) -> RamificationData:
    return RamificationData.parse(text)


def _tree(text: str, n: int) -> MarkedTree:
    t = tree_from_splits(parse_splits(text, n), n)
    if not t.is_trivalent:
        raise InvalidInputError(f"tree {text!r} is not trivalent for n={n}")
    return t


def _vertex_label(t: MarkedTree, v: int) -> str:
    leaves = t.leaves_at(v)
    return ",".join(map(str, leaves)) if leaves else f"#{v}"


def _emit(args, out: TextIO, text: str, payload) -> None:
    if args.format == "json":
        out.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        out.write(text if text.endswith("\n") else text + "\n")


# -- verbs -----------------------------------------------------------------


def cmd_trees(args, out) -> int:
    trees = enumerate_trees(args.n, trivalent_only=args.trivalent)
    if args.dot:
        args.dot.write_text("".join(t.to_dot(f"tree{i}") for i, t in enumerate(trees)))
    lines = [f"{len(trees)} trees"]
    lines += [";".join(",".join(map(str, s.labels)) for s in sorted(t.splits())) or "(star)" for t in trees]
    _emit(args, out, "\n".join(lines), {"count": len(trees), "trees": [t.to_json() for t in trees]})
    return 0


def cmd_types(args, out) -> int:
    x = _ram(args.x)
    trees = [_tree(args.tree, x.n)] if args.tree else enumerate_trees(x.n, trivalent_only=True)
    lines, payload = [], []
    for t in trees:
        orders = linear_extensions(vertex_partial_order(t, x))
        split_txt = ";".join(",".join(map(str, s.labels)) for s in sorted(t.splits()))
        lines.append(f"tree {split_txt}: {len(orders)} orders")
        for o in orders:
            names = " < ".join("[" + " ".join(_vertex_label(t, v) for v in cls) + "]" for cls in o)
            rays = [format_split_combination(gap_ray_coefficients(t, x, o, j)) for j in range(1, len(o))]
            lines.append(f"  {names}")
            for j, r in enumerate(rays, 1):
                lines.append(f"    gap {j}: {r}")
            payload.append({
                "tree": t.to_json(),
                "order": [list(c) for c in o],
                "gap_rays": rays,
            })
    _emit(args, out, "\n".join(lines), payload)
    return 0


def cmd_subdivide(args, out) -> int:
    x = _ram(args.x)
    trees = [_tree(args.tree, x.n)] if args.tree else None
    mf = build_delta_rub(x, trees=trees)
    new_rays = set()
    old = set()
    for t in ({mf.tree_of(c) for c in mf.fan.cones}):
        old |= tree_cone(t).key
    for c in mf.fan.cones:
        new_rays |= {k for k in c.key if k not in old}
    if args.out:
        args.out.write_text(mf.dumps() + "\n")
    lines = [f"maximal cones: {len(mf.fan.cones)}", f"new rays: {len(new_rays)}"]
    if args.tree:
        t = trees[0]
        for c in mf.fan.cones:
            lines.append("  <" + ", ".join(
                format_split_combination({s: int(v) for s, v in split_coefficients(t, r).items()})
                for r in c.rays) + ">")
    _emit(args, out, "\n".join(lines), mf.to_json())
    return 0


def cmd_stellar(args, out) -> int:
    x = _ram(args.x)
    t = _tree(args.tree, x.n)
    steps = verify_stellar_factorization(x, t)
    fan = replay_stellar(t, steps)
    target = {c.key for _, c in subdivide_tree_cone(t, x)}
    ok = {c.key for c in fan.cones} == target

    def fmt(v):
        return format_split_combination({s: int(c) for s, c in split_coefficients(t, v).items()})

    lines = []
    payload = []
    for i, s in enumerate(steps, 1):
        face = ", ".join(fmt(r) for r in s.face.rays)
        lines.append(f"step {i}: add {fmt(s.ray)} at <{face}> with weights {list(s.weights)}")
        payload.append({"face": [fmt(r) for r in s.face.rays], "weights": list(s.weights), "ray": fmt(s.ray)})
    lines.append(f"replay reproduces {len(target)} cones: {'yes' if ok else 'NO'}")
    _emit(args, out, "\n".join(lines), {"steps": payload, "verified": ok})
    return 0 if ok else 1


def cmd_descendant(args, out) -> int:
    x = _ram(args.x)
    ins = [Insertion.parse(s) for s in args.insert]
    res = descendant(x, ins, evaluation_index=args.evaluation_index, with_types=True)
    lines = [str(res.value), f"contributing types: {len(res.types)}"]
    _emit(args, out, "\n".join(lines), res.to_json())
    return 0


def _report_rows(xs, jobs: int):
    if jobs <= 1 or len(xs) < 2:
        return oracle_vs_tropical_report(xs)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(oracle_vs_tropical_report, [[x] for x in xs]))
    return [row for part in parts for row in part]


def cmd_hurwitz_number(args, out) -> int:
    if args.sweep is not None:
        rows = _report_rows(sweep(args.sweep, args.max_n), args.jobs)
        ok = all(r.equal for r in rows)
        payload = [{"x": list(r.x.x), "d": r.x.d, "r": r.x.r, "oracle": str(r.oracle),
                    "tropical": r.tropical, "equal": r.equal} for r in rows]
        _emit(args, out, format_report(rows), payload)
        return 0 if ok else 1
    x = _ram(args.x)
    trop = hurwitz_number(x)
    if not args.oracle:
        _emit(args, out, str(trop), {"x": list(x.x), "tropical": trop})
        return 0
    orc = oracle_hurwitz(x)
    ok = orc == trop
    _emit(args, out, f"tropical {trop}\noracle {orc}\nequal {str(ok).lower()}",
          {"x": list(x.x), "tropical": trop, "oracle": str(orc), "equal": ok})
    return 0 if ok else 1


def cmd_hurwitz_cycle(args, out) -> int:
    x = _ram(args.x)
    pts = [parse_rational(p) for p in args.points.split(",") if p.strip()]
    c = hurwitz_cycle(x, args.k, pts)
    bal = c.is_balanced()
    conn = connected_through_codim1(c)
    if args.out:
        args.out.write_text(c.dumps() + "\n")
    lines = [f"cells: {len(c.cells)}", f"balanced: {str(bal).lower()}",
             f"connected through codimension 1: {str(conn).lower()}"]
    if args.k == 0:
        lines.insert(1, f"degree: {c.degree()}")
    payload = c.to_json()
    payload.update({"balanced": bal, "connected": conn})
    _emit(args, out, "\n".join(lines), payload)
    return 0 if bal and conn else 1


def _load_fan(path: Path) -> Fan:
    try:
        return Fan.from_json(path.read_text())
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from exc


def cmd_check(args, out) -> int:
    if args.balancing:
        fan = _load_fan(args.balancing)
        bad_fan = fan_violations(fan, first_only=True)
        bad = balancing_failures(fan)
        ok = not bad and not bad_fan
        _emit(args, out, f"fan: {str(not bad_fan).lower()}\nunbalanced faces: {len(bad)}",
              {"is_fan": not bad_fan, "unbalanced": len(bad)})
        return 0 if ok else 1
    if not args.against:
        raise UsageError("check --subdivision needs --against <splits>")
    fan = _load_fan(args.subdivision)
    coarse = tree_cone(_tree(args.against, fan.n))
    rep = subdivision_report(fan, coarse)
    payload = {"subdivision": rep.ok, "reason": rep.reason,
               "witness": [str(v) for v in rep.witness] if rep.witness else None}
    text = "subdivision: true" if rep.ok else f"subdivision: false ({rep.reason})"
    _emit(args, out, text, payload)
    return 0 if rep.ok else 1


COMMANDS = {
    "trees": cmd_trees,
    "types": cmd_types,
    "subdivide": cmd_subdivide,
    "stellar-replay": cmd_stellar,
    "descendant": cmd_descendant,
    "hurwitz-number": cmd_hurwitz_number,
    "hurwitz-cycle": cmd_hurwitz_cycle,
    "check": cmd_check,
}


def run(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(normalize_argv(argv))
    except UsageError as exc:
        err.write(f"{exc}\n")
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return COMMANDS[args.verb](args, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return 2
    except (InvalidInputError, ResourceError) as exc:
        err.write(f"error: {exc}\n")
        return 2
    except SearchFailureError as exc:
        err.write(f"search failed: {exc}\n")
        return 1
    except TropMapsError as exc:
        err.write(f"verification failed: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run())
