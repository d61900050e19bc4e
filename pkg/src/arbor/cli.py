"""Command line front end.

Every capability is exposed as a subcommand with reproducible output:
identical flags (including --seed) give byte-identical bytes.  Output
formats: text (human first), tsv, jsonl (one JSON object per row, for
scripting).  Exit codes: 0 success, 2 parse error, 3 precondition or
hypothesis failure, 4 cap exceeded.

Caps are configured by flags only, except the ARBOR_CAP environment
variable which overrides every enumeration cap at once.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bass_serre as bs
from .autom import FinitaryAut, Kind, classify
from .errors import ArborError, CapExceeded, ParseError, PreconditionError, DEFAULT_GROUP_CAP
from .local import (
    closure_chain_probe,
    independence_check_bs,
    independence_check_universal,
    independence_check_words,
    rigidity_probe,
)
from .perm import group_from_perm_texts
from .rng import ALGORITHM
from .tree import PathSpec, parse_vertex
from .universal import (
    UniversalGroupSpec,
    ball_stabilizer_group,
    nondiscreteness_witness,
    sample_stabilizer,
    tower,
    tower_isomorphism_check,
)


def _cap(args) -> int:
    env = os.environ.get("ARBOR_CAP")
    if env is not None:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ParseError(f"bad ARBOR_CAP value {env!r}") from exc
    else:
        cap = args.cap
    if cap <= 0:
        raise ParseError("caps must be positive")
    return cap


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _universal_spec(args) -> UniversalGroupSpec:
    group = group_from_perm_texts(args.local_perm, degree=args.degree)
    return UniversalGroupSpec(group.degree, group)


def _tsv_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


def _emit_rows(args, rows: list[dict], text_lines: list[str]):
    if args.format == "jsonl":
        for row in rows:
            print(json.dumps(row, sort_keys=True))
    elif args.format == "tsv":
        for row in rows:
            print("\t".join(_tsv_value(row[key]) for key in row))
    else:
        for line in text_lines:
            print(line)


def cmd_classify(args) -> int:
    g = FinitaryAut.from_text(_read_text(args.element))
    cls = classify(g)
    row = {"kind": cls.kind.value, "ell": cls.translation_length,
           "witness": cls.witness.text}
    if cls.kind == Kind.INVERSION:
        row["edge"] = [cls.inverted_edge[0].text, cls.inverted_edge[1].text]
    if cls.kind == Kind.HYPERBOLIC:
        row["axis_window"] = [v.text for v in cls.axis_window.vertices]
    _emit_rows(args, [row], [cls.describe()])
    return 0


def cmd_compose(args) -> int:
    g = FinitaryAut.from_text(_read_text(args.left))
    h = FinitaryAut.from_text(_read_text(args.right))
    sys.stdout.write(g.compose(h).to_text())
    return 0


def cmd_uf_check(args) -> int:
    from .universal import in_universal

    spec = _universal_spec(args)
    g = FinitaryAut.from_text(_read_text(args.element))
    verdict = in_universal(g, spec)
    _emit_rows(args, [{"member": verdict}], ["true" if verdict else "false"])
    return 0


def cmd_witness(args) -> int:
    spec = _universal_spec(args)
    witness = nondiscreteness_witness(spec, args.n)
    if witness is None:
        _emit_rows(args, [{"witness": None}], ["absent"])
        return 0
    if args.format == "jsonl":
        print(json.dumps({"witness": witness.to_text()}, sort_keys=True))
    else:
        sys.stdout.write(witness.to_text())
    return 0


def cmd_tower(args) -> int:
    spec = _universal_spec(args)
    cap = _cap(args)
    rows = []
    lines = []
    for n in range(1, args.n + 1):
        level = tower(spec, n, cap=cap)
        oracle = ball_stabilizer_group(spec, n, cap=cap)
        match = tower_isomorphism_check(spec, n, cap=cap)
        rows.append({"n": n, "domain": len(level.domain), "order": level.order,
                     "oracle_order": oracle.group.order,
                     "match": "true" if match else "false"})
        lines.append(f"{n}\t{len(level.domain)}\t{level.order}\t"
                     f"{oracle.group.order}\t{'true' if match else 'false'}")
    _emit_rows(args, rows, lines)
    return 0


def cmd_sample(args) -> int:
    spec = _universal_spec(args)
    ball_aut = sample_stabilizer(spec, args.n, args.seed)
    header = f"# rng={ALGORITHM} seed={args.seed}"
    if args.format == "jsonl":
        print(json.dumps({"rng": ALGORITHM, "seed": args.seed,
                          "sample": ball_aut.to_text()}, sort_keys=True))
    else:
        print(header)
        sys.stdout.write(ball_aut.to_text())
    return 0


def _parse_path(args, degree: int) -> PathSpec:
    vertices = tuple(parse_vertex(part, degree) for part in args.path.split(","))
    return PathSpec(vertices)


def cmd_pk(args) -> int:
    if args.bs:
        m, n = args.bs
        report = independence_check_bs(m, n, args.k, args.depth)
        cert_lines = []
        if not report.holds:
            cert = bs.pk_failure_witness(m, n, args.k, args.depth)
            cert_lines = cert.describe().splitlines()
    elif args.local_perm:
        spec = _universal_spec(args)
        report = independence_check_universal(spec, _parse_path(args, spec.degree),
                                              args.k, args.depth)
        cert_lines = []
    else:
        gens = [FinitaryAut.from_text(_read_text(path)) for path in args.gens]
        if not gens:
            raise ParseError("pk needs --bs, -F generators, or --gens files")
        report = independence_check_words(gens, _parse_path(args, gens[0].degree),
                                          args.k, args.depth, word_budget=args.budget)
        cert_lines = []
    verdict = "holds at truncation" if report.holds else "FAILS at truncation"
    factors = "·".join(str(f) for f in report.factor_orders)
    lines = [
        f"P_{args.k} {verdict} (k={args.k}, depth={args.depth}, source={report.source})",
        f"|Fix| = {report.fix_order}, factor product = {factors} = {report.factor_product}",
    ] + cert_lines
    rows = [{"k": args.k, "depth": args.depth, "holds": report.holds,
             "fix_order": report.fix_order,
             "factor_orders": list(report.factor_orders),
             "source": report.source,
             "certificate": "\n".join(cert_lines) if cert_lines else None}]
    _emit_rows(args, rows, lines)
    return 0


def cmd_kclosure(args) -> int:
    if args.bs:
        source = bs.BSParams(args.bs[0], args.bs[1])
    elif args.local_perm:
        source = _universal_spec(args)
    else:
        source = [FinitaryAut.from_text(_read_text(path)) for path in args.gens]
    report = closure_chain_probe(source, args.kmax, args.depth, word_budget=args.budget)
    rows = []
    lines = []
    for row in report.rows:
        rows.append({"k": row.k, "order": row.order,
                     "strict_decrease": row.strict_decrease,
                     "certificate": row.certificate,
                     "depth": report.depth, "budget": report.budget,
                     "exact": report.exact})
        lines.append(f"{row.k}\t{row.order}\t{str(row.strict_decrease).lower()}\t"
                     f"depth={report.depth}\tbudget={report.budget}\t"
                     f"exact={str(report.exact).lower()}")
        if row.certificate and args.format == "text":
            lines.append(f"  certificate: {row.certificate}")
    _emit_rows(args, rows, lines)
    return 0


def cmd_rigidity(args) -> int:
    if args.local_perm:
        report = rigidity_probe(_universal_spec(args))
    else:
        gens = [FinitaryAut.from_text(_read_text(path)) for path in args.gens]
        report = rigidity_probe(gens, word_budget=args.budget)
    a_text = "unknown" if report.a is None else f"a={report.a}"
    rows = [{"a": report.a, "status": report.status, "remark": report.remark}]
    _emit_rows(args, rows, [f"{a_text} ({report.status}): {report.remark}"])
    return 0


def cmd_bs(args) -> int:
    params = bs.BSParams(args.m, args.n)
    if args.action == "neighbors":
        vertex = bs.BSVertex.of(bs.parse_bs_word(params, args.vertex or ""))
        nbrs = bs.bs_neighbors(vertex)
        rows = [{"vertex": str(v)} for v in nbrs]
        _emit_rows(args, rows, [str(v) for v in nbrs])
        return 0
    if args.action == "act":
        word = bs.parse_bs_word(params, " ".join(args.word))
        vertex = bs.BSVertex.of(bs.parse_bs_word(params, args.on or ""))
        moved = bs.bs_act(word, vertex)
        _emit_rows(args, [{"image": str(moved)}], [str(moved)])
        return 0
    if args.action == "witness":
        cert = bs.pk_failure_witness(args.m, args.n, args.k, args.depth)
        rows = [{"witness_exponent": cert.witness_exponent,
                 "fixed_vertices": list(cert.fixed_vertices),
                 "moved_vertex": cert.moved_vertex,
                 "moved_image": cert.moved_image,
                 "side_moves": [[mv.c, mv.j, mv.vertex, mv.image]
                                for mv in cert.side_moves]}]
        _emit_rows(args, rows, cert.describe().splitlines())
        return 0
    raise ParseError(f"unknown bs action {args.action!r}")


def _add_common(parser, with_group=False, with_budget=False):
    parser.add_argument("--format", choices=["text", "tsv", "jsonl"], default="text")
    parser.add_argument("--cap", type=int, default=DEFAULT_GROUP_CAP,
                        help="enumeration cap (ARBOR_CAP overrides)")
    parser.add_argument("--seed", type=int, default=0)
    if with_group:
        parser.add_argument("-F", "--local-perm", action="append", default=[],
                            metavar="PERM", help="generator in one-line form, e.g. 2,3,1")
        parser.add_argument("--degree", type=int, default=None)
    if with_budget:
        parser.add_argument("--budget", type=int, default=4, help="word length budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arbor",
        description="exact computation with labelled-tree automorphism groups")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify a finitary automorphism")
    p.add_argument("element", help="element file ('-' for stdin)")
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("compose", help="compose two elements")
    p.add_argument("left")
    p.add_argument("right")
    _add_common(p)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("uf-check", help="universal group membership")
    p.add_argument("element")
    _add_common(p, with_group=True)
    p.set_defaults(func=cmd_uf_check)

    p = sub.add_parser("witness", help="non-discreteness witness for U(F)")
    p.add_argument("-n", type=int, required=True)
    _add_common(p, with_group=True)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("tower", help="stabilizer tower with brute-force oracle")
    p.add_argument("-n", type=int, required=True)
    _add_common(p, with_group=True)
    p.set_defaults(func=cmd_tower)

    p = sub.add_parser("sample", help="seeded uniform ball-stabilizer sample")
    p.add_argument("-n", type=int, required=True)
    _add_common(p, with_group=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("pk", help="truncated independence check")
    p.add_argument("--bs", type=int, nargs=2, metavar=("M", "N"))
    p.add_argument("--path", default=",1", help="comma-separated vertex addresses")
    p.add_argument("--gens", nargs="*", default=[], help="element files")
    p.add_argument("-k", type=int, default=1)
    p.add_argument("--depth", type=int, default=3)
    _add_common(p, with_group=True, with_budget=True)
    p.set_defaults(func=cmd_pk)

    p = sub.add_parser("kclosure", help="truncated closure chain probe")
    p.add_argument("--bs", type=int, nargs=2, metavar=("M", "N"))
    p.add_argument("--gens", nargs="*", default=[])
    p.add_argument("--kmax", type=int, default=2)
    p.add_argument("--depth", type=int, default=2)
    _add_common(p, with_group=True, with_budget=True)
    p.set_defaults(func=cmd_kclosure)

    p = sub.add_parser("rigidity", help="level-2 rigidity probe")
    p.add_argument("--gens", nargs="*", default=[])
    _add_common(p, with_group=True, with_budget=True)
    p.set_defaults(func=cmd_rigidity)

    p = sub.add_parser("bs", help="Baumslag-Solitar tools")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.add_argument("action", choices=["neighbors", "act", "witness"])
    p.add_argument("word", nargs="*", help="word tokens for 'act'")
    p.add_argument("--vertex", default="", help="vertex for 'neighbors'")
    p.add_argument("--on", default="", help="vertex acted on (default ⟨a⟩)")
    p.add_argument("-k", type=int, default=1)
    p.add_argument("--depth", type=int, default=3)
    _add_common(p)
    p.set_defaults(func=cmd_bs)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return 4
    except (PreconditionError, ArborError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
