"""Command-line entry point.

Exit codes: 0 for Sat or success, 1 for Unsat (or a failed check), 2 for errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import List, Optional

from .behaviors import closure, format_table, parse_behavior, preserves
from .entailment import classify
from .errors import GraphCSPError
from .graphs import OMEGA, GraphFamily, l_value
from .instance import load, serialize
from .minimality import establish_minimality, is_simple, is_trivial, verify_minimality
from .orbits import Label, enumerate_types, format_orbit
from .solver import (
    DEFAULT_PRIORITY,
    fixtures,
    oracle,
    realize_certificate,
    solve,
    solve_search,
    verify_certificate,
)
from .typestructure import (
    build_type_structure,
    default_m,
    finite_solve,
    finite_verify_minimality,
    refine_translation,
    translate_instance,
)

EXIT_OK, EXIT_UNSAT, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _cardinal(text: str):
    if text in (OMEGA, "w", "ω"):
        return OMEGA
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'omega', got {text!r}") from None


def _family_from_args(args) -> GraphFamily:
    if args.family == "random":
        fam = GraphFamily.random()
    elif args.family == "henson":
        if args.k is None:
            raise UsageError("--family henson needs --k")
        fam = GraphFamily.henson(args.k)
    else:
        if args.size is None or args.count is None:
            raise UsageError("--family cliques needs --size and --count")
        fam = GraphFamily.cliques(args.size, args.count)
    if args.complement:
        fam = GraphFamily.complement_of(fam)
    return fam


def _add_family_flags(p):
    p.add_argument("--family", choices=("random", "henson", "cliques"), required=True)
    p.add_argument("--k", type=int, help="clique bound for henson")
    p.add_argument("--size", type=_cardinal, help="clique size for cliques (int or omega)")
    p.add_argument("--count", type=_cardinal, help="clique count for cliques (int or omega)")
    p.add_argument("--complement", action="store_true", help="use the edge complement of the family")


def _parse_l(text: str):
    if text == "auto":
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--l expects an integer or 'auto', got {text!r}") from None


def _parse_priority(text: str) -> List[Label]:
    out = [Label.parse(x) for x in text.split(",") if x.strip()]
    if len(set(out)) != len(out):
        raise argparse.ArgumentTypeError("priority lists a label twice")
    return out


def _write(path: Optional[str], text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# -- subcommands -----------------------------------------------------------------

def cmd_solve(args) -> int:
    inst = load(args.input)
    priority = args.priority or list(DEFAULT_PRIORITY)
    verdict = solve(inst, args.mode, args.k, args.l, priority)
    print(f"status: {verdict.status}")
    print(f"mode: {verdict.mode}")
    if verdict.note:
        print(f"note: {verdict.note}")
    if verdict.certificate is not None:
        print(f"certificate: {format_orbit(verdict.certificate)}")
        ok, why = verify_certificate(inst, verdict.certificate)
        print(f"certificate verified: {'yes' if ok else 'no (' + why + ')'}")
        if args.cert:
            real = realize_certificate(verdict.certificate, inst.variables, inst.family)
            doc = dict(verdict.to_json())
            doc["variables"] = list(inst.variables)
            doc["graph"] = {"order": real.graph.order, "edges": sorted(list(e) for e in real.graph.edges)}
            doc["mapping"] = real.mapping
            _write(args.cert, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK if verdict.sat else EXIT_UNSAT


def cmd_minimalize(args) -> int:
    inst = load(args.input)
    l = args.l if args.l is not None else l_value(inst.family)
    m = establish_minimality(inst, args.k, l)
    if args.out:
        _write(args.out, serialize(m.to_instance()))
    trivial = is_trivial(m)
    if args.report or not args.out:
        print(f"k: {args.k}")
        print(f"l: {l}")
        print(f"constraints: {len(m.scopes)} ({m.source_count} source, {len(m.scopes) - m.source_count} added)")
        print(f"trivial: {'yes' if trivial else 'no'}")
        if not trivial:
            print(f"simple: {'yes' if is_simple(m) else 'no'}")
            for (i, j), p in sorted(m.pair_projections.items()):
                labels = ",".join(x.symbol for x in sorted(p))
                print(f"P[{m.variables[i]},{m.variables[j]}] = {{{labels}}}")
        ok, violation = verify_minimality(m, args.k, l)
        print(f"verified: {'yes' if ok else 'no: ' + str(violation)}")
    return EXIT_UNSAT if trivial else EXIT_OK


def cmd_classify(args) -> int:
    inst = load(args.input)
    names = [args.relation] if args.relation else sorted(n for n, r in inst.relations.items() if r.arity == 4)
    if not names:
        raise UsageError("no quaternary relation to classify")
    out = {}
    for name in names:
        rel = inst.relation(name)
        reports = classify(rel)
        out[name] = [r.to_json() for r in reports]
        print(f"relation {name} ({len(rel)} orbits)")
        for r in reports:
            mark = "yes" if r.efficient else "no"
            print(f"  {r.query.name:<40} instantiated: {mark}  entails: {'yes' if r.entails else 'no'}")
    if args.json:
        _write(args.json, json.dumps(out, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_behaviors(args) -> int:
    b = parse_behavior(args.spec)
    status = EXIT_OK
    if args.print or not (args.verify or args.input):
        print(format_table(b))
    if args.verify:
        inj = b.injective
        print(f"injective: {'yes' if inj else 'no'}")
        if args.family:
            fam = _family_from_args(args)
            for r in range(1, args.max_arity + 1):
                rep = preserves(b, enumerate_types(fam, r), fam)
                print(f"preserves all {r}-types of {fam}: {rep.status}")
                if not rep.preserved:
                    status = EXIT_UNSAT
    if args.input:
        inst = load(args.input)
        names = [args.relation] if args.relation else sorted(inst.relations)
        for name in names:
            rel = inst.relation(name)
            rep = preserves(b, rel, inst.family)
            line = f"{name}: {rep.status}"
            if rep.arguments is not None:
                line += " at (" + "; ".join(format_orbit(t) for t in rep.arguments) + ")"
            if rep.image is not None:
                line += f" -> {format_orbit(rep.image)}"
            print(line)
            if args.closure:
                cl = closure([b], rel, inst.family)
                print(f"  closure: {len(cl)} orbits")
                for s in cl.strings():
                    print(f"    {s}")
            if not rep.preserved:
                status = EXIT_UNSAT
    return status


def cmd_translate(args) -> int:
    inst = load(args.input)
    m = default_m(inst.relations, inst.family) if args.m is None else args.m
    ts = build_type_structure(inst.relations, inst.family, m)
    ti = translate_instance(inst, m, ts)
    if args.refine:
        source = establish_minimality(inst, 2 * m, 3 * m)
        ti = refine_translation(source, ti)
        ok, violation = finite_verify_minimality(ti, 2, 3)
        print(f"refined instance (2,3)-minimal: {'yes' if ok else 'no: ' + str(violation)}", file=sys.stderr)
    if args.out:
        _write(args.out, json.dumps(ti.to_json(ts), indent=1) + "\n")
    verdict = finite_solve(ts, ti) if args.solve else None
    print(f"m: {m}")
    print(f"elements: {len(ts.elements)}")
    print(f"variables: {len(ti.images)}")
    print(f"constraints: {len(ti.constraints)}")
    if verdict is not None:
        print(f"status: {verdict.status}")
        return EXIT_OK if verdict.sat else EXIT_UNSAT
    return EXIT_OK


def cmd_enumerate(args) -> int:
    fam = _family_from_args(args)
    rel = enumerate_types(fam, args.arity, max_arity=args.max_arity)
    for s in rel.strings():
        print(s)
    return EXIT_OK


def cmd_fixtures(args) -> int:
    import os

    fam = _family_from_args(args)
    docs = fixtures(fam)
    for name, inst in docs.items():
        text = serialize(inst)
        if args.out_dir:
            os.makedirs(args.out_dir, exist_ok=True)
            path = os.path.join(args.out_dir, f"{name}.json")
            _write(path, text)
            print(path)
        else:
            print(f"# {name}")
            sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .generators import CORPUS_FAMILIES, corpus, random_binary_instance

    families = CORPUS_FAMILIES if args.family is None else [_family_from_args(args)]
    disagreements = 0
    report = {"seed": args.seed, "families": []}
    for fam in families:
        started = time.perf_counter()
        insts = corpus(args.seed, fam, args.instances, builtins_only=args.builtins_only)
        agree = sat = 0
        for inst in insts:
            a = oracle(inst)
            b = solve_search(inst)
            if a.status == b.status:
                agree += 1
            sat += a.sat
        disagreements += len(insts) - agree
        entry = {"family": str(fam), "instances": len(insts), "agree": agree, "sat": sat}
        if args.timings:
            entry["seconds"] = round(time.perf_counter() - started, 3)
        report["families"].append(entry)
        print(f"{fam}: {agree}/{len(insts)} agree, {sat} sat" + (f", {entry['seconds']}s" if args.timings else ""))
    if args.scaling:
        rows = []
        for n in args.scaling:
            inst = random_binary_instance(args.seed, GraphFamily.random(), n)
            started = time.perf_counter()
            establish_minimality(inst, 2, 3)
            row = {"variables": n}
            if args.timings:
                row["seconds"] = round(time.perf_counter() - started, 3)
            rows.append(row)
            print(f"establish (2,3) on {n} variables" + (f": {row['seconds']}s" if args.timings else ""))
        report["scaling"] = rows
    if args.json:
        _write(args.json, json.dumps(report, indent=2) + "\n")
    return EXIT_OK if disagreements == 0 else EXIT_UNSAT


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphcsp", description="CSPs over homogeneous graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="decide an instance")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mode", choices=("width", "search", "oracle"), default="search")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--l", type=_parse_l, default=None, help="integer or auto")
    p.add_argument("--priority", type=_parse_priority, default=None, help="e.g. E,N,=")
    p.add_argument("--cert", help="write the certificate and its realization as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("minimalize", help="establish (k,l)-minimality")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--l", type=_parse_l, default=None, help="integer or auto")
    p.add_argument("--report", action="store_true")
    p.set_defaults(func=cmd_minimalize)

    p = sub.add_parser("classify", help="evaluate quaternary relations against the shape catalog")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--relation")
    p.add_argument("--json", help="machine-readable output path")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("behaviors", help="print or check behavior tables")
    p.add_argument("--spec", required=True)
    p.add_argument("--print", action="store_true")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--family", choices=("random", "henson", "cliques"))
    p.add_argument("--k", type=int)
    p.add_argument("--size", type=_cardinal)
    p.add_argument("--count", type=_cardinal)
    p.add_argument("--complement", action="store_true")
    p.add_argument("--max-arity", type=int, default=3)
    p.add_argument("--in", dest="input")
    p.add_argument("--relation")
    p.add_argument("--closure", action="store_true")
    p.set_defaults(func=cmd_behaviors)

    p = sub.add_parser("translate", help="compile to the finite m-type structure")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--m", type=_parse_l, default=None, help="integer or auto")
    p.add_argument("--refine", action="store_true")
    p.add_argument("--solve", action="store_true")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("enumerate-types", help="list the realizable types of an arity")
    _add_family_flags(p)
    p.add_argument("--arity", type=int, required=True)
    p.add_argument("--max-arity", type=int, default=8)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("fixtures", help="emit the unsatisfiable minimal fixtures")
    _add_family_flags(p)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("bench", help="oracle cross-check harness")
    p.add_argument("--seed", default="0")
    p.add_argument("--instances", type=int, default=100, help="instances per family")
    p.add_argument("--family", choices=("random", "henson", "cliques"), help="default: the six corpus families")
    p.add_argument("--k", type=int)
    p.add_argument("--size", type=_cardinal)
    p.add_argument("--count", type=_cardinal)
    p.add_argument("--complement", action="store_true")
    p.add_argument("--builtins-only", action="store_true")
    p.add_argument("--scaling", type=int, nargs="*", help="variable counts for establishment timing")
    p.add_argument("--timings", action="store_true", help="include wall-clock times (not reproducible)")
    p.add_argument("--json")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (GraphCSPError, UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
