"""Command-line front end.

Results go to standard output as JSON (or DOT for diagrams with
``--format dot``); diagnostics go to standard error. Exit status: 0 success,
1 negative verdict, 2 input error, 3 budget exhausted.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .diagrams import (
    Diagram, DiagramError, _port_graph, canonical_form, dumps, is_twisting, label_str,
    loads, parse_label, to_json,
)
from .formulas import FormulaSyntaxError, closure, format_sequent
from .logic import (
    DerivationSyntaxError, RuleViolation, check_correct, check_derivation, compile,
    end_sequent, parse_derivation, print_derivation, sequentialize,
)
from .permutations import Permutation, canonical_perm_diagram
from .polygraphs import (
    POLYGRAPHS, UniverseNotClosed, cut_eliminate, instantiate, normalize,
    trace_to_json, twist_equivalent,
)

__all__ = ["main", "export_dot", "EXIT_OK", "EXIT_NEGATIVE", "EXIT_INPUT", "EXIT_BUDGET"]

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class InputError(Exception):
    pass


def export_dot(d: Diagram) -> str:
    """Layered graph: boundary points, one node per gate, one edge per wire."""
    c = canonical_form(d)
    steps = c.steps
    ins, _, final = _port_graph(steps, len(c.input))
    lines = ["digraph diagram {", "  rankdir=BT;", '  node [shape=box, fontname="monospace"];']
    for i, x in enumerate(c.input):
        lines.append(f'  in{i} [shape=point, xlabel="{label_str(x)}"];')
    by_layer: dict = {}
    for k, ((g, _), (layer, _)) in enumerate(zip(steps, c.layer_positions)):
        lines.append(f'  g{k} [label="{g}"];')
        by_layer.setdefault(layer, []).append(f"g{k}")
    for j, x in enumerate(c.output):
        lines.append(f'  out{j} [shape=point, xlabel="{label_str(x)}"];')
    if c.input:
        lines.append("  {rank=min; " + " ".join(f"in{i};" for i in range(len(c.input))) + "}")
    for layer in sorted(by_layer):
        lines.append("  {rank=same; " + " ".join(n + ";" for n in by_layer[layer]) + "}")
    if c.output:
        lines.append("  {rank=max; " + " ".join(f"out{j};" for j in range(len(c.output))) + "}")

    def node(src) -> str:
        return f"in{src[1]}" if src[0] == "in" else f"g{src[0]}"

    for k, (g, _) in enumerate(steps):
        for p, src in enumerate(ins[k]):
            lines.append(f'  {node(src)} -> g{k} [label="{label_str(g.dom[p])}"];')
    for j, src in enumerate(final):
        lines.append(f'  {node(src)} -> out{j} [label="{label_str(c.output[j])}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# input -------------------------------------------------------------------------

def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from e


def _load_diagram(path: str, mode: str = "plain") -> Diagram:
    """A diagram file, or a derivation file compiled in ``mode``."""
    text = _read(path)
    try:
        if text.lstrip().startswith("("):
            return compile(parse_derivation(text.strip()), mode)
        return loads(text)
    except (ValueError, KeyError, TypeError) as e:
        raise InputError(f"{path}: {e}") from e


def _universe(*ds: Diagram) -> list:
    formulas = []
    for d in ds:
        formulas += [x for x in d.input + d.output if is_twisting(x)]
        for g, _ in d.steps:
            formulas += [x for x in g.params if is_twisting(x)]
            formulas += [x for x in g.dom + g.cod if is_twisting(x)]
    return sorted(closure(formulas), key=str)


def _polygraph(name: Optional[str], *ds: Diagram):
    if name is None:
        if all(g.twisting for d in ds for g, _ in d.steps):
            name = "S"
        elif any(g.control for d in ds for g, _ in d.steps):
            name = "ctrlMLLc"
        else:
            name = "MLLc"
    return instantiate(name, _universe(*ds))


def _emit_diagram(d: Diagram, fmt: str, extra: Optional[dict] = None) -> str:
    if fmt == "dot":
        return export_dot(d)
    if extra is None:
        return dumps(d) + "\n"
    return json.dumps({**extra, "diagram": to_json(d)}) + "\n"


def _write_trace(path: Optional[str], trace) -> None:
    if path:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(trace_to_json(trace) + "\n")
        except OSError as e:
            raise InputError(f"cannot write {path}: {e.strerror}") from e


# commands ------------------------------------------------------------------------

def cmd_check(args, out) -> int:
    d = _load_diagram(args.file, "control")
    ok = check_correct(d)
    result = {"correct": ok}
    if ok:
        result["sequent"] = format_sequent(end_sequent(d))
    out.write(json.dumps(result) + "\n")
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_compile(args, out) -> int:
    text = _read(args.file)
    try:
        deriv = parse_derivation(text.strip())
        d = compile(deriv, args.mode)
    except (DerivationSyntaxError, RuleViolation, FormulaSyntaxError, ValueError) as e:
        raise InputError(f"{args.file}: {e}") from e
    out.write(_emit_diagram(d, args.format))
    return EXIT_OK


def cmd_sequentialize(args, out) -> int:
    d = _load_diagram(args.file, "control")
    if not check_correct(d):
        out.write(json.dumps({"correct": False}) + "\n")
        return EXIT_NEGATIVE
    deriv = sequentialize(d)
    report = check_derivation(deriv)
    out.write(json.dumps({"derivation": print_derivation(deriv),
                          "sequent": format_sequent(report.sequent)}) + "\n")
    return EXIT_OK


def cmd_cutelim(args, out) -> int:
    d = _load_diagram(args.file, "plain")
    if any(g.control for g, _ in d.steps):
        raise InputError(f"{args.file}: cut elimination works on plain diagrams")
    p = _polygraph("MLLc" if any(g.name in ("one", "bot") for g, _ in d.steps) else "MLL", d)
    r = cut_eliminate(d, p, args.budget)
    _write_trace(args.trace, r.trace)
    cut_free = not any(g.name == "cut" for g, _ in r.diagram.steps)
    out.write(_emit_diagram(r.diagram, args.format, {"cut_free": cut_free, "steps": len(r.trace)}))
    if r.exhausted:
        return EXIT_BUDGET
    return EXIT_OK if cut_free else EXIT_NEGATIVE


def cmd_normalize(args, out) -> int:
    d = _load_diagram(args.file, "plain")
    p = _polygraph(args.polygraph, d)
    r = normalize(d, p, args.budget, args.strategy, args.seed)
    _write_trace(args.trace, r.trace)
    out.write(_emit_diagram(r.diagram, args.format, {"steps": len(r.trace)}))
    return EXIT_BUDGET if r.exhausted else EXIT_OK


def cmd_equiv(args, out) -> int:
    a = _load_diagram(args.file_a, "control")
    b = _load_diagram(args.file_b, "control")
    p = _polygraph(args.polygraph, a, b)
    verdict = twist_equivalent(a, b, p, args.budget)
    out.write(json.dumps({"equivalent": verdict}) + "\n")
    return {"yes": EXIT_OK, "no": EXIT_NEGATIVE}.get(verdict, EXIT_BUDGET)


def cmd_permcanon(args, out) -> int:
    try:
        sigma = Permutation.parse(args.perm)
        labels = [parse_label(x) for x in args.labels] or [parse_label("x")] * len(sigma)
        d = canonical_perm_diagram(sigma, labels)
    except ValueError as e:
        raise InputError(str(e)) from e
    out.write(_emit_diagram(d, args.format))
    return EXIT_OK


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="proofdiagrams",
                                     description="Proof diagrams for multiplicative linear logic.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=_positive, default=10000, help="rewrite step budget")
    common.add_argument("--format", choices=("json", "dot"), default="json")
    common.add_argument("--trace", metavar="FILE", help="write the rewrite trace as JSON")
    common.add_argument("--seed", type=int, default=None, help="seed for random strategies")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="correctness criterion on a control diagram")
    p.add_argument("file")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("compile", parents=[common], help="derivation to diagram")
    p.add_argument("file")
    p.add_argument("--mode", choices=("plain", "control"), default="control")
    p.set_defaults(run=cmd_compile)

    p = sub.add_parser("sequentialize", parents=[common], help="control diagram to derivation")
    p.add_argument("file")
    p.set_defaults(run=cmd_sequentialize)

    p = sub.add_parser("cutelim", parents=[common], help="eliminate cuts from a plain diagram")
    p.add_argument("file")
    p.set_defaults(run=cmd_cutelim)

    p = sub.add_parser("normalize", parents=[common], help="rewrite to a normal form")
    p.add_argument("file")
    p.add_argument("--polygraph", choices=POLYGRAPHS)
    p.add_argument("--strategy", choices=("leftmost", "random"), default="leftmost")
    p.set_defaults(run=cmd_normalize)

    p = sub.add_parser("equiv", parents=[common], help="equivalence modulo twisting relations")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--polygraph", choices=POLYGRAPHS)
    p.set_defaults(run=cmd_equiv)

    p = sub.add_parser("permcanon", parents=[common], help="canonical diagram of a permutation")
    p.add_argument("perm", help="e.g. 'perm(3 1 2)'")
    p.add_argument("labels", nargs="*", help="wire labels (default x)")
    p.set_defaults(run=cmd_permcanon)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return args.run(args, out)
    except (InputError, UniverseNotClosed, DiagramError) as e:
        err.write(f"error: {e}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
