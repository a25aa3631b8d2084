"""Command-line front end.

Yes/no verdicts map to exit codes so shell pipelines can branch: 0 for a
"true" (or successful) outcome, 1 for a "false"/refuted verdict, 2 for
usage or input errors. Human text goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import selftest as selftest_mod
from .dag import dag_to_dot, dag_to_text, local_ci_set, parse_dag
from .dist import dist_to_text, parse_dist
from .dsep import format_ci, implied_ci_set, inclusion_implies, d_separated, parse_ci, parse_ci_set
from .errors import DagciError, ParseError
from .graphoid import semigraphoid_closure
from .oracle import OracleBudget, counterexample_report, refute_implication, refute_network_implication
from .reduction import (
    ImplicationAInstance,
    ImplicationInstance,
    compile_two_networks,
    implication_b_witness,
    parse_instance,
    trivial_witness,
)


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _cmd_dsep(args) -> int:
    g = parse_dag(_read(args.dag))
    stmt = parse_ci(args.ci, g.node_labels)
    verdict = d_separated(g, stmt.a, stmt.b, stmt.c)
    print("true" if verdict else "false")
    return 0 if verdict else 1


def _cmd_localci(args) -> int:
    g = parse_dag(_read(args.dag))
    for stmt in local_ci_set(g):
        print(format_ci(stmt, g.node_labels))
    return 0


def _cmd_impliedci(args) -> int:
    g = parse_dag(_read(args.dag))
    for stmt in implied_ci_set(g):
        print(format_ci(stmt, g.node_labels))
    return 0


def _cmd_inclusion(args) -> int:
    g1 = parse_dag(_read(args.dag1))
    g0 = parse_dag(_read(args.dag0))
    verdict = inclusion_implies(g1, g0)
    print("true" if verdict else "false")
    return 0 if verdict else 1


def _cmd_closure(args) -> int:
    cis, labels = parse_ci_set(_read(args.ciset))
    n = args.n
    if n < len(labels):
        raise ParseError(f"n={n} is smaller than the {len(labels)} declared labels")
    padded = tuple(labels) + tuple(
        f"v{i}" for i in range(len(labels), n)
    )
    for stmt in semigraphoid_closure(cis, n):
        print(format_ci(stmt, padded))
    return 0


def _parse_refute_spec(path: str):
    """The refutation spec format: a ``vars: <label:card>+`` header, then
    ``ci <statement>``, ``fd <labels> -> <label>``, ``network <dag path>``
    (paths relative to the spec file), and one ``target <statement>`` line.
    """
    variables: list[str] = []
    cards: list[int] = []
    cis = []
    fds = []
    networks = []
    target = None
    base = os.path.dirname(os.path.abspath(path))
    for lineno, raw in enumerate(_read(path).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vars:"):
            for token in line[len("vars:"):].split():
                if ":" in token:
                    name, card = token.rsplit(":", 1)
                    variables.append(name)
                    cards.append(int(card))
                else:
                    variables.append(token)
                    cards.append(2)
            continue
        key, _, rest = line.partition(" ")
        if key == "ci":
            cis.append(parse_ci(rest, variables))
        elif key == "fd":
            if "->" not in rest:
                raise ParseError(f"line {lineno}: expected 'fd <labels> -> <label>'")
            left, right = rest.split("->", 1)
            index = {lab: i for i, lab in enumerate(variables)}
            a = frozenset(index[t] for t in left.split())
            fds.append((a, index[right.strip()]))
        elif key == "network":
            networks.append(parse_dag(_read(os.path.join(base, rest.strip()))))
        elif key == "target":
            target = parse_ci(rest, variables)
        else:
            raise ParseError(f"line {lineno}: unknown directive {key!r}")
    if target is None:
        raise ParseError("refutation spec needs a target line")
    if networks and (cis or fds):
        raise ParseError("network antecedents cannot be mixed with ci/fd antecedents")
    if len(networks) > 2:
        raise ParseError("at most two network antecedents are supported")
    return tuple(variables), tuple(cards), cis, fds, networks, target


def _cmd_refute(args) -> int:
    variables, cards, cis, fds, networks, target = _parse_refute_spec(args.spec)
    if args.cards is not None:
        tokens = args.cards.split(",")
        cards = ((int(tokens[0]),) * len(variables) if len(tokens) == 1
                 else tuple(int(t) for t in tokens))
    budget = OracleBudget(
        restarts=args.restarts, iterations=args.iterations,
        seed=args.seed, cards=tuple(cards),
    )
    if networks:
        g1 = networks[0]
        g2 = networks[1] if len(networks) > 1 else networks[0]
        result = refute_network_implication(g1, g2, target, budget)
        report = lambda p: counterexample_report(p, networks=networks, target=target)
    else:
        result = refute_implication(cis, fds, target, budget, labels=variables)
        report = lambda p: counterexample_report(
            p, antecedent_cis=cis, antecedent_fds=fds, target=target
        )
    if result is None:
        print("inconclusive")
        return 0
    sys.stdout.write(dist_to_text(result))
    for line in report(result):
        print(line)
    return 1


def _cmd_reduce(args) -> int:
    inst = parse_instance(_read(args.instance))
    if not isinstance(inst, ImplicationInstance):
        raise ParseError("reduce needs a two-group instance file")
    out = compile_two_networks(inst)
    os.makedirs(args.out, exist_ok=True)
    serialize = dag_to_dot if args.format == "dot" else dag_to_text
    ext = "dot" if args.format == "dot" else "dag"
    for idx, g in ((1, out.network1), (2, out.network2)):
        _write(os.path.join(args.out, f"network{idx}.{ext}"), serialize(g))
    _write(
        os.path.join(args.out, "target.ci"),
        format_ci(out.target_ci, out.network1.node_labels) + "\n",
    )
    if not args.no_plot:
        from .viz import draw_dag

        for idx, g in ((1, out.network1), (2, out.network2)):
            draw_dag(g, os.path.join(args.out, f"network{idx}.png"),
                     title=f"Network {idx}")
    print(f"nodes {out.network1.node_count}")
    print(f"network1 edges {len(out.network1.edges)}")
    print(f"network2 edges {len(out.network2.edges)}")
    print(f"target {format_ci(out.target_ci, out.network1.node_labels)}")
    return 0


def _cmd_witness(args) -> int:
    inst = parse_instance(_read(args.instance))
    pv = parse_dist(_read(args.dist))
    if isinstance(inst, ImplicationAInstance):
        witness = implication_b_witness(pv, inst)
    else:
        witness = trivial_witness(inst, pv)
    text = dist_to_text(witness)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_selftest(args) -> int:
    results = selftest_mod.run_all(verbose=True)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dagci",
        description="Conditional-independence reasoning for Bayesian network structures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dsep", help="decide one CI query against a network")
    p.add_argument("dag")
    p.add_argument("ci")
    p.set_defaults(func=_cmd_dsep)

    p = sub.add_parser("localci", help="print the network's local CI statements")
    p.add_argument("dag")
    p.set_defaults(func=_cmd_localci)

    p = sub.add_parser("impliedci", help="print every CI the network implies")
    p.add_argument("dag")
    p.set_defaults(func=_cmd_impliedci)

    p = sub.add_parser("inclusion", help="decide whether dag1 implies dag0")
    p.add_argument("dag1")
    p.add_argument("dag0")
    p.set_defaults(func=_cmd_inclusion)

    p = sub.add_parser("closure", help="semigraphoid closure of a CI-set file")
    p.add_argument("ciset")
    p.add_argument("n", type=int)
    p.set_defaults(func=_cmd_closure)

    p = sub.add_parser("refute", help="search for a counterexample distribution")
    p.add_argument("spec")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--cards", default=None,
                   help="override cardinalities: one value or a comma list")
    p.set_defaults(func=_cmd_refute)

    p = sub.add_parser("reduce", help="compile an instance into two networks")
    p.add_argument("instance")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("dag", "dot"), default="dag")
    p.add_argument("--no-plot", action="store_true",
                   help="skip rendering network figures")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("witness", help="build the witness distribution for an instance")
    p.add_argument("instance")
    p.add_argument("dist")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_witness)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (DagciError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
