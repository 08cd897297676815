"""Command-line front end.

Exit codes: 0 success, 1 no satisfying model, 2 bad input.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Iterable, Mapping, Optional

import numpy as np

from wbfmap.compiler import NodeKind, compile_network
from wbfmap.dot import to_dot
from wbfmap.generate import random_network
from wbfmap.network import BeliefNetwork, Evidence, NetworkError, dump_network, load_network
from wbfmap.oracle import OracleTooLarge, kbest_oracle, partial_roots_oracle
from wbfmap.search import (
    Mode,
    NoModelError,
    NotPolytreeError,
    heuristic_min_entry,
    heuristic_zero,
    solve_kbest,
    solve_map,
    solve_map_polytree,
)

EXIT_OK, EXIT_NO_MODEL, EXIT_INPUT = 0, 1, 2


def parse_evidence(text: str, net: BeliefNetwork) -> Evidence:
    """Parse ``name=value,name=value`` into node/value ids."""
    ev: Evidence = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        name, sep, value = item.partition("=")
        if not sep:
            raise NetworkError(f"evidence item {item!r} is not name=value")
        node = net.node_id(name.strip())
        if node in ev:
            raise NetworkError(f"duplicate evidence for node {name.strip()!r}")
        ev[node] = net.value_id(node, value.strip())
    return ev


def format_block(net: BeliefNetwork, assignment: Mapping[int, int], cost: float, prob: float) -> str:
    lines = [f"{net.names[v]}={net.values[v][d]}" for v, d in sorted(assignment.items())]
    lines.append(f"cost={cost!r}")
    lines.append(f"prob={prob!r}")
    return "\n".join(lines) + "\n"


def _blocks(blocks: Iterable[str]) -> str:
    return "\n".join(blocks)


def _compile(args, net, ev):
    return compile_network(net, ev, prune01=args.prune01, zero_nonprior=args.zero_nonprior)


def _heuristic(args, dag):
    return heuristic_min_entry(dag) if args.heuristic == "min-entry" else heuristic_zero()


def _cmd_solve(args, net, ev) -> tuple[int, str]:
    dag = _compile(args, net, ev)
    mode = Mode.ANCESTRAL if args.ancestral else Mode.COMPLETE
    if args.command == "solve":
        if args.polytree:
            result = solve_map_polytree(net, ev, dag)
        else:
            result = solve_map(dag, _heuristic(args, dag), mode)
        results = [result]
    else:
        results = solve_kbest(dag, args.k, _heuristic(args, dag), mode)
        if not results:
            raise NoModelError("no satisfying model")
    return EXIT_OK, _blocks(format_block(net, r.assignment, r.cost, r.probability) for r in results)


def _cmd_oracle(args, net, ev) -> tuple[int, str]:
    if args.zero_nonprior:
        best = partial_roots_oracle(net, ev)
        ranked = [best] if best is not None else []
    else:
        ranked = kbest_oracle(net, ev, args.k)
    if not ranked:
        raise NoModelError("no assignment with nonzero probability")
    return EXIT_OK, _blocks(
        format_block(net, r.assignment, -math.log(r.probability), r.probability) for r in ranked
    )


def _cmd_compile(args, net, ev) -> tuple[int, str]:
    dag = _compile(args, net, ev)
    nodes = dag.kind_counts()
    edges = dag.edge_counts()
    lines = [f"nodes={len(dag)}"]
    lines += [f"{kind.value}={nodes[kind]}" for kind in NodeKind]
    lines.append(f"edges={sum(edges.values())}")
    lines += [f"edges_into_{kind.value}={edges[kind]}" for kind in NodeKind]
    return EXIT_OK, "\n".join(lines) + "\n"


def _cmd_dot(args, net, ev) -> tuple[int, str]:
    return EXIT_OK, to_dot(_compile(args, net, ev), net)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wbfmap", description="MAP assignments of Bayesian networks via WBF DAG search."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def network_command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("network", help="network JSON file")
        p.add_argument("--evidence", default="", help="comma-separated name=value findings")
        p.add_argument("--prune01", dest="prune01", action="store_true", default=True,
                       help="omit gadget entries for 0/1 probabilities (default)")
        p.add_argument("--no-prune01", dest="prune01", action="store_false")
        p.add_argument("--zero-nonprior", action="store_true",
                       help="zero all conditional costs: best root-prior score (partial MAP)")
        p.add_argument("-o", "--output", help="write to this file instead of stdout")
        return p

    for name, help_text in (("solve", "most probable assignment"), ("kbest", "k most probable assignments")):
        p = network_command(name, help_text)
        p.add_argument("--heuristic", choices=("zero", "min-entry"), default="min-entry")
        p.add_argument("--ancestral", action="store_true",
                       help="assign only evidence ancestors and evidence-free components")
        if name == "solve":
            p.add_argument("--polytree", action="store_true", help="memoized polytree solver")
        else:
            p.add_argument("--k", type=int, default=1)

    p = network_command("oracle", "brute-force reference answer")
    p.add_argument("--k", type=int, default=1)
    network_command("compile", "print WBF DAG node and edge counts")
    network_command("dot", "emit the WBF DAG in Graphviz DOT")

    p = sub.add_parser("gen", help="write a random valid network")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--nodes", type=int, default=8)
    p.add_argument("--max-values", type=int, default=3)
    p.add_argument("--max-parents", type=int, default=3)
    p.add_argument("--deterministic", type=float, default=0.0,
                   help="probability that a CPT row is one-hot")
    p.add_argument("--polytree", action="store_true")
    p.add_argument("-o", "--output")
    return parser


COMMANDS = {
    "solve": _cmd_solve,
    "kbest": _cmd_solve,
    "oracle": _cmd_oracle,
    "compile": _cmd_compile,
    "dot": _cmd_dot,
}


def run(args: argparse.Namespace) -> int:
    try:
        if args.command == "gen":
            if args.nodes < 1 or args.max_values < 1 or args.max_parents < 0:
                raise NetworkError("--nodes and --max-values must be positive")
            rng = np.random.default_rng(args.seed)
            net = random_network(rng, args.nodes, args.max_values, args.max_parents,
                                 args.deterministic, args.polytree,
                                 min_values=min(2, args.max_values))
            code, text = EXIT_OK, dump_network(net)
        else:
            if getattr(args, "k", 1) < 1:
                raise NetworkError("--k must be at least 1")
            net = load_network(args.network)
            ev = parse_evidence(args.evidence, net)
            code, text = COMMANDS[args.command](args, net, ev)
    except NoModelError as exc:
        print(f"no model: {exc}", file=sys.stderr)
        return EXIT_NO_MODEL
    except (NetworkError, NotPolytreeError, OracleTooLarge, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main(argv: Optional[list[str]] = None) -> int:
    return run(build_parser().parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
