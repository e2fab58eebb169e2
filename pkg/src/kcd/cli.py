"""Command-line entry point ``kcd``.

Exit codes: 0 success, 1 usage error, 2 bad input, 3 internal invariant violated.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .bench import (BayesNet, ExperimentConfig, default_threads, random_bayes_net, random_dag,
                    random_linear_scm, run_experiment, sample_discrete, sample_linear, substream,
                    write_rows)
from .citest import Dataset, make_tester
from .closure import (construct_k_closure, is_valid_k_closure, k_markov_equivalent,
                      k_markov_equivalent_direct)
from .enumeration import (DEFAULT_DAG_CAP, DEFAULT_PAG_EDGE_CAP, OracleBudgetError,
                          k_essential_oracle, pag_oracle)
from .graphs import DAG, GraphFormatError, MixedGraph, OrientationConflict, format_graph, \
    read_graph, to_dot
from .kpc import InvariantViolation, KPCOptions, run_kpc

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"kcd: usage: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _emit(g, args) -> None:
    text = format_graph(g)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if getattr(args, "dot", None):
        with open(args.dot, "w") as fh:
            fh.write(to_dot(g))


def _dag(path) -> DAG:
    return read_graph(path, DAG)


def cmd_closure(args) -> int:
    _emit(construct_k_closure(_dag(args.input), args.k).graph, args)
    return EXIT_OK


def cmd_validate(args) -> int:
    res = is_valid_k_closure(read_graph(args.graph), args.k)
    print(res.describe())
    return EXIT_OK


def cmd_equiv(args) -> int:
    d1, d2 = _dag(args.graphs[0]), _dag(args.graphs[1])
    if args.direct:
        same, stmt = k_markov_equivalent_direct(d1, d2, args.k, witness=True)
    else:
        same, stmt = k_markov_equivalent(d1, d2, args.k), None
    print(f"k-markov-equivalent: {str(same).lower()}")
    if stmt is not None:
        a, b, c = stmt
        print(f"witness: {a} _||_ {b} | {{{','.join(sorted(c))}}}")
    return EXIT_OK


def cmd_essential(args) -> int:
    _emit(k_essential_oracle(_dag(args.input), args.k, direct=args.direct, max_n=args.max_n), args)
    return EXIT_OK


def cmd_pag(args) -> int:
    g = read_graph(args.input)
    if args.k is not None:
        if not isinstance(g, DAG):
            raise GraphFormatError("--k needs a DAG input; its k-closure is used")
        g = construct_k_closure(g, args.k).graph
    elif not isinstance(g, MixedGraph):
        raise GraphFormatError("pag needs a DAG or a mixed graph")
    _emit(pag_oracle(g, max_edges=args.max_edges), args)
    return EXIT_OK


def cmd_learn(args) -> int:
    if args.ci_backend == "oracle":
        if not args.truth:
            raise UsageError("--ci-backend oracle needs --truth")
        tester = make_tester("oracle", truth=_dag(args.truth))
    else:
        if not args.data:
            raise UsageError(f"--ci-backend {args.ci_backend} needs --data")
        data = Dataset.read_csv(args.data, discrete=args.ci_backend == "gsq")
        tester = make_tester(args.ci_backend, data=data, alpha=args.alpha,
                             min_cell_expectation=args.min_cell_expectation)
    state = run_kpc(tester, k=args.k, options=KPCOptions(scope=args.scope, step5=args.step5))
    if args.trace:
        with open(args.trace, "w") as fh:
            for ev in state.trace:
                fh.write(ev.to_json() + "\n")
    _emit(state.graph, args)
    return EXIT_OK


def cmd_simulate(args) -> int:
    rng = substream(args.seed, 0)
    if args.truth:
        dag = _dag(args.truth)
    else:
        if args.n is None:
            raise UsageError("give --truth or --n")
        dag = random_dag(args.n, args.max_edges, rng)
    if args.model == "discrete":
        if args.cpt:
            with open(args.cpt) as fh:
                model = BayesNet.from_json(dag, fh.read())
        else:
            model = random_bayes_net(dag, args.states, rng)
        data = sample_discrete(model, args.rows, substream(args.seed, 1))
    else:
        data = sample_linear(random_linear_scm(dag, rng), args.rows, substream(args.seed, 1))
    data.write_csv(args.out)
    if args.out_graph:
        with open(args.out_graph, "w") as fh:
            fh.write(format_graph(dag))
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = ExperimentConfig.read(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.output = args.out
    rows = run_experiment(cfg, threads=args.threads or default_threads())
    if not cfg.output:
        write_rows(rows, sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kcd", description="k-closure graphs, k-essential graphs and the k-PC learner")
    p.add_argument("--version", action="version", version=f"kcd {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def k_arg(sp, required=True):
        sp.add_argument("--k", type=int, required=required, help="conditioning-set size bound")

    def out_args(sp):
        sp.add_argument("--out", help="output graph file (default stdout)")
        sp.add_argument("--dot", help="also write Graphviz DOT here")

    sp = sub.add_parser("closure", help="k-closure of a DAG")
    k_arg(sp)
    sp.add_argument("--in", dest="input", required=True)
    out_args(sp)
    sp.set_defaults(fn=cmd_closure)

    sp = sub.add_parser("validate", help="check whether a graph is a valid k-closure")
    k_arg(sp)
    sp.add_argument("graph")
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("equiv", help="k-Markov equivalence of two DAGs")
    k_arg(sp)
    sp.add_argument("--direct", action="store_true",
                    help="compare separation statements instead of closures; prints a witness")
    sp.add_argument("graphs", nargs=2)
    sp.set_defaults(fn=cmd_equiv)

    sp = sub.add_parser("essential", help="k-essential graph by exhaustive enumeration")
    k_arg(sp)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--direct", action="store_true")
    sp.add_argument("--max-n", type=int, default=DEFAULT_DAG_CAP,
                    help=f"vertex cap for DAG enumeration (default {DEFAULT_DAG_CAP}, at most 6)")
    out_args(sp)
    sp.set_defaults(fn=cmd_essential)

    sp = sub.add_parser("pag", help="PAG of a MAG, or of a DAG's k-closure with --k")
    k_arg(sp, required=False)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--max-edges", type=int, default=DEFAULT_PAG_EDGE_CAP,
                    help=f"edge cap for MAG enumeration (default {DEFAULT_PAG_EDGE_CAP})")
    out_args(sp)
    sp.set_defaults(fn=cmd_pag)

    sp = sub.add_parser("learn", help="run k-PC")
    k_arg(sp)
    sp.add_argument("--ci-backend", choices=("oracle", "gsq", "fisherz"), default="gsq")
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--min-cell-expectation", type=float, default=0.0)
    sp.add_argument("--scope", choices=("all", "neighbors"), default="all")
    sp.add_argument("--step5", choices=("single", "fixpoint", "off"), default="single")
    sp.add_argument("--trace", help="write rule events as JSON lines")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--truth", help="truth DAG for the oracle backend")
    src.add_argument("--data", help="dataset CSV")
    out_args(sp)
    sp.set_defaults(fn=cmd_learn)

    sp = sub.add_parser("simulate", help="sample a dataset from a random or given DAG")
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--truth", help="DAG to sample from")
    src.add_argument("--n", type=int, help="number of vertices of a random DAG")
    sp.add_argument("--max-edges", type=int, default=15)
    sp.add_argument("--model", choices=("discrete", "linear"), default="discrete")
    sp.add_argument("--states", type=int, default=2)
    sp.add_argument("--cpt", help="JSON conditional probability tables for --truth")
    sp.add_argument("--rows", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="dataset CSV")
    sp.add_argument("--out-graph", help="write the sampled DAG here")
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("bench", help="run a benchmark described by a key=value config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", help="CSV output (overrides the config)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--threads", type=int, help="worker processes (default KCD_THREADS or all cores)")
    sp.set_defaults(fn=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="kcd: %(levelname)s: %(message)s")
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"kcd: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OracleBudgetError as exc:
        print(f"kcd: error: budget: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvariantViolation, OrientationConflict, AssertionError) as exc:
        print(f"kcd: error: invariant: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (GraphFormatError, ValueError, OSError, KeyError) as exc:
        print(f"kcd: error: input: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
