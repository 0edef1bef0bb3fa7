"""Command-line interface: ``python -m hkpr <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import sys

from .bench import ExperimentSpec, run_experiments, summarize, write_csv
from .clustering import sweep, sweep_order
from .errors import GraphFormatError, ParameterError
from .estimators import METHODS, HkprParams, estimate
from .graph import Graph, load_edge_list
from .oracle import exact_hkpr, f1_score, load_communities, ndcg_at
from .sampling import RandomSource
from .weights import poisson_weights

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _delta(text: str) -> str:
    if text.strip() != "1/n":
        try:
            float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a number or '1/n', got {text!r}") from None
    return text.strip()


def _add_graph(p):
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--index-base", type=int, choices=(0, 1), default=0,
                   help="lowest node id when a header declares isolated nodes")
    p.add_argument("--header", action="store_true", help="first data line is 'n m'")


def _add_output(p):
    p.add_argument("--output", help="write here instead of stdout")
    p.add_argument("--csv", action="store_true", help="comma-separated instead of tab-separated")


def _add_params(p):
    p.add_argument("--seed", required=True, help="seed node (raw id from the edge list)")
    p.add_argument("--method", choices=METHODS, default="tea+")
    p.add_argument("--t", type=float, default=5.0, help="heat constant")
    p.add_argument("--eps-r", type=float, default=0.5, help="relative error bound")
    p.add_argument("--delta", type=_delta, default="1/n", help="threshold, a number or '1/n'")
    p.add_argument("--pf", type=float, default=1e-6, help="failure probability")
    p.add_argument("--c", type=float, default=2.5, help="hop-cap constant for tea+")
    p.add_argument("--K", type=int, help="fix the tea+ hop cap instead of deriving it")
    p.add_argument("--r-max", type=float, help="residue threshold for tea")
    p.add_argument("--rng-seed", type=int, default=0, help="master random seed")
    p.add_argument("--threads", type=int, default=1, help="walk-phase threads")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hkpr", description="Heat kernel PageRank estimation and local clustering.")
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("hkpr", help="estimate an HKPR vector")
    _add_graph(p), _add_params(p), _add_output(p)
    p.add_argument("--top-k", type=int, help="emit only the k highest value/d nodes")

    p = sub.add_parser("cluster", help="estimate and sweep for the best-conductance cluster")
    _add_graph(p), _add_params(p), _add_output(p)

    p = sub.add_parser("exact", help="power-method HKPR vector")
    _add_graph(p), _add_output(p)
    p.add_argument("--seed", required=True)
    p.add_argument("--t", type=float, default=5.0)
    p.add_argument("--iterations", type=int, default=40)
    p.add_argument("--top-k", type=int)

    p = sub.add_parser("eval", help="NDCG against the oracle and/or F1 against ground truth")
    _add_graph(p), _add_params(p), _add_output(p)
    p.add_argument("--top-k", type=int, default=100, help="NDCG cutoff")
    p.add_argument("--ground-truth", help="community file, one community per line")
    p.add_argument("--no-ndcg", action="store_true", help="skip the oracle comparison")

    p = sub.add_parser("bench", help="run an experiment config and emit CSV")
    p.add_argument("--config", required=True, help="JSON experiment spec")
    p.add_argument("--output", help="CSV destination (default stdout)")
    p.add_argument("--summary", action="store_true", help="print per-configuration means to stderr")
    return parser


def _load(args) -> Graph:
    try:
        return load_edge_list(args.graph, index_base=args.index_base, header=args.header)
    except OSError as exc:
        raise DataError(f"cannot read graph: {exc}") from None
    except GraphFormatError as exc:
        raise DataError(f"bad graph file: {exc}") from None


def _seed(g: Graph, raw: str) -> int:
    try:
        s = g.node(raw)
    except KeyError:
        raise DataError(f"unknown seed node {raw!r}") from None
    if g.degree(s) == 0:
        raise DataError(f"seed node {raw!r} has degree 0")
    return s


def _params(args, g: Graph) -> HkprParams:
    delta = 1.0 / g.n if args.delta == "1/n" else float(args.delta)
    try:
        return HkprParams(
            t=args.t, eps_r=args.eps_r, delta=delta, p_f=args.pf, c=args.c, r_max=args.r_max,
            K=args.K, seed=args.rng_seed, threads=args.threads,
        )
    except ParameterError as exc:
        raise UsageError(str(exc)) from None


def _estimate(args):
    g = _load(args)
    s = _seed(g, args.seed)
    params = _params(args, g)
    try:
        w = poisson_weights(params.t)
        est = estimate(args.method, g, s, params, w, RandomSource(params.seed))
    except ParameterError as exc:
        raise DataError(str(exc)) from None
    logging.getLogger("hkpr").info("run stats: %s", est.meta)
    return g, est


def _header(est) -> str:
    m = est.meta
    return f"# method={m['estimator']} walks={m['walks']} pushes={m['pushes']:g} offset={est.offset_coeff!r}"


def cmd_hkpr(args, out):
    g, est = _estimate(args)
    order = sweep_order(g, est)
    if args.top_k is not None:
        order = order[: args.top_k]
    eff = est.effective(g)
    print(_header(est), file=out.stream)
    for v in order:
        out.row(g.label(v), repr(float(eff[v])), repr(float(eff[v] / g.degrees[v])))


def cmd_cluster(args, out):
    g, est = _estimate(args)
    try:
        res = sweep(g, est)
    except ParameterError as exc:
        raise DataError(str(exc)) from None
    print(_header(est), file=out.stream)
    out.row("conductance", repr(res.best_conductance))
    out.row("size", str(len(res.best_cluster)))
    out.row("members", *(g.label(v) for v in res.best_cluster))
    for i, phi in enumerate(res.conductances):
        out.row("prefix", str(i + 1), g.label(res.order[i]), repr(float(phi)))


def cmd_exact(args, out):
    g = _load(args)
    s = _seed(g, args.seed)
    try:
        ex = exact_hkpr(g, s, poisson_weights(args.t), args.iterations)
    except ParameterError as exc:
        raise UsageError(str(exc)) from None
    print(f"# iterations={ex.iterations} tail_mass={ex.tail_mass!r}", file=out.stream)
    norm = ex.values / g.degrees.clip(min=1)
    order = [v for v in sorted(range(g.n), key=lambda v: (-norm[v], v)) if ex.values[v] > 0]
    if args.top_k is not None:
        order = order[: args.top_k]
    for v in order:
        out.row(g.label(v), repr(float(ex.values[v])), repr(float(norm[v])))


def cmd_eval(args, out):
    if args.no_ndcg and not args.ground_truth:
        raise UsageError("nothing to evaluate: give --ground-truth or drop --no-ndcg")
    g, est = _estimate(args)
    print(_header(est), file=out.stream)
    if not args.no_ndcg:
        ex = exact_hkpr(g, g.node(args.seed), poisson_weights(args.t))
        out.row("ndcg", repr(ndcg_at(est, ex, g, args.top_k)))
    res = sweep(g, est)
    out.row("conductance", repr(res.best_conductance))
    if args.ground_truth:
        try:
            comms = load_communities(args.ground_truth)
        except OSError as exc:
            raise DataError(f"cannot read ground truth: {exc}") from None
        seed_label = g.label(g.node(args.seed))
        mine = [c for c in comms if seed_label in c] or comms
        if not mine:
            raise DataError("ground-truth file holds no communities")
        members = [g.label(v) for v in res.best_cluster]
        out.row("f1", repr(max(f1_score(members, c) for c in mine)))


def cmd_bench(args, out):
    try:
        spec = ExperimentSpec.from_json(args.config)
    except OSError as exc:
        raise DataError(f"cannot read config: {exc}") from None
    except (ParameterError, TypeError, ValueError) as exc:
        raise UsageError(f"bad config: {exc}") from None
    try:
        g = spec.load_graph()
    except OSError as exc:
        raise DataError(f"cannot read graph: {exc}") from None
    except GraphFormatError as exc:
        raise DataError(f"bad graph file: {exc}") from None
    try:
        records = run_experiments(spec, g)
    except KeyError as exc:
        raise DataError(f"unknown seed node {exc.args[0]!r}") from None
    write_csv(records, out.stream)
    if args.summary:
        for row in summarize(records):
            print(row, file=sys.stderr)


class _Out:
    def __init__(self, stream, delimiter):
        self.stream = stream
        self._writer = csv.writer(stream, delimiter=delimiter, lineterminator="\n")

    def row(self, *cells):
        self._writer.writerow(cells)


COMMANDS = {
    "hkpr": cmd_hkpr,
    "cluster": cmd_cluster,
    "exact": cmd_exact,
    "eval": cmd_eval,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with contextlib.ExitStack() as stack:
            if args.output:
                try:
                    stream = stack.enter_context(open(args.output, "w", encoding="utf-8"))
                except OSError as exc:
                    raise DataError(f"cannot write output: {exc}") from None
            else:
                stream = sys.stdout
            out = _Out(stream, "," if getattr(args, "csv", False) else "\t")
            COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"hkpr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"hkpr: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
