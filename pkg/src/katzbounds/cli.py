"""Command-line front end.

Subcommands: static (one bounded run), dynamic (replay a batch file
against a live state), compare (bounded engine next to the baseline
methods), gen (write benchmark instances). Exit codes: 0 success,
2 usage, 3 domain or parameter problem, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time

import numpy as np

from . import baselines, dynamic, engine
from .errors import KatzError
from .generate import MODELS, generate
from .graph import Graph, dumps_edge_list, load_edge_list
from .reports import (NODE_ROW_CAP, RunReport, dumps_csv, dumps_json,
                      node_rows)

log = logging.getLogger(__name__)


def console_main() -> None:
    sys.exit(main(sys.argv[1:]))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except KatzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="katzbounds",
        description="Katz centrality rankings from certified bounds.")
    parser.add_argument("--verbose", action="store_true",
                        help="log progress details to stderr")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_static = sub.add_parser(
        "static", help="run the bounded engine once on a fixed graph")
    _add_graph_args(p_static)
    _add_engine_args(p_static)
    _add_output_args(p_static)
    p_static.set_defaults(func=cmd_static)

    p_dynamic = sub.add_parser(
        "dynamic", help="run once, then replay a batch file of arc changes")
    _add_graph_args(p_dynamic)
    p_dynamic.add_argument("batches", help="batch file: '+ u v' / '- u v' "
                           "lines, blank line between batches")
    _add_engine_args(p_dynamic)
    p_dynamic.add_argument("--theta", type=float, default=0.5,
                           help="affected-set fraction that triggers "
                           "full-level recomputation (default 0.5)")
    p_dynamic.add_argument("--verify", action="store_true",
                           help="check each update against a fresh "
                           "static run (slow)")
    _add_output_args(p_dynamic)
    p_dynamic.set_defaults(func=cmd_dynamic)

    p_compare = sub.add_parser(
        "compare", help="bounded engine next to foster / cg baselines")
    _add_graph_args(p_compare)
    p_compare.add_argument("--methods", default="katz,foster,cg",
                           help="comma list from katz,foster,cg "
                           "(default all; katz always runs)")
    p_compare.add_argument("--epsilon", type=float, default=engine.DEFAULT_EPSILON)
    p_compare.add_argument("--alpha", type=float, default=None)
    p_compare.add_argument("--foster-tol", type=float, default=1e-9)
    p_compare.add_argument("--cg-tol", type=float, default=1e-15)
    p_compare.add_argument("--threads", type=int, default=None)
    _add_output_args(p_compare)
    p_compare.set_defaults(func=cmd_compare)

    p_gen = sub.add_parser("gen", help="write a benchmark edge list")
    p_gen.add_argument("out_path", help="output file")
    p_gen.add_argument("--model", required=True, choices=MODELS)
    p_gen.add_argument("--nodes", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--edge-factor", type=int, default=8,
                       help="rmat only: sampled edges per node (default 8)")
    p_gen.set_defaults(func=cmd_gen)
    return parser


def _add_graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("graph", help="edge list file ('u v' lines, '#'/'%%' "
                   "comments, optional 'NODES n' header)")
    p.add_argument("--undirected", action="store_true",
                   help="treat each line as an edge in both directions "
                   "and use the sharper undirected lower bound")


def _add_engine_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--criterion", default="ranking",
                   choices=("ranking", "topk", "score", "pair"),
                   help="stopping rule (default ranking)")
    p.add_argument("--epsilon", type=float, default=engine.DEFAULT_EPSILON,
                   help="separation tolerance (default 1e-6)")
    p.add_argument("--alpha", type=float, default=None,
                   help="attenuation factor (default 1/(1+max degree))")
    p.add_argument("--k", type=int, default=None, help="k for --criterion topk")
    p.add_argument("--pair", type=int, nargs=2, metavar=("U", "V"),
                   default=None, help="node pair for --criterion pair")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for level computation; results "
                   "are identical for every value (default: "
                   "KATZ_THREADS or 1)")
    p.add_argument("--max-iterations", type=int, default=None,
                   help="iteration cap (default derived from epsilon)")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="json", choices=("json", "csv"),
                   help="report format (default json)")
    p.add_argument("--out-file", default=None,
                   help="write the report here instead of stdout")
    p.add_argument("--full", action="store_true",
                   help="emit every node row (default caps at 10^6)")


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("KATZ_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise KatzError(f"KATZ_THREADS is not an integer: {env!r}") from None
    return 1


def _criterion(args) -> engine.Criterion:
    if args.criterion == "topk":
        if args.k is None:
            raise KatzError("--criterion topk needs --k")
        return engine.Criterion.top_k(args.k, args.epsilon)
    if args.criterion == "pair":
        if args.pair is None:
            raise KatzError("--criterion pair needs --pair U V")
        return engine.Criterion.pair(args.pair[0], args.pair[1], args.epsilon)
    if args.criterion == "score":
        return engine.Criterion.score(args.epsilon)
    return engine.Criterion.ranking(args.epsilon)


def _emit(args, report: RunReport, order=None, lower=None, upper=None) -> None:
    if args.out == "csv":
        if order is None:
            raise KatzError("csv output needs per-node results")
        rows = node_rows(order, lower, upper,
                         cap=None if args.full else NODE_ROW_CAP)
        text = dumps_csv(rows)
    else:
        text = dumps_json(report.to_dict())
    if args.out_file:
        with open(args.out_file, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _engine_parameters(state: engine.KatzState) -> dict:
    crit = state.criterion
    params = {
        "criterion": crit.kind,
        "epsilon": crit.epsilon,
        "alpha": state.alpha,
        "gamma": state.gamma,
        "undirected": state.undirected,
        "threads": state.threads,
    }
    if crit.kind == engine.TOPK:
        params["k"] = crit.k
    if crit.kind == engine.PAIR:
        params["pair"] = [crit.u, crit.v]
    return params


def _prefix_length(state: engine.KatzState) -> int:
    if state.criterion.kind == engine.TOPK:
        return state.criterion.k
    return min(10, state.n)


# ---- subcommands ----

def cmd_static(args) -> int:
    g = load_edge_list(args.graph, undirected=args.undirected)
    crit = _criterion(args)
    state = engine.init(g, crit, alpha=args.alpha,
                        undirected=args.undirected, threads=_threads(args),
                        max_iterations=args.max_iterations)
    start = time.perf_counter()
    result = engine.run(state, g)
    wall = time.perf_counter() - start
    cap = None if args.full else NODE_ROW_CAP
    report = RunReport(
        command="static", method="katz-bounds",
        parameters=_engine_parameters(state),
        iterations=result.iterations_used, wall_time_s=wall,
        separated_fraction=result.separated_fraction,
        ranking_prefix=result.top(_prefix_length(state)),
        nodes=node_rows(result.order, result.lower, result.upper, cap=cap))
    _emit(args, report, result.order, result.lower, result.upper)
    return 0


def cmd_dynamic(args) -> int:
    g = load_edge_list(args.graph, undirected=args.undirected)
    batches = dynamic.load_batches(args.batches)
    crit = _criterion(args)
    state = engine.init(g, crit, alpha=args.alpha,
                        undirected=args.undirected, threads=_threads(args),
                        max_iterations=args.max_iterations)
    start = time.perf_counter()
    engine.run(state, g)
    initial_wall = time.perf_counter() - start
    initial_iterations = state.r

    batch_reports = []
    for index, batch in enumerate(batches):
        start = time.perf_counter()
        dynamic.update_batch(state, g, batch, theta=args.theta)
        wall = time.perf_counter() - start
        stats = state.last_update_stats
        entry = {
            "batch": index,
            "insertions": len(batch.insertions),
            "deletions": len(batch.deletions),
            "wall_time_s": wall,
            "visited": stats.visited,
            "level_sizes": stats.level_sizes,
            "reactivated": stats.reactivated,
            "aborted_level": stats.aborted_level,
            "resumed_iterations": stats.resumed_iterations,
        }
        if args.verify:
            entry["matches_static"] = _matches_fresh_static(state, g)
        batch_reports.append(entry)

    result = engine.ranking_result(state)
    cap = None if args.full else NODE_ROW_CAP
    report = RunReport(
        command="dynamic", method="katz-bounds",
        parameters=_engine_parameters(state),
        iterations=state.r,
        wall_time_s=initial_wall + sum(b["wall_time_s"] for b in batch_reports),
        separated_fraction=result.separated_fraction,
        ranking_prefix=result.top(_prefix_length(state)),
        nodes=node_rows(result.order, result.lower, result.upper, cap=cap),
        extra={"initial_iterations": initial_iterations,
               "initial_wall_time_s": initial_wall,
               "batches": batch_reports})
    _emit(args, report, result.order, result.lower, result.upper)
    return 0


def _matches_fresh_static(state: engine.KatzState, g: Graph,
                          rel_tol: float = 1e-12) -> bool:
    """Recompute from scratch to the same depth and compare levels."""
    fresh = engine.init(g, state.criterion, alpha=state.alpha,
                        undirected=state.undirected,
                        max_iterations=max(state.r, 1))
    for _ in range(state.r):
        engine.iterate_once(fresh, g)
    for mine, theirs in zip(state.levels, fresh.levels):
        if not np.allclose(mine, theirs, rtol=rel_tol, atol=rel_tol):
            return False
    return (np.allclose(state.katz, fresh.katz, rtol=rel_tol, atol=rel_tol)
            and np.allclose(state.lower, fresh.lower, rtol=rel_tol, atol=rel_tol)
            and np.allclose(state.upper, fresh.upper, rtol=rel_tol, atol=rel_tol))


def cmd_compare(args) -> int:
    g = load_edge_list(args.graph, undirected=args.undirected)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = set(methods) - {"katz", "foster", "cg"}
    if unknown:
        raise KatzError(f"unknown methods: {', '.join(sorted(unknown))}")
    threads = args.threads if args.threads is not None else 1

    # The bounded engine always runs: it anchors the agreement numbers.
    state = engine.init(g, engine.Criterion.ranking(args.epsilon),
                        alpha=args.alpha, undirected=args.undirected,
                        threads=threads)
    start = time.perf_counter()
    result = engine.run(state, g)
    katz_wall = time.perf_counter() - start
    anchor = result.order

    entries = [{
        "method": "katz-bounds",
        "iterations": result.iterations_used,
        "wall_time_s": katz_wall,
        "separated_fraction": result.separated_fraction,
        "top": result.top(min(10, state.n)),
        "ranking_agreement": 1.0,
    }]
    for name in methods:
        if name == "katz":
            continue
        start = time.perf_counter()
        if name == "foster":
            sv = baselines.foster(g, alpha=state.alpha, tol=args.foster_tol)
        else:
            sv = baselines.cg_katz(g, alpha=state.alpha,
                                   residual_tol=args.cg_tol)
        wall = time.perf_counter() - start
        entries.append({
            "method": sv.method,
            "iterations": sv.iterations,
            "residual": sv.residual,
            "wall_time_s": wall,
            "top": [int(v) for v in sv.ranking()[:min(10, state.n)]],
            "ranking_agreement": concordant_fraction(anchor, sv.ranking()),
        })

    report = RunReport(
        command="compare", method="katz-bounds",
        parameters=_engine_parameters(state),
        iterations=result.iterations_used,
        wall_time_s=katz_wall + sum(e["wall_time_s"] for e in entries[1:]),
        separated_fraction=result.separated_fraction,
        ranking_prefix=result.top(min(10, state.n)),
        extra={"methods": entries})
    _emit(args, report, result.order, result.lower, result.upper)
    return 0


def concordant_fraction(order_a, order_b) -> float:
    """Fraction of node pairs ordered the same way by both rankings."""
    n = len(order_a)
    if n < 2:
        return 1.0
    pos = np.empty(n, dtype=np.int64)
    pos[np.asarray(order_a)] = np.arange(n)
    seq = pos[np.asarray(order_b)]
    inversions = _count_inversions(list(seq))
    total = n * (n - 1) // 2
    return 1.0 - inversions / total


def _count_inversions(seq: list[int]) -> int:
    """Merge-sort inversion count, iterative to spare the stack."""
    width = 1
    n = len(seq)
    count = 0
    src = list(seq)
    buf = [0] * n
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if src[i] <= src[j]:
                    buf[k] = src[i]
                    i += 1
                else:
                    buf[k] = src[j]
                    j += 1
                    count += mid - i
                k += 1
            buf[k:hi] = src[i:mid] if i < mid else src[j:hi]
        src, buf = buf, src
        width *= 2
    return count


def cmd_gen(args) -> int:
    edges = generate(args.model, args.nodes, seed=args.seed,
                              edge_factor=args.edge_factor)
    with open(args.out_path, "w") as fh:
        fh.write(dumps_edge_list(args.nodes, edges))
    log.info("wrote %d edges on %d nodes to %s",
             len(edges), args.nodes, args.out_path)
    return 0


if __name__ == "__main__":
    console_main()
