"""Command-line front end: ``timax <verb> ...``.

Verbs: gen-graph, preprocess, query, evaluate, analyze, stats.  See the
README for the CSV schemas written by evaluate, analyze and stats.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time

import numpy as np

from . import diffusion
from .analysis import (
    offline_bound,
    online_bound,
    overlap_coefficients,
    probability_stats,
    sample_mixtures,
    write_overlap_csv,
    write_stats_csv,
    STATS_COLUMNS,
)
from .diffusion import Oracle, prefix_spreads
from .errors import FormatError, InvalidInputError, StaleIndexError, TimaxError
from .graph import TopicMixture, mix_probabilities, read_graph, write_graph
from .preprocess import LandmarkSet, build_index, load_index, mu_max, save_index
from .query import QUERY_ALGORITHMS
from .selection import greedy_select, select_baseline
from .synthetic import MODELS, generate_graph

log = logging.getLogger("timax")

ALGORITHMS = ("mis", "bts", "ta_greedy", "to_greedy", "to_degree", "random",
              "ta_weighted_degree", "ta_pagerank")
SPREAD_COLUMNS = ("algorithm", "seeds", "mean_spread", "mixtures")
TIMING_COLUMNS = ("algorithm", "median_us", "p99_us", "queries", "oracle_calls")
BOUND_COLUMNS = ("mixture", "weights", "offline_bound", "online_bound")


def _landmarks(text: str) -> LandmarkSet:
    if "," in text:
        return LandmarkSet.parse(text)
    return LandmarkSet.uniform(int(text))


def _mixture(text: str) -> TopicMixture:
    try:
        return TopicMixture(tuple(float(x) for x in text.split(",")))
    except ValueError as exc:
        raise InvalidInputError(f"bad mixture {text!r}: {exc}") from None


def _algorithms(text: str) -> list[str]:
    names = [a.strip() for a in text.split(",") if a.strip()]
    unknown = [a for a in names if a not in ALGORITHMS]
    if unknown or not names:
        raise InvalidInputError(f"unknown algorithm(s) {unknown}; expected from {', '.join(ALGORITHMS)}")
    return names


def cmd_gen_graph(args) -> int:
    graph = generate_graph(args.nodes, args.edges, args.topics, args.model, args.overlap,
                           args.seed, args.max_prob, args.skew)
    write_graph(graph, args.out)
    print(f"wrote {args.out}: nodes={graph.node_count} edges={graph.edge_count} topics={graph.topic_count}")
    return 0


def cmd_preprocess(args) -> int:
    graph = read_graph(args.graph)
    oracle = Oracle.exact() if args.oracle == "exact" else Oracle.mc(args.runs, args.seed)
    start = time.perf_counter()
    index = build_index(graph, args.k, _landmarks(args.landmarks), args.selector, oracle, args.workers)
    save_index(index, args.out)
    elapsed = time.perf_counter() - start
    print(f"wrote {args.out}: entries={len(index.entries)} k={index.k} "
          f"mu_max={mu_max(index):.6g} (raw {mu_max(index, raw=True):.6g}) seconds={elapsed:.3f}")
    return 0


def cmd_query(args) -> int:
    graph = read_graph(args.graph) if args.graph else None
    index = load_index(args.index, graph)
    mixture = _mixture(args.mixture)
    result = QUERY_ALGORITHMS[args.algorithm](index, mixture, args.k)
    if args.json:
        print(json.dumps({
            "algorithm": result.algorithm,
            "seeds": list(result.seeds),
            "rounded": list(result.rounded),
            "topic": result.topic,
            "scores": list(result.scores) if result.scores is not None else None,
            "latency_us": result.latency_us,
            "shortfall": result.shortfall,
            "fallback": result.fallback,
        }))
    else:
        print(" ".join(str(v) for v in result.seeds))
        print(f"# algorithm={result.algorithm} latency_us={result.latency_us:.2f}"
              + (f" topic={result.topic}" if result.topic is not None else "")
              + (" shortfall" if result.shortfall else "")
              + (" fallback" if result.fallback else ""), file=sys.stderr)
    return 0


def _percentile(values, q):
    return float(np.percentile(np.asarray(values, dtype=np.float64), q)) if values else float("nan")


def evaluate(graph, index, algorithms, k, mixtures, runs, seed, greedy_oracle,
             latency_repeats=1, with_bounds=False):
    """Run every algorithm on every mixture and measure paired spreads.

    Returns ``(spread_rows, timing_rows, bound_rows)`` in the CSV column
    orders ``SPREAD_COLUMNS``, ``TIMING_COLUMNS`` and ``BOUND_COLUMNS``.
    """
    if index is not None and k > index.k:
        raise InvalidInputError(f"k={k} exceeds the index budget {index.k}")
    curves = {a: np.zeros(k) for a in algorithms}
    latencies = {a: [] for a in algorithms}
    online_calls = {a: 0 for a in algorithms}
    cached = {}
    bounds = []
    for m_idx, mixture in enumerate(mixtures):
        p = mix_probabilities(graph, mixture)
        chosen = {}
        for algo in algorithms:
            if algo in QUERY_ALGORITHMS:
                if index is None:
                    raise InvalidInputError(f"{algo} needs --index")
                before = diffusion.total_oracle_calls()
                for _ in range(latency_repeats):
                    result = QUERY_ALGORITHMS[algo](index, mixture, k)
                    latencies[algo].append(result.latency_us)
                online_calls[algo] += diffusion.total_oracle_calls() - before
                seeds = list(result.seeds)
            else:
                start = time.perf_counter_ns()
                if algo == "ta_greedy":
                    seeds = greedy_select(graph, p, k, greedy_oracle).nodes
                elif algo in ("to_greedy", "to_degree"):
                    if algo not in cached:
                        cached[algo] = select_baseline(graph, algo, k, oracle=greedy_oracle)
                    seeds = cached[algo]
                elif algo == "random":
                    seeds = select_baseline(graph, algo, k, seed=seed + m_idx)
                else:
                    seeds = select_baseline(graph, algo, k, mixture)
                latencies[algo].append((time.perf_counter_ns() - start) / 1000.0)
            chosen[algo] = seeds
            curve = prefix_spreads(graph, p, seeds, runs, seed)
            if curve.size < k:
                fill = curve[-1] if curve.size else 0.0
                curve = np.concatenate([curve, np.full(k - curve.size, fill)])
            curves[algo] += curve
        if with_bounds:
            greedy_sets = [chosen[a] for a in ("ta_greedy", "to_greedy") if a in chosen]
            offline = ""
            if "ta_greedy" in chosen:
                offline = repr(offline_bound(float(prefix_spreads(graph, p, chosen["ta_greedy"], runs, seed)[-1])))
            online = online_bound(graph, p, greedy_sets, k, Oracle.mc(runs, seed))
            bounds.append((m_idx, ",".join(repr(w) for w in mixture.weights), offline, repr(online)))
    n = len(mixtures)
    spread_rows = [(a, j + 1, repr(float(curves[a][j] / n)), n) for a in algorithms for j in range(k)]
    timing_rows = [
        (a, repr(_percentile(latencies[a], 50)), repr(_percentile(latencies[a], 99)),
         len(latencies[a]), online_calls[a] if a in QUERY_ALGORITHMS else "")
        for a in algorithms
    ]
    return spread_rows, timing_rows, bounds


def _write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


def cmd_evaluate(args) -> int:
    graph = read_graph(args.graph)
    index = load_index(args.index, graph) if args.index else None
    algorithms = _algorithms(args.algorithms)
    mixtures = sample_mixtures(args.mixtures, args.count, graph.topic_count, args.seed,
                               alpha=args.alpha)
    greedy_oracle = Oracle.mc(args.greedy_runs or args.runs, args.seed, args.workers)
    spread_rows, timing_rows, bounds = evaluate(
        graph, index, algorithms, args.k, mixtures, args.runs, args.seed, greedy_oracle,
        args.latency_repeats, args.bounds,
    )
    os.makedirs(args.out, exist_ok=True)
    _write_csv(os.path.join(args.out, "spread.csv"), SPREAD_COLUMNS, spread_rows)
    _write_csv(os.path.join(args.out, "timing.csv"), TIMING_COLUMNS, timing_rows)
    if args.bounds:
        _write_csv(os.path.join(args.out, "bounds.csv"), BOUND_COLUMNS, bounds)
    for row in timing_rows:
        print(f"{row[0]}: median_us={float(row[1]):.2f} p99_us={float(row[2]):.2f}")
    return 0


def cmd_analyze(args) -> int:
    graph = read_graph(args.graph)
    os.makedirs(args.out, exist_ok=True)
    for theta in args.theta:
        report = overlap_coefficients(graph, theta)
        for which in ("edge", "node"):
            write_overlap_csv(report, which, os.path.join(args.out, f"overlap_{which}_theta={theta!r}.csv"))
            s = report.summary(which)
            print(f"theta={theta!r} {which}: min={s['min']} mean={s['mean']} max={s['max']}")
    write_stats_csv(probability_stats(graph), os.path.join(args.out, "stats.csv"))
    return 0


def cmd_stats(args) -> int:
    graph = read_graph(args.graph)
    rows = probability_stats(graph)
    if args.out:
        write_stats_csv(rows, args.out)
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(STATS_COLUMNS)
        for r in rows:
            writer.writerow(["" if getattr(r, c) is None else getattr(r, c) for c in STATS_COLUMNS])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timax", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master RNG seed")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--runs", type=int, default=10000, help="Monte Carlo runs")
    common.add_argument("--k", type=int, default=50, help="seed budget")
    common.add_argument("--landmarks", default="10",
                        help="interval count for uniform landmarks, or a comma-separated list")

    p = sub.add_parser("gen-graph", parents=[common], help="write a synthetic topic graph")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--edges", type=int, required=True)
    p.add_argument("--topics", type=int, required=True)
    p.add_argument("--model", choices=MODELS, default="trivalency")
    p.add_argument("--overlap", type=float, default=0.0, help="fraction of edges shared with a second topic")
    p.add_argument("--max-prob", type=float, default=0.2, help="upper bound for random_uniform")
    p.add_argument("--skew", type=float, default=1.0, help="Zipf exponent of source popularity")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("preprocess", parents=[common], help="build a landmark index")
    p.add_argument("--graph", required=True)
    p.add_argument("--oracle", choices=("mc", "exact"), default="mc")
    p.add_argument("--selector", default="greedy")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("query", parents=[common], help="answer one mixture query from an index")
    p.add_argument("--index", required=True)
    p.add_argument("--graph", help="verify the index against this graph")
    p.add_argument("--mixture", required=True, help="comma-separated topic weights")
    p.add_argument("--algorithm", choices=sorted(QUERY_ALGORITHMS), default="mis")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_query, k=None)

    p = sub.add_parser("evaluate", parents=[common], help="spread-vs-k and timing sweep")
    p.add_argument("--graph", required=True)
    p.add_argument("--index")
    p.add_argument("--algorithms", default="mis,bts,ta_greedy,to_greedy,to_degree,random,ta_weighted_degree,ta_pagerank")
    p.add_argument("--mixtures", choices=("uniform_pairs", "dirichlet"), default="uniform_pairs")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--alpha", type=float, nargs="+", help="Dirichlet parameters (one value or one per topic)")
    p.add_argument("--greedy-runs", type=int, help="Monte Carlo runs for greedy selection (default --runs)")
    p.add_argument("--latency-repeats", type=int, default=100)
    p.add_argument("--bounds", action="store_true", help="also write offline/online bounds")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("analyze", parents=[common], help="overlap coefficients and statistics")
    p.add_argument("--graph", required=True)
    p.add_argument("--theta", type=float, nargs="+", default=[0.0])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("stats", parents=[common], help="per-topic probability statistics")
    p.add_argument("--graph", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "k", 1) is not None and args.k < 1:
        parser.error("--k must be at least 1")
    if args.runs < 1:
        parser.error("--runs must be at least 1")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except StaleIndexError as exc:
        print(f"timax: stale index: {exc}", file=sys.stderr)
        return 3
    except FormatError as exc:
        print(f"timax: format error: {exc}", file=sys.stderr)
        return 4
    except InvalidInputError as exc:
        print(f"timax: {exc}", file=sys.stderr)
        return 2
    except (TimaxError, OSError) as exc:
        print(f"timax: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
