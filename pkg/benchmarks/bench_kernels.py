"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py --nodes 2000 --edges 10000 --runs 200

Both backends are run on the same inputs; outputs are checked for equality
and the speedup is reported per kernel.
"""

import argparse
import time

import numpy as np

from timax.diffusion import _live_csr
from timax.kernels import load_backend
from timax.synthetic import generate_graph


def timed(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - start


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=2000)
    parser.add_argument("--edges", type=int, default=10000)
    parser.add_argument("--topics", type=int, default=2)
    parser.add_argument("--runs", type=int, default=200)
    parser.add_argument("--candidates", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    graph = generate_graph(args.nodes, args.edges, args.topics, overlap=0.3, seed=args.seed)
    csr = _live_csr(graph, graph.topic_probabilities(0))
    base = np.argsort(-graph.out_degree(), kind="stable")[:10]
    candidates = np.arange(min(args.candidates, graph.node_count))
    mask_shape = (args.runs, (graph.node_count + 7) // 8)
    cases = {
        "spread_counts": lambda m: m.spread_counts(*csr, base, args.runs, 0, args.seed),
        "marginal_totals": lambda m: m.marginal_totals(*csr, base, candidates, args.runs, 0, args.seed),
        "prefix_totals": lambda m: m.prefix_totals(*csr, base, args.runs, 0, args.seed),
        "masked_marginal": lambda m: m.masked_marginal_totals(
            *csr, _filled_mask(m, csr, base, mask_shape, args.seed), candidates, 0, args.seed),
    }
    try:
        fast = load_backend("cython")
    except ImportError:
        parser.exit(1, "compiled extension not available; build it with pip install -e .\n")
    slow = load_backend("python")
    print(f"graph: nodes={graph.node_count} edges={graph.edge_count} live={csr[1].size} runs={args.runs}")
    print(f"{'kernel':<18}{'cython_s':>12}{'python_s':>12}{'speedup':>10}")
    for name, case in cases.items():
        out_fast, t_fast = timed(case, fast)
        out_slow, t_slow = timed(case, slow)
        if not np.array_equal(out_fast, out_slow):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<18}{t_fast:>12.4f}{t_slow:>12.4f}{t_slow / max(t_fast, 1e-9):>10.1f}")


def _filled_mask(module, csr, base, shape, seed):
    mask = np.zeros(shape, dtype=np.uint8)
    module.extend_mask(*csr, mask, base, 0, seed)
    return mask


if __name__ == "__main__":
    main()
