"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--tracklets 500]

Each kernel runs on a representative workload under both backends; the
outputs are checked for bit equality and the best-of-N wall time is shown.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from eqtrack import kernels
from eqtrack.appearance import MATCH_RADIUS, descriptor_table
from eqtrack.config import RunConfig
from eqtrack.flowgraph import SINK, SOURCE, STOP_TOL, build_graph, select_edges
from eqtrack.pipeline import compute_appearances
from eqtrack.synth import SynthConfig, synth_scenario

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from conftest import periodic_frames  # noqa: E402
from test_acceptance import large_instance  # noqa: E402


def workloads(n_tracklets: int):
    rng = np.random.default_rng(0)
    crop = np.repeat(rng.integers(0, 256, (25, 1, 3)), 160, axis=0).reshape(-1, 3)
    crop = np.clip(crop + rng.integers(-12, 13, crop.shape), 0, 255).astype(np.uint8)
    yield "online_kmeans", "4000-pixel crop", lambda k: k.online_kmeans(crop, MATCH_RADIUS)

    colors, weights, counts = descriptor_table(periodic_frames(120, 23))
    yield "lag_scores", "120 frames, lags 15..59", lambda k: k.lag_scores(colors, weights, counts, 15, 59, MATCH_RADIUS)

    sc = synth_scenario(SynthConfig(seed=42, fragmentation=0.3, appearance_shift=0.25))
    cfg = RunConfig()
    apps = compute_appearances(sc.tracklets, cfg)
    ids = sorted(apps)
    pos = {tid: k for k, tid in enumerate(ids)}
    edges = select_edges(sc.tracklets, sc.topology, cfg.graph_params())
    ei = np.array([pos[i] for i, _ in edges], dtype=np.int64)
    ej = np.array([pos[j] for _, j in edges], dtype=np.int64)
    pieces = [p for tid in ids for p in apps[tid].pieces]
    offsets = np.zeros(len(ids) + 1, dtype=np.int64)
    np.cumsum([apps[tid].n_pieces for tid in ids], out=offsets[1:])
    pc, pw, pn = descriptor_table(pieces)
    yield ("pair_scores", f"{len(edges)} edges, {len(pieces)} pieces",
           lambda k: k.pair_scores(pc, pw, pn, offsets, ei, ej, MATCH_RADIUS))

    tracklets, topo, params, sims = large_instance(m=n_tracklets)
    g = build_graph(tracklets, topo, params, sims)
    yield ("min_cost_flow", f"M={n_tracklets}, {g.n_arcs} arcs",
           lambda k: k.min_cost_flow(g.n_nodes, g.tails, g.heads, g.costs, SOURCE, SINK, STOP_TOL))


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b) -> bool:
    if isinstance(a, tuple):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--tracklets", type=int, default=500, help="size of the flow instance")
    args = ap.parse_args(argv)

    try:
        compiled = kernels.get_backend("cython")
    except ImportError:
        print("compiled kernels not built; run `python3 setup.py build_ext --inplace`", file=sys.stderr)
        return 1
    pure = kernels.get_backend("python")

    print(f"{'kernel':<15}{'workload':<32}{'cython s':>11}{'python s':>11}{'speedup':>10}  equal")
    for name, what, run in workloads(args.tracklets):
        tc, oc = best_time(lambda: run(compiled), args.repeat)
        tp, op = best_time(lambda: run(pure), args.repeat)
        print(f"{name:<15}{what:<32}{tc:>11.4f}{tp:>11.4f}{tp / tc:>9.1f}x  {same(oc, op)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
