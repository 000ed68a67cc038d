"""End-to-end association: similarities, equalisation, graph, solve."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .appearance import MATCH_RADIUS, PiecewiseAppearance, appearance_scores, piecewise_appearance
from .config import RunConfig
from .core import CameraTopology, Tracklet, TrajectorySet
from .equalize import IDENTITY, EqualizationStats, collect_stats, equalized_appearance
from .evaluate import FrameAnnotations
from .flowgraph import FlowGraph, build_graph, encode_trajectories, flow_cost, select_edges, solve, transition_cost
from .motion import motion_similarity

logger = logging.getLogger(__name__)


@dataclass
class EdgeScores:
    """Per-candidate-edge quantities, aligned with ``edges``."""

    edges: List[Tuple[int, int]]
    dis: np.ndarray
    mug: np.ndarray
    same_camera: np.ndarray
    p_appearance: np.ndarray
    p_motion: np.ndarray
    stats: EqualizationStats

    def similarities(self) -> Dict[Tuple[int, int], Tuple[float, float]]:
        return {e: (float(a), float(m)) for e, a, m in zip(self.edges, self.p_appearance, self.p_motion)}


@dataclass
class TrackResult:
    trajectories: TrajectorySet
    graph: FlowGraph
    scores: EdgeScores
    appearances: Dict[int, PiecewiseAppearance] = field(default_factory=dict)


def compute_appearances(tracklets: Sequence[Tracklet], config: RunConfig) -> Dict[int, PiecewiseAppearance]:
    return {t.id: piecewise_appearance(t, gamma=config.gamma) for t in tracklets}


def score_edges(tracklets: Sequence[Tracklet], topology: Optional[CameraTopology], config: RunConfig,
                appearances: Optional[Dict[int, PiecewiseAppearance]] = None) -> EdgeScores:
    """Appearance and motion probabilities for every candidate transition."""
    by_id = {t.id: t for t in tracklets}
    edges = select_edges(tracklets, topology, config.graph_params())
    if appearances is None:
        appearances = compute_appearances(tracklets, config)
    ids = sorted(by_id)
    pos = {tid: k for k, tid in enumerate(ids)}
    ei = np.array([pos[i] for i, _ in edges], dtype=np.int64)
    ej = np.array([pos[j] for _, j in edges], dtype=np.int64)
    dis, mug = appearance_scores([appearances[tid] for tid in ids], ei, ej, MATCH_RADIUS)
    same = np.array([by_id[i].camera == by_id[j].camera for i, j in edges], dtype=bool)

    stats = collect_stats(zip(dis.tolist(), mug.tolist(), same.tolist()), config.epsilon) if config.equalize else IDENTITY
    p_a = np.array(
        [min(max(equalized_appearance(d, s, stats, config.p_min), config.p_min), 1.0) for d, s in zip(dis.tolist(), same.tolist())],
        dtype=np.float64,
    )
    mp = config.motion_params()
    p_m = np.array(
        [max(motion_similarity(by_id[i], by_id[j], topology, mp), config.p_min) for i, j in edges], dtype=np.float64
    )
    return EdgeScores(edges, dis, mug, same, p_a, p_m, stats)


def track(tracklets: Sequence[Tracklet], topology: Optional[CameraTopology], config: RunConfig = RunConfig(),
          appearances: Optional[Dict[int, PiecewiseAppearance]] = None,
          scores: Optional[EdgeScores] = None) -> TrackResult:
    """Global association of all tracklets in one min-cost-flow problem.

    Precomputed ``scores`` may be passed to re-solve under a different
    entry cost without recomputing similarities.
    """
    if appearances is None:
        appearances = compute_appearances(tracklets, config)
    if scores is None:
        scores = score_edges(tracklets, topology, config, appearances)
    graph = build_graph(tracklets, topology, config.graph_params(), scores.similarities(), edges=scores.edges)
    result = solve(graph)
    logger.info("solved %d tracklets, %d transitions -> %d trajectories (cost %.4f)",
                len(tracklets), graph.n_transitions, len(result), result.objective_cost)
    return TrackResult(result, graph, scores, appearances)


def track_two_step(tracklets: Sequence[Tracklet], topology: Optional[CameraTopology], config: RunConfig = RunConfig(),
                   appearances: Optional[Dict[int, PiecewiseAppearance]] = None,
                   scores: Optional[EdgeScores] = None) -> TrackResult:
    """Baseline: per-camera min-cost flow, then greedy best-match linking across cameras.

    Cross-camera links between a trajectory's last tracklet and another
    trajectory's first tracklet are accepted cheapest first while they
    lower the total cost, at most one link per trajectory end.
    """
    if appearances is None:
        appearances = compute_appearances(tracklets, config)
    if scores is None:
        scores = score_edges(tracklets, topology, config, appearances)
    params = config.graph_params()
    sims = scores.similarities()
    local_edges = [e for e, s in zip(scores.edges, scores.same_camera) if s]
    local = solve(build_graph(tracklets, topology, params, sims, edges=local_edges))

    full = build_graph(tracklets, topology, params, sims, edges=scores.edges)
    first = {traj[0]: k for k, traj in enumerate(local.trajectories)}
    last = {traj[-1]: k for k, traj in enumerate(local.trajectories)}
    gain_limit = 2.0 * params.entry_cost
    candidates = []
    for (i, j), s in zip(scores.edges, scores.same_camera):
        if s or i not in last or j not in first:
            continue
        w = transition_cost(*sims[(i, j)], params)
        if w < gain_limit:
            candidates.append((w, i, j))
    candidates.sort()
    nxt: Dict[int, int] = {}
    has_prev = set()
    for w, i, j in candidates:
        a, b = last[i], first[j]
        if a in nxt or b in has_prev:
            continue
        nxt[a] = b
        has_prev.add(b)
    chains = []
    for k in range(len(local.trajectories)):
        if k in has_prev:
            continue
        chain = list(local.trajectories[k])
        while k in nxt:
            k = nxt[k]
            chain.extend(local.trajectories[k])
        chains.append(chain)
    chains.sort()
    cost = flow_cost(full, encode_trajectories(full, chains))
    return TrackResult(TrajectorySet(chains, cost), full, scores, appearances)


def hypotheses(result: TrajectorySet, tracklets: Sequence[Tracklet]) -> FrameAnnotations:
    """Per-frame boxes labelled with the 1-based index of their trajectory."""
    by_id = {t.id: t for t in tracklets}
    hyp = FrameAnnotations()
    for gid, traj in enumerate(result.trajectories, start=1):
        for tid in traj:
            t = by_id[tid]
            for k, box in enumerate(t.bboxes.tolist()):
                hyp.add(t.camera, t.start_frame + k, gid, box)
    return hyp
