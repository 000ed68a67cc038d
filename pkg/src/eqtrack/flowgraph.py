"""Global min-cost-flow association graph and its solver.

Every tracklet contributes an enter and an exit node joined by an
observation arc; source arcs, sink arcs and transition arcs between
compatible tracklets complete the graph. Each unit of source-to-sink flow
is one trajectory, and the minimum-cost flow is the MAP association.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .core import CameraTopology, Tracklet, TrajectorySet, ValidationError

SOURCE = 0
SINK = 1

ARC_SOURCE = 0
ARC_OBSERVATION = 1
ARC_SINK = 2
ARC_TRANSITION = 3

DEFAULT_ETA = 60 * 25 * 1
STOP_TOL = 1e-12
BRUTE_FORCE_LIMIT = 10


@dataclass(frozen=True)
class GraphParams:
    eta: float = DEFAULT_ETA
    k1: float = 1.0
    k2: float = 1.0
    p_min: float = 1e-6
    # cost of starting and of ending a trajectory, charged on source and sink
    # arcs and refunded on the observation arc, so a lone tracklet costs the
    # same as with no penalty while a link saves 2 * entry_cost
    entry_cost: float = 0.0

    def __post_init__(self):
        if not self.eta > 0:
            raise ValidationError(f"eta must be positive, got {self.eta}")
        if self.k1 < 0 or self.k2 < 0:
            raise ValidationError("feature weights must be non-negative")
        if not 0 < self.p_min < 1:
            raise ValidationError(f"p_min must lie in (0, 1), got {self.p_min}")
        if self.entry_cost < 0:
            raise ValidationError("entry cost must be non-negative")


@dataclass
class FlowGraph:
    ids: Tuple[int, ...]
    start_frames: np.ndarray
    end_frames: np.ndarray
    tails: np.ndarray
    heads: np.ndarray
    costs: np.ndarray
    kinds: np.ndarray
    transitions: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return 2 * len(self.ids) + 2

    @property
    def n_arcs(self) -> int:
        return len(self.tails)

    @property
    def n_transitions(self) -> int:
        return len(self.transitions)

    def enter(self, k: int) -> int:
        return 2 + 2 * k

    def exit(self, k: int) -> int:
        return 3 + 2 * k

    def observation_arc(self, k: int) -> int:
        return 3 * k + 1

    def transition_arc(self, t: int) -> int:
        return 3 * len(self.ids) + t


def select_edges(tracklets: Sequence[Tracklet], topology: Optional[CameraTopology],
                 params: GraphParams = GraphParams()) -> List[Tuple[int, int]]:
    """Candidate transitions ``(i, j)``: ``0 < start_j - end_i < eta`` and connected cameras."""
    if not tracklets:
        return []
    ids = np.array([t.id for t in tracklets])
    start = np.array([t.start_frame for t in tracklets])
    end = np.array([t.end_frame for t in tracklets])
    cams = sorted({t.camera for t in tracklets})
    cam_idx = np.array([cams.index(t.camera) for t in tracklets])
    link = np.eye(len(cams), dtype=bool)
    if topology is not None:
        for a, ca in enumerate(cams):
            for b, cb in enumerate(cams):
                if a != b and ca in topology.cameras and cb in topology.cameras:
                    link[a, b] = topology.connected(ca, cb)

    gap = start[None, :] - end[:, None]
    ok = (gap > 0) & (gap < params.eta) & link[cam_idx[:, None], cam_idx[None, :]]
    ii, jj = np.nonzero(ok)
    pairs = sorted(zip(ids[ii].tolist(), ids[jj].tolist()))
    return pairs


def observation_cost(confidence: float) -> float:
    return 0.0 - math.log(confidence / (1.0 - confidence))


def transition_cost(p_a: float, p_m: float, params: GraphParams) -> float:
    for p in (p_a, p_m):
        if not p > 0:
            raise ValidationError(f"transition probability {p!r} is not positive; similarities must be clamped")
    p_a = min(max(p_a, params.p_min), 1.0)
    p_m = min(max(p_m, params.p_min), 1.0)
    return 0.0 - params.k1 * math.log(p_a) - params.k2 * math.log(p_m)


def build_graph(tracklets: Sequence[Tracklet], topology: Optional[CameraTopology], params: GraphParams,
                similarities: Mapping[Tuple[int, int], Tuple[float, float]],
                edges: Optional[Sequence[Tuple[int, int]]] = None) -> FlowGraph:
    """Assemble the flow network.

    ``similarities`` maps each candidate pair to ``(p_appearance, p_motion)``.
    ``edges`` restricts the transitions to a subset of the candidates
    (default: all of them).
    """
    order = sorted(tracklets, key=lambda t: t.id)
    index = {t.id: k for k, t in enumerate(order)}
    if edges is None:
        edges = select_edges(order, topology, params)
    else:
        allowed = set(select_edges(order, topology, params))
        bad = [e for e in edges if tuple(e) not in allowed]
        if bad:
            raise ValidationError(f"transition {bad[0]} violates the edge-selection rules")
        edges = sorted(tuple(e) for e in edges)

    m = len(order)
    n_arcs = 3 * m + len(edges)
    tails = np.empty(n_arcs, dtype=np.int64)
    heads = np.empty(n_arcs, dtype=np.int64)
    costs = np.empty(n_arcs, dtype=np.float64)
    kinds = np.empty(n_arcs, dtype=np.int8)
    b = float(params.entry_cost)
    for k, t in enumerate(order):
        base = 3 * k
        enter, exit_ = 2 + 2 * k, 3 + 2 * k
        tails[base], heads[base], costs[base], kinds[base] = SOURCE, enter, b, ARC_SOURCE
        tails[base + 1], heads[base + 1] = enter, exit_
        costs[base + 1], kinds[base + 1] = observation_cost(t.confidence) - 2.0 * b, ARC_OBSERVATION
        tails[base + 2], heads[base + 2], costs[base + 2], kinds[base + 2] = exit_, SINK, b, ARC_SINK
    for q, (i, j) in enumerate(edges):
        try:
            p_a, p_m = similarities[(i, j)]
        except KeyError:
            raise ValidationError(f"no similarity supplied for candidate transition {(i, j)}") from None
        a = 3 * m + q
        tails[a], heads[a] = 3 + 2 * index[i], 2 + 2 * index[j]
        costs[a], kinds[a] = transition_cost(p_a, p_m, params), ARC_TRANSITION

    if not np.all(np.isfinite(costs)):
        raise ValidationError("flow graph has a non-finite cost")
    return FlowGraph(
        ids=tuple(t.id for t in order),
        start_frames=np.array([t.start_frame for t in order], dtype=np.int64),
        end_frames=np.array([t.end_frame for t in order], dtype=np.int64),
        tails=tails,
        heads=heads,
        costs=costs,
        kinds=kinds,
        transitions=list(edges),
    )


def flow_cost(graph: FlowGraph, flow: np.ndarray) -> float:
    """Exactly rounded total cost of a 0/1 flow (independent of summation order)."""
    return math.fsum(graph.costs[np.asarray(flow, dtype=bool)].tolist())


def decode_flow(graph: FlowGraph, flow: np.ndarray) -> List[List[int]]:
    flow = np.asarray(flow)
    m = len(graph.ids)
    succ: Dict[int, int] = {}
    for q, (i, j) in enumerate(graph.transitions):
        if flow[3 * m + q]:
            succ[i] = j
    trajectories = []
    for k, tid in enumerate(graph.ids):
        if flow[3 * k]:
            traj = [tid]
            while traj[-1] in succ:
                traj.append(succ[traj[-1]])
            trajectories.append(traj)
    return sorted(trajectories)


def encode_trajectories(graph: FlowGraph, trajectories: Sequence[Sequence[int]]) -> np.ndarray:
    """0/1 arc flow realising ``trajectories``; raises if a link is not an arc."""
    index = {tid: k for k, tid in enumerate(graph.ids)}
    arc_of = {pair: q for q, pair in enumerate(graph.transitions)}
    m = len(graph.ids)
    flow = np.zeros(graph.n_arcs, dtype=np.int8)
    for traj in trajectories:
        for tid in traj:
            k = index[tid]
            if flow[3 * k + 1]:
                raise ValidationError(f"tracklet {tid} used twice")
            flow[3 * k + 1] = 1
        flow[3 * index[traj[0]]] = 1
        flow[3 * index[traj[-1]] + 2] = 1
        for i, j in zip(traj, traj[1:]):
            if (i, j) not in arc_of:
                raise ValidationError(f"link {i}->{j} is not a transition arc")
            flow[3 * m + arc_of[(i, j)]] = 1
    return flow


def solve(graph: FlowGraph) -> TrajectorySet:
    """Min-cost flow by successive shortest paths; the flow amount is free."""
    if not graph.ids:
        return TrajectorySet([], 0.0)
    flow = kernels.min_cost_flow(graph.n_nodes, graph.tails, graph.heads, graph.costs, SOURCE, SINK, STOP_TOL)
    return TrajectorySet(decode_flow(graph, flow), flow_cost(graph, flow))


def brute_force_graph(graph: FlowGraph) -> TrajectorySet:
    """Exhaustive search over all vertex-disjoint path covers of a subset of tracklets.

    Ties on cost go to fewer trajectories, then to the lexicographically
    smallest sorted trajectory list.
    """
    m = len(graph.ids)
    if m > BRUTE_FORCE_LIMIT:
        raise ValidationError(f"brute force is limited to {BRUTE_FORCE_LIMIT} tracklets, got {m}")
    if m == 0:
        return TrajectorySet([], 0.0)
    costs = graph.costs.tolist()
    preds: Dict[int, List[Tuple[int, int]]] = {k: [] for k in range(m)}
    index = {tid: k for k, tid in enumerate(graph.ids)}
    for q, (i, j) in enumerate(graph.transitions):
        preds[index[j]].append((index[i], 3 * m + q))
    order = sorted(range(m), key=lambda k: (int(graph.start_frames[k]), graph.ids[k]))

    best = [None]
    succ: Dict[int, int] = {}
    arcs = set()

    def leaf(starts):
        cost = math.fsum(costs[a] for a in arcs)
        trajs = []
        for k in starts:
            traj = [graph.ids[k]]
            cur = k
            while cur in succ:
                cur = succ[cur]
                traj.append(graph.ids[cur])
            trajs.append(traj)
        trajs.sort()
        key = (cost, len(trajs), trajs)
        if best[0] is None or key < best[0]:
            best[0] = key

    def rec(pos, open_tails, starts):
        if pos == m:
            leaf(starts)
            return
        k = order[pos]
        rec(pos + 1, open_tails, starts)
        # start a new trajectory at k
        obs = {3 * k, 3 * k + 1, 3 * k + 2}
        arcs.update(obs)
        rec(pos + 1, open_tails | {k}, starts + [k])
        arcs.difference_update(obs)
        # continue an open trajectory ending at i
        for i, a in preds[k]:
            if i in open_tails:
                step = {a, 3 * k + 1, 3 * k + 2}
                arcs.discard(3 * i + 2)
                arcs.update(step)
                succ[i] = k
                rec(pos + 1, (open_tails - {i}) | {k}, starts)
                del succ[i]
                arcs.difference_update(step)
                arcs.add(3 * i + 2)

    rec(0, frozenset(), [])
    cost, _, trajs = best[0]
    return TrajectorySet([list(t) for t in trajs], cost)


def brute_force_map(tracklets: Sequence[Tracklet], topology: Optional[CameraTopology], params: GraphParams,
                    similarities: Mapping[Tuple[int, int], Tuple[float, float]]) -> TrajectorySet:
    if len(tracklets) > BRUTE_FORCE_LIMIT:
        raise ValidationError(f"brute force is limited to {BRUTE_FORCE_LIMIT} tracklets, got {len(tracklets)}")
    return brute_force_graph(build_graph(tracklets, topology, params, similarities))


def dump_graph(graph: FlowGraph, stream) -> None:
    """Write the graph as a text edge list: ``tail head cost capacity kind``."""
    names = {ARC_SOURCE: "source", ARC_OBSERVATION: "observation", ARC_SINK: "sink", ARC_TRANSITION: "transition"}
    stream.write(f"# nodes {graph.n_nodes} arcs {graph.n_arcs} source {SOURCE} sink {SINK}\n")
    for k, tid in enumerate(graph.ids):
        stream.write(f"# tracklet {tid} enter {graph.enter(k)} exit {graph.exit(k)}\n")
    for a in range(graph.n_arcs):
        stream.write(f"{int(graph.tails[a])} {int(graph.heads[a])} {float(graph.costs[a])!r} 1 {names[int(graph.kinds[a])]}\n")
