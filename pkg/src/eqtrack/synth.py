"""Seeded synthetic multi-camera scenarios with ground truth.

Cameras form a chain; neighbours are joined at their side edges. Targets
walk straight across a view, vanish through the exit area, and reappear
in the next camera's enter area after a short transit. Each target has a
colour signature whose weights oscillate with a gait period. Each camera
mixes a fraction ``appearance_shift`` of its own illumination colour into
everything it sees, so the same target looks less alike across cameras.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .core import CameraTopology, MajorColorDescriptor, Portal, Tracklet, make_tracklet, validate_topology
from .evaluate import FrameAnnotations

WIDTH, HEIGHT = 640, 480
EDGE = 50
BOX_W, BOX_H = 40.0, 100.0

# colours pairwise further apart than the match radius
TARGET_PALETTE = [
    (220, 30, 30), (30, 200, 40), (30, 40, 220), (230, 220, 40), (200, 40, 200), (40, 210, 210),
    (250, 140, 20), (120, 60, 20), (20, 20, 20), (235, 235, 235), (130, 130, 130), (120, 20, 140),
]
CAMERA_PALETTE = [(70, 110, 170), (170, 90, 110), (100, 170, 90), (180, 180, 110), (90, 70, 60), (60, 150, 150)]


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_cameras: int = 3
    n_targets: int = 10
    fragmentation: float = 0.0
    appearance_shift: float = 0.0
    spread: int = 600  # frames over which target start times are spread
    cut_spacing: int = 30  # frames between candidate cut points
    min_piece: int = 10
    weight_noise: float = 0.02
    palette_size: int = 6  # leading palette colours targets draw from


@dataclass
class Scenario:
    tracklets: List[Tracklet]
    topology: CameraTopology
    ground_truth: FrameAnnotations
    owner: dict  # tracklet id -> ground-truth target id


def chain_topology(n_cameras: int) -> CameraTopology:
    cams = tuple(f"c{k + 1}" for k in range(n_cameras))
    adj = [[abs(a - b) <= 1 for b in range(n_cameras)] for a in range(n_cameras)]
    right = ((WIDTH - EDGE, 100.0), (WIDTH, 100.0), (WIDTH, HEIGHT), (WIDTH - EDGE, HEIGHT))
    left = ((0.0, 100.0), (EDGE, 100.0), (EDGE, HEIGHT), (0.0, HEIGHT))
    right_pt = (WIDTH - EDGE / 2, 380.0)
    left_pt = (EDGE / 2, 380.0)
    portals = []
    for k in range(n_cameras - 1):
        portals.append(Portal(cams[k], cams[k + 1], right, left, right_pt, left_pt))
        portals.append(Portal(cams[k + 1], cams[k], left, right, left_pt, right_pt))
    return validate_topology(CameraTopology(cams, tuple(tuple(r) for r in adj), tuple(portals)))


def _descriptor(weights: np.ndarray, colors: List[Tuple[int, int, int]]) -> MajorColorDescriptor:
    merged = {}
    for c, w in zip(colors, weights.tolist()):
        if w > 0:
            merged[c] = merged.get(c, 0.0) + w
    return MajorColorDescriptor.from_entries(merged.items())


def synth_scenario(cfg: SynthConfig = SynthConfig()) -> Scenario:
    rng = np.random.default_rng(cfg.seed)
    topo = chain_topology(cfg.n_cameras)
    cams = topo.cameras
    gt = FrameAnnotations()
    tracklets: List[Tracklet] = []
    owner = {}
    next_id = 1
    s = float(cfg.appearance_shift)

    for target in range(1, cfg.n_targets + 1):
        # colour signature and gait
        n_col = int(rng.integers(2, 4))
        cols = [TARGET_PALETTE[k] for k in rng.choice(cfg.palette_size, n_col, replace=False)]
        base = rng.dirichlet(np.full(n_col, 3.0))
        period = int(rng.integers(16, 29))
        phase = rng.uniform(0, 2 * np.pi, n_col)
        amp = 0.08

        # route along the chain
        direction = 1 if rng.random() < 0.5 else -1
        n_visits = int(rng.integers(2, 4)) if cfg.n_cameras > 1 else 1
        n_visits = min(n_visits, cfg.n_cameras)
        first = int(rng.integers(0, cfg.n_cameras - n_visits + 1))
        route = list(range(first, first + n_visits))
        if direction < 0:
            route = route[::-1]

        t = int(rng.integers(0, cfg.spread + 1))
        y_foot = rng.uniform(260, 460)
        age = 0
        for visit, cam_idx in enumerate(route):
            cam = cams[cam_idx]
            speed = rng.uniform(3.0, 5.0)
            vy = rng.uniform(-0.15, 0.15)
            x0, vx = (5.0, speed) if direction > 0 else (WIDTH - 5.0, -speed)
            n = int((WIDTH - 10.0) / speed) + 1
            k = np.arange(n)
            xs = x0 + vx * k
            ys = np.clip(y_foot + vy * k, 110.0 + BOX_H * 0, HEIGHT - 2)
            boxes = np.column_stack([xs - BOX_W / 2, ys - BOX_H, np.full(n, BOX_W), np.full(n, BOX_H)])
            frames = t + k
            y_foot = float(ys[-1])

            cam_color = CAMERA_PALETTE[cam_idx % len(CAMERA_PALETTE)]
            descs = []
            for f in range(n):
                w = base * (1.0 + amp * np.sin(2 * np.pi * (age + f) / period + phase) / base.max())
                w = np.clip(w + rng.uniform(-cfg.weight_noise, cfg.weight_noise, n_col), 1e-3, None)
                w = w / w.sum()
                if s > 0:
                    descs.append(_descriptor(np.append((1.0 - s) * w, s), cols + [cam_color]))
                else:
                    descs.append(_descriptor(w, cols))
            age += n

            for f in range(n):
                gt.add(cam, int(frames[f]), target, boxes[f])

            # fragment the visit
            keep = np.ones(n, dtype=bool)
            for cut in range(cfg.cut_spacing, n - cfg.min_piece, cfg.cut_spacing):
                if rng.random() < cfg.fragmentation:
                    gap = int(rng.integers(2, 9))
                    keep[cut:min(cut + gap, n)] = False
            runs = []
            start = None
            for f in range(n + 1):
                inside = f < n and keep[f]
                if inside and start is None:
                    start = f
                elif not inside and start is not None:
                    runs.append((start, f))
                    start = None
            for a, b in runs:
                if b - a < 1:
                    continue
                tl = make_tracklet(
                    next_id, cam, int(frames[a]), boxes[a:b], float(rng.uniform(0.6, 0.95)), descs[a:b]
                )
                tracklets.append(tl)
                owner[next_id] = target
                next_id += 1
            t = int(frames[-1]) + int(rng.integers(30, 121))

    return Scenario(tracklets, topo, gt, owner)


def random_instance(rng: np.random.Generator, n_tracklets: int, n_cameras: int = 2,
                    horizon: int = 60) -> Tuple[List[Tracklet], CameraTopology, dict]:
    """Small random association problem with arbitrary similarities.

    Used by the oracle check: confidences and per-edge (appearance,
    motion) probabilities are drawn directly, so no appearance data is
    attached to the tracklets.
    """
    from .flowgraph import GraphParams, select_edges

    topo = chain_topology(n_cameras)
    tracklets = []
    for k in range(n_tracklets):
        cam = topo.cameras[int(rng.integers(0, n_cameras))]
        start = int(rng.integers(0, horizon))
        length = int(rng.integers(1, 12))
        x = rng.uniform(60, 580)
        boxes = np.column_stack([np.full(length, x), np.full(length, 200.0), np.full(length, BOX_W), np.full(length, BOX_H)])
        tracklets.append(make_tracklet(k + 1, cam, start, boxes, float(rng.uniform(0.05, 0.95))))
    edges = select_edges(tracklets, topo, GraphParams())
    sims = {e: (float(rng.uniform(0.01, 1.0)), float(rng.uniform(0.01, 1.0))) for e in edges}
    return tracklets, topo, sims
