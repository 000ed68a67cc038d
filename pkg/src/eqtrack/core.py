"""Domain model shared by the tracker: tracklets, colour descriptors, topology.

All types are treated as immutable once validated. Frame indices are
integers; positions and velocities are in pixels and pixels/frame.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

FPS = 25
MAX_COLORS = 10
CONFIDENCE_FLOOR = 1e-4


class ValidationError(ValueError):
    """Raised when an input record violates a hard invariant."""


@dataclass(frozen=True, eq=False)
class MajorColorDescriptor:
    """Weighted list of major colours, sorted by descending weight.

    ``colors`` is a ``(k, 3)`` float array in RGB space, ``weights`` a
    length-``k`` array summing to one.
    """

    colors: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        colors = np.asarray(self.colors, dtype=np.float64).reshape(-1, 3)
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if len(colors) != len(weights):
            raise ValidationError("colour and weight counts differ")
        colors.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "colors", colors)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_entries(cls, entries: Iterable[Tuple[Sequence[float], float]]) -> "MajorColorDescriptor":
        """Build from ``(color, weight)`` pairs, sorting and normalising."""
        entries = [(tuple(float(c) for c in color), float(w)) for color, w in entries]
        entries = [e for e in entries if e[1] > 0]
        if not entries:
            raise ValidationError("descriptor needs at least one positive weight")
        entries.sort(key=lambda e: (-e[1], e[0]))
        entries = entries[:MAX_COLORS]
        total = sum(w for _, w in entries)
        return cls(
            np.array([c for c, _ in entries], dtype=np.float64),
            np.array([w / total for _, w in entries], dtype=np.float64),
        )

    @property
    def entries(self) -> List[Tuple[Tuple[float, float, float], float]]:
        return [(tuple(c), float(w)) for c, w in zip(self.colors.tolist(), self.weights.tolist())]

    def __len__(self) -> int:
        return len(self.weights)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MajorColorDescriptor):
            return NotImplemented
        return np.array_equal(self.colors, other.colors) and np.array_equal(self.weights, other.weights)

    def __repr__(self) -> str:
        body = ", ".join(f"({c[0]:.0f},{c[1]:.0f},{c[2]:.0f}):{w:.3f}" for c, w in self.entries)
        return f"MajorColorDescriptor({body})"

    def check(self) -> None:
        if len(self) == 0 or len(self) > MAX_COLORS:
            raise ValidationError(f"descriptor must carry 1..{MAX_COLORS} colours, got {len(self)}")
        if abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise ValidationError(f"descriptor weights sum to {self.weights.sum()!r}")
        if np.any(self.weights <= 0) or np.any(np.diff(self.weights) > 0):
            raise ValidationError("descriptor weights must be positive and non-increasing")
        if np.any(self.colors < 0) or np.any(self.colors > 255):
            raise ValidationError("descriptor colours must lie in [0, 255]")


@dataclass(frozen=True, eq=False)
class Tracklet:
    """One single-camera trajectory fragment.

    ``positions`` and ``velocities`` are ``(n, 2)`` arrays, ``bboxes`` is
    ``(n, 4)`` as ``(x, y, w, h)``, where ``n = end_frame - start_frame + 1``.
    """

    id: int
    camera: str
    start_frame: int
    positions: np.ndarray
    velocities: np.ndarray
    bboxes: np.ndarray
    confidence: float
    appearance: Tuple[MajorColorDescriptor, ...] = ()

    @property
    def length(self) -> int:
        return len(self.positions)

    @property
    def end_frame(self) -> int:
        return self.start_frame + self.length - 1

    @property
    def tail(self) -> np.ndarray:
        return self.positions[-1]

    @property
    def head(self) -> np.ndarray:
        return self.positions[0]

    @property
    def tail_velocity(self) -> np.ndarray:
        return self.velocities[-1]

    @property
    def head_velocity(self) -> np.ndarray:
        return self.velocities[0]

    def __repr__(self) -> str:
        return (
            f"Tracklet(id={self.id}, camera={self.camera!r}, frames={self.start_frame}..{self.end_frame}, "
            f"c={self.confidence:.3f})"
        )


@dataclass(frozen=True)
class Portal:
    """Crossing from ``source`` camera to ``target`` camera."""

    source: str
    target: str
    exit_area: Tuple[Tuple[float, float], ...]
    enter_area: Tuple[Tuple[float, float], ...]
    exit_point: Tuple[float, float]
    enter_point: Tuple[float, float]


@dataclass(frozen=True)
class CameraTopology:
    cameras: Tuple[str, ...]
    adjacency: Tuple[Tuple[bool, ...], ...]
    portals: Tuple[Portal, ...] = ()

    def index(self, camera: str) -> int:
        return self.cameras.index(camera)

    def connected(self, a: str, b: str) -> bool:
        if a == b:
            return True
        return self.adjacency[self.index(a)][self.index(b)]

    def portals_between(self, a: str, b: str) -> List[Portal]:
        return [p for p in self.portals if p.source == a and p.target == b]


@dataclass
class TrajectorySet:
    """Disjoint ordered tracklet-id lists plus the total flow cost."""

    trajectories: List[List[int]] = field(default_factory=list)
    objective_cost: float = 0.0

    def __len__(self) -> int:
        return len(self.trajectories)

    def assignment(self) -> Dict[int, int]:
        """Map tracklet id to the index of the trajectory that holds it."""
        return {tid: k for k, traj in enumerate(self.trajectories) for tid in traj}


def point_in_polygon(point: Sequence[float], polygon: Sequence[Sequence[float]]) -> bool:
    """Even-odd rule; points on an edge count as inside."""
    x, y = float(point[0]), float(point[1])
    n = len(polygon)
    inside = False
    for k in range(n):
        x1, y1 = polygon[k]
        x2, y2 = polygon[(k + 1) % n]
        # boundary test: collinear and within the segment's box
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        if cross == 0 and min(x1, x2) <= x <= max(x1, x2) and min(y1, y2) <= y <= max(y1, y2):
            return True
        if (y1 > y) != (y2 > y):
            xs = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xs:
                inside = not inside
    return inside


def bottom_center(bboxes: np.ndarray) -> np.ndarray:
    bboxes = np.asarray(bboxes, dtype=np.float64).reshape(-1, 4)
    return np.column_stack([bboxes[:, 0] + bboxes[:, 2] / 2.0, bboxes[:, 1] + bboxes[:, 3]])


def estimate_velocity(positions: np.ndarray, half_window: int = 2) -> np.ndarray:
    """Central difference over a ``2*half_window+1`` frame window.

    Near the ends the window is truncated, which degrades to a one-sided
    difference. A single-frame track has zero velocity.
    """
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
    n = len(positions)
    if n < 2:
        return np.zeros_like(positions)
    idx = np.arange(n)
    lo = np.maximum(idx - half_window, 0)
    hi = np.minimum(idx + half_window, n - 1)
    return (positions[hi] - positions[lo]) / (hi - lo)[:, None]


def make_tracklet(
    id: int,
    camera: str,
    start_frame: int,
    bboxes,
    confidence: float,
    appearance: Sequence[MajorColorDescriptor] = (),
    positions=None,
    velocities=None,
) -> Tracklet:
    """Convenience constructor filling positions and velocities when absent."""
    bboxes = np.asarray(bboxes, dtype=np.float64).reshape(-1, 4)
    positions = bottom_center(bboxes) if positions is None else np.asarray(positions, dtype=np.float64).reshape(-1, 2)
    velocities = (
        estimate_velocity(positions) if velocities is None else np.asarray(velocities, dtype=np.float64).reshape(-1, 2)
    )
    return Tracklet(
        id=int(id),
        camera=str(camera),
        start_frame=int(start_frame),
        positions=positions,
        velocities=velocities,
        bboxes=bboxes,
        confidence=float(confidence),
        appearance=tuple(appearance),
    )


@dataclass
class Rejection:
    tracklet_id: int
    reason: str


def validate_tracklets(
    tracklets: Sequence[Tracklet],
    c_min: float = CONFIDENCE_FLOOR,
    rejected: Optional[List[Rejection]] = None,
) -> List[Tracklet]:
    """Check tracklet invariants and clamp confidences.

    Duplicate ids raise :class:`ValidationError`. Records with inconsistent
    per-frame array lengths are dropped and reported through ``rejected``
    (and the log) instead of aborting the whole input.
    """
    seen = set()
    for t in tracklets:
        if t.id in seen:
            raise ValidationError(f"duplicate tracklet id {t.id}")
        seen.add(t.id)

    out = []
    for t in tracklets:
        reason = _tracklet_problem(t)
        if reason is not None:
            logger.warning("rejecting tracklet %s: %s", t.id, reason)
            if rejected is not None:
                rejected.append(Rejection(t.id, reason))
            continue
        c = min(max(t.confidence, c_min), 1.0 - c_min)
        out.append(t if c == t.confidence else replace(t, confidence=c))
    return out


def _tracklet_problem(t: Tracklet) -> Optional[str]:
    n = len(t.positions)
    if n < 1:
        return "tracklet has no frames"
    if t.positions.shape != (n, 2):
        return f"positions have shape {t.positions.shape}"
    if t.velocities.shape != (n, 2):
        return f"velocities have {len(t.velocities)} rows, expected {n}"
    if t.bboxes.shape != (n, 4):
        return f"bboxes have {len(t.bboxes)} rows, expected {n}"
    if t.appearance and len(t.appearance) != n:
        return f"appearance has {len(t.appearance)} frames, expected {n}"
    if not np.isfinite(t.confidence):
        return "confidence is not finite"
    for d in t.appearance:
        try:
            d.check()
        except ValidationError as exc:
            return str(exc)
    return None


def validate_topology(topology: CameraTopology) -> CameraTopology:
    """Symmetrise adjacency, force the diagonal and check portal geometry."""
    cams = tuple(str(c) for c in topology.cameras)
    if len(set(cams)) != len(cams):
        raise ValidationError("duplicate camera id in topology")
    n = len(cams)
    adj = np.zeros((n, n), dtype=bool)
    if topology.adjacency:
        raw = np.asarray(topology.adjacency, dtype=bool)
        if raw.shape != (n, n):
            raise ValidationError(f"adjacency must be {n}x{n}, got {raw.shape}")
        adj |= raw
    adj |= adj.T
    np.fill_diagonal(adj, True)

    portals = []
    for p in topology.portals:
        if p.source not in cams or p.target not in cams:
            raise ValidationError(f"portal {p.source}->{p.target} names an unknown camera")
        if p.source == p.target:
            raise ValidationError(f"portal {p.source}->{p.target} connects a camera to itself")
        for name, poly, pt in (("exit", p.exit_area, p.exit_point), ("enter", p.enter_area, p.enter_point)):
            if len(poly) < 3:
                raise ValidationError(f"portal {p.source}->{p.target}: {name} area needs at least 3 vertices")
            if not point_in_polygon(pt, poly):
                raise ValidationError(
                    f"portal {p.source}->{p.target}: {name} point {tuple(pt)} lies outside its area"
                )
        portals.append(
            Portal(
                p.source,
                p.target,
                tuple((float(x), float(y)) for x, y in p.exit_area),
                tuple((float(x), float(y)) for x, y in p.enter_area),
                (float(p.exit_point[0]), float(p.exit_point[1])),
                (float(p.enter_point[0]), float(p.enter_point[1])),
            )
        )

    for a in range(n):
        for b in range(n):
            if a != b and adj[a, b] and not any(p.source == cams[a] and p.target == cams[b] for p in portals):
                raise ValidationError(f"cameras {cams[a]}->{cams[b]} are adjacent but have no portal")

    return CameraTopology(cams, tuple(tuple(bool(v) for v in row) for row in adj), tuple(portals))
