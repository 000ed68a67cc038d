"""Multi-camera tracklet association by global min-cost flow.

Tracklets from every camera go into one flow graph whose arc costs come
from piecewise major-colour appearance and motion similarities. Same-camera
appearance scores are equalized against cross-camera ones first, so the
optimizer does not favour within-camera links merely because views agree.
"""

from .config import RunConfig
from .core import (
    CameraTopology,
    MajorColorDescriptor,
    Portal,
    Tracklet,
    TrajectorySet,
    ValidationError,
    make_tracklet,
    validate_topology,
    validate_tracklets,
)
from .evaluate import FrameAnnotations, MctaReport, evaluate
from .flowgraph import GraphParams, brute_force_map, build_graph, solve
from .kernels import BACKEND
from .pipeline import TrackResult, hypotheses, track

__all__ = [
    "BACKEND",
    "CameraTopology",
    "FrameAnnotations",
    "GraphParams",
    "MajorColorDescriptor",
    "MctaReport",
    "Portal",
    "RunConfig",
    "TrackResult",
    "Tracklet",
    "TrajectorySet",
    "ValidationError",
    "brute_force_map",
    "build_graph",
    "evaluate",
    "hypotheses",
    "make_tracklet",
    "solve",
    "track",
    "validate_topology",
    "validate_tracklets",
]
