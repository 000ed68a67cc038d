"""Motion similarity between a tracklet's tail and a later tracklet's head."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import CameraTopology, Portal, Tracklet, ValidationError, point_in_polygon

DEFAULT_LAMBDA = 0.01


@dataclass(frozen=True)
class MotionParams:
    lam: float = DEFAULT_LAMBDA
    # extrapolation sweeps stop after this many frames (None: no cap)
    sweep_cap: Optional[int] = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ValidationError(f"decay rate must be positive, got {self.lam}")


def interval_time(l_i: Tracklet, l_j: Tracklet) -> int:
    return l_j.start_frame - l_i.end_frame


def relative_distance_same_camera(l_i: Tracklet, l_j: Tracklet) -> Tuple[float, float]:
    """Forward/backward extrapolation errors across the gap between two tracklets."""
    t = interval_time(l_i, l_j)
    pred_i = l_i.tail + l_i.tail_velocity * t
    pred_j = l_j.head - l_j.head_velocity * t
    return float(np.linalg.norm(pred_i - l_j.head)), float(np.linalg.norm(pred_j - l_i.tail))


def motion_similarity_same(dx_i: float, dx_j: float, params: MotionParams = MotionParams()) -> float:
    return math.exp(-params.lam / 2.0 * (dx_i + dx_j))


def min_distance_along_ray(origin, velocity, target, t_max: int) -> float:
    """``min ||origin + velocity*t - target||`` over integer ``t`` in ``[1, t_max]``.

    The squared distance is a convex quadratic in ``t``, so the integer
    minimiser is the floor or ceiling of the continuous one, clipped.
    """
    if t_max < 1:
        raise ValidationError("extrapolation needs at least one frame")
    o = np.asarray(origin, dtype=np.float64) - np.asarray(target, dtype=np.float64)
    v = np.asarray(velocity, dtype=np.float64)
    vv = float(v @ v)
    if vv == 0.0:
        candidates = [1]
    else:
        t_star = -float(o @ v) / vv
        lo = min(max(math.floor(t_star), 1), t_max)
        hi = min(max(math.ceil(t_star), 1), t_max)
        candidates = sorted({lo, hi})
    return min(float(np.linalg.norm(o + v * t)) for t in candidates)


def _sweep_frames(t_inv: int, params: MotionParams) -> int:
    return t_inv if params.sweep_cap is None else min(t_inv, params.sweep_cap)


def portal_distances(l_i: Tracklet, l_j: Tracklet, portal: Portal, params: MotionParams = MotionParams()):
    t_inv = interval_time(l_i, l_j)
    if t_inv < 1:
        raise ValidationError(f"tracklets {l_i.id} and {l_j.id} overlap in time")
    t_max = _sweep_frames(t_inv, params)
    if point_in_polygon(l_i.tail, portal.exit_area):
        dx_i = 0.0
    else:
        dx_i = min_distance_along_ray(l_i.tail, l_i.tail_velocity, portal.exit_point, t_max)
    if point_in_polygon(l_j.head, portal.enter_area):
        dx_j = 0.0
    else:
        dx_j = min_distance_along_ray(l_j.head, -l_j.head_velocity, portal.enter_point, t_max)
    return dx_i, dx_j


def min_relative_distance_cross(l_i: Tracklet, l_j: Tracklet, topology: CameraTopology,
                                params: MotionParams = MotionParams()) -> Tuple[float, float]:
    """Distances of the extrapolated tail/head to the portal's disappearing points.

    With several portals between the two cameras the one with the smallest
    summed distance is used.
    """
    portals = topology.portals_between(l_i.camera, l_j.camera)
    if not portals:
        raise ValidationError(f"no portal from camera {l_i.camera} to {l_j.camera}")
    return min((portal_distances(l_i, l_j, p, params) for p in portals), key=lambda d: (d[0] + d[1], d))


def motion_similarity(l_i: Tracklet, l_j: Tracklet, topology: CameraTopology,
                      params: MotionParams = MotionParams()) -> float:
    if l_i.camera == l_j.camera:
        dx_i, dx_j = relative_distance_same_camera(l_i, l_j)
    else:
        dx_i, dx_j = min_relative_distance_cross(l_i, l_j, topology, params)
    return math.exp(-params.lam / 2.0 * (dx_i + dx_j))
