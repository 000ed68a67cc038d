import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eqtrack.core import CameraTopology, Portal, make_tracklet, validate_topology
from eqtrack.motion import (
    MotionParams,
    interval_time,
    min_distance_along_ray,
    min_relative_distance_cross,
    motion_similarity,
    motion_similarity_same,
    relative_distance_same_camera,
)


def point_tracklet(tid, camera, start, points, velocities):
    points = np.asarray(points, dtype=float)
    boxes = np.column_stack([points[:, 0] - 1, points[:, 1] - 2, np.full(len(points), 2.0), np.full(len(points), 2.0)])
    return make_tracklet(tid, camera, start, boxes, 0.8, positions=points, velocities=velocities)


def test_interval_time_sign():
    a = point_tracklet(1, "a", 91, [[0, 0]] * 10, [[0, 0]] * 10)  # ends at 100
    assert interval_time(a, point_tracklet(2, "a", 130, [[0, 0]], [[0, 0]])) == 30
    assert interval_time(a, point_tracklet(2, "a", 100, [[0, 0]], [[0, 0]])) == 0
    assert interval_time(a, point_tracklet(2, "a", 90, [[0, 0]], [[0, 0]])) == -10


def test_same_camera_perfect_continuation():
    a = point_tracklet(1, "a", 0, [[0, 0]], [[1, 0]])
    b = point_tracklet(2, "a", 30, [[30, 0]], [[1, 0]])
    assert relative_distance_same_camera(a, b) == (0.0, 0.0)
    assert motion_similarity(a, b, None) == 1.0


def test_same_camera_offset_head():
    a = point_tracklet(1, "a", 0, [[0, 0]], [[1, 0]])
    b = point_tracklet(2, "a", 30, [[30, 40]], [[1, 0]])
    assert relative_distance_same_camera(a, b)[0] == 40.0


def test_same_camera_stationary():
    a = point_tracklet(1, "a", 0, [[5, 5]], [[0, 0]])
    b = point_tracklet(2, "a", 10, [[5, 5]], [[0, 0]])
    assert relative_distance_same_camera(a, b) == (0.0, 0.0)
    close = point_tracklet(3, "a", 1, [[5, 5]], [[0, 0]])
    assert motion_similarity(a, close, None) == 1.0


def test_same_camera_similarity_values():
    assert motion_similarity_same(0, 0) == 1.0
    assert motion_similarity_same(100, 100, MotionParams(lam=0.01)) == pytest.approx(math.exp(-1), rel=1e-15)
    assert motion_similarity_same(1e6, 0) == 0.0


def test_ray_sweep_examples():
    assert min_distance_along_ray((0, 0), (1, 0), (5, 0), 10) == 0.0
    assert min_distance_along_ray((0, 10), (1, 0), (5, 0), 10) == 10.0
    assert min_distance_along_ray((0, 0), (1, 0), (50, 0), 10) == 40.0  # clipped at t_inv
    assert min_distance_along_ray((0, 0), (-1, 0), (5, 0), 10) == 6.0  # clipped at t=1


@given(
    st.tuples(st.floats(-500, 500), st.floats(-500, 500)),
    st.tuples(st.floats(-20, 20), st.floats(-20, 20)),
    st.tuples(st.floats(-500, 500), st.floats(-500, 500)),
    st.integers(1, 400),
    st.data(),
)
def test_ray_sweep_is_minimum_over_frames(origin, velocity, target, t_max, data):
    best = min_distance_along_ray(origin, velocity, target, t_max)
    o, v, x = (np.asarray(p, dtype=float) for p in (origin, velocity, target))
    exhaustive = min(float(np.linalg.norm(o + v * t - x)) for t in range(1, t_max + 1))
    assert best == pytest.approx(exhaustive, rel=1e-9, abs=1e-9)
    t = data.draw(st.integers(1, t_max))
    assert best <= float(np.linalg.norm(o + v * t - x)) + 1e-9


SQUARE_A = ((90.0, 0.0), (100.0, 0.0), (100.0, 10.0), (90.0, 10.0))
SQUARE_B = ((0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0))


def two_camera_topology():
    portals = (
        Portal("a", "b", SQUARE_A, SQUARE_B, (95.0, 5.0), (5.0, 5.0)),
        Portal("b", "a", SQUARE_B, SQUARE_A, (5.0, 5.0), (95.0, 5.0)),
    )
    return validate_topology(CameraTopology(("a", "b"), ((True, True), (True, True)), portals))


def test_cross_camera_inside_areas_is_zero():
    topo = two_camera_topology()
    a = point_tracklet(1, "a", 0, [[92, 5]], [[-50, 30]])
    b = point_tracklet(2, "b", 40, [[3, 3]], [[9, 9]])
    assert min_relative_distance_cross(a, b, topo) == (0.0, 0.0)
    assert motion_similarity(a, b, topo) == 1.0


def test_cross_camera_sum_200():
    topo = two_camera_topology()
    # tail stands still 100 px left of the exit point, head still 100 px below the enter point
    a = point_tracklet(1, "a", 0, [[-5, 5]], [[0, 0]])
    b = point_tracklet(2, "b", 20, [[5, 105]], [[0, 0]])
    assert min_relative_distance_cross(a, b, topo) == (100.0, 100.0)
    assert motion_similarity(a, b, topo, MotionParams(lam=0.01)) == pytest.approx(math.exp(-1), rel=1e-15)


def test_cross_camera_missing_portal():
    topo = validate_topology(CameraTopology(("a", "c"), (), ()))
    a = point_tracklet(1, "a", 0, [[0, 0]], [[0, 0]])
    b = point_tracklet(2, "c", 10, [[0, 0]], [[0, 0]])
    with pytest.raises(ValueError):
        min_relative_distance_cross(a, b, topo)


@given(st.floats(0, 1e4), st.floats(0, 1e4), st.floats(0, 100))
def test_similarity_monotone(dx, dy, extra):
    assert motion_similarity_same(dx + extra, dy) <= motion_similarity_same(dx, dy)
    assert 0.0 <= motion_similarity_same(dx, dy) <= 1.0
