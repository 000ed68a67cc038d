import numpy as np

from eqtrack.config import RunConfig
from eqtrack.evaluate import evaluate
from eqtrack.pipeline import hypotheses, score_edges, track, track_two_step
from eqtrack.synth import SynthConfig, synth_scenario

import pytest


@pytest.fixture(scope="module")
def scenario():
    return synth_scenario(SynthConfig(seed=7, fragmentation=0.3, appearance_shift=0.25))


def test_probabilities_clamped(scenario):
    s = score_edges(scenario.tracklets, scenario.topology, RunConfig())
    for arr in (s.p_appearance, s.p_motion):
        assert np.all(arr >= 1e-6) and np.all(arr <= 1.0)
    assert len(s.edges) == len(s.dis) == len(s.mug)


def test_cross_camera_appearance_passes_through(scenario):
    s = score_edges(scenario.tracklets, scenario.topology, RunConfig())
    cross = ~s.same_camera
    assert np.array_equal(s.p_appearance[cross], np.maximum(s.dis[cross], 1e-6))


def test_track_recovers_targets(scenario):
    res = track(scenario.tracklets, scenario.topology, RunConfig())
    rep = evaluate(scenario.ground_truth, hypotheses(res.trajectories, scenario.tracklets), identity_match=True)
    assert rep.precision == 1.0
    assert rep.mcta > 0.9


def test_two_step_is_feasible(scenario):
    res = track_two_step(scenario.tracklets, scenario.topology, RunConfig())
    used = [t for traj in res.trajectories.trajectories for t in traj]
    assert len(used) == len(set(used))
    assert res.trajectories.objective_cost >= track(scenario.tracklets, scenario.topology).trajectories.objective_cost


def test_config_defaults():
    c = RunConfig()
    assert (c.eta, c.epsilon, c.k1, c.k2, c.lam, c.gamma, c.iou_threshold, c.equalize, c.p_min) == (
        1500, 0.4, 1, 1, 0.01, 15, 0.5, True, 1e-6)
    with pytest.raises(ValueError):
        RunConfig(epsilon=2.0)
