import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import BLUE, GREEN, RED, desc, periodic_frames
from eqtrack.appearance import (
    PiecewiseAppearance,
    appearance_distance,
    appearance_scores,
    build_pmcshr,
    compute_mcshr,
    estimate_period,
    incremental_mcshr,
    mcshr_similarity,
    mug,
    piece_similarities,
)
from eqtrack.core import MajorColorDescriptor, ValidationError

colors = st.tuples(*[st.integers(0, 255).map(float)] * 3)
descriptors = st.lists(st.tuples(colors, st.floats(0.01, 1.0)), min_size=1, max_size=10).map(
    MajorColorDescriptor.from_entries
)


def pieces(*ds):
    return PiecewiseAppearance(1, tuple(ds), (1,) * len(ds))


# --- compute_mcshr


def test_uniform_red_single_entry():
    d = compute_mcshr(np.tile(np.array([255, 0, 0], np.uint8), (10, 10, 1)))
    assert d.entries == [((255.0, 0.0, 0.0), 1.0)]


def test_half_red_half_blue():
    px = np.zeros((10, 10, 3), np.uint8)
    px[:5, :, 0] = 255
    px[5:, :, 2] = 255
    d = compute_mcshr(px)
    assert len(d) == 2
    assert all(abs(w - 0.5) <= 0.01 for w in d.weights)


def test_random_colors_normalized():
    px = np.random.default_rng(3).integers(0, 256, (100, 3), dtype=np.uint8)
    d = compute_mcshr(px)
    assert abs(d.weights.sum() - 1.0) <= 1e-9
    assert len(d) <= 10
    d.check()


def test_empty_buffer_rejected():
    with pytest.raises(ValidationError):
        compute_mcshr(np.zeros((0, 3), np.uint8))


# --- similarity


def test_similarity_examples():
    h = desc((RED, 0.7), (GREEN, 0.3))
    assert mcshr_similarity(h, h) == 1.0
    assert mcshr_similarity(desc((RED, 1.0)), desc((BLUE, 1.0))) == 0.0
    assert mcshr_similarity(desc((RED, 1.0)), desc((RED, 0.5), (BLUE, 0.5))) == 0.5


@given(descriptors, descriptors)
def test_similarity_symmetric_and_bounded(a, b):
    s = mcshr_similarity(a, b)
    assert s == mcshr_similarity(b, a)
    assert 0.0 <= s <= 1.0


@given(descriptors)
def test_similarity_identity(a):
    assert abs(mcshr_similarity(a, a) - 1.0) <= 1e-12


# --- incremental descriptor


def test_incremental_examples():
    h = desc((RED, 0.6), (BLUE, 0.4))
    assert incremental_mcshr([h]) == h
    assert incremental_mcshr([h, h]) == h
    avg = incremental_mcshr([desc((RED, 1.0)), desc((BLUE, 1.0))])
    assert avg.entries == [(RED, 0.5), (BLUE, 0.5)]


def test_incremental_merges_nearby_colors():
    avg = incremental_mcshr([desc(((200.0, 0.0, 0.0), 1.0)), desc(((220.0, 0.0, 0.0), 1.0))])
    assert avg.entries == [((210.0, 0.0, 0.0), 1.0)]


# --- period


def test_period_degenerate_short_tracklet():
    assert estimate_period([desc((RED, 1.0))] * 20, gamma=15) == 20


def test_period_exact_repeat():
    assert estimate_period(periodic_frames(90, 20)) == 20


def test_period_constant_appearance_picks_smallest_lag():
    assert estimate_period([desc((RED, 1.0))] * 90) == 15


@pytest.mark.parametrize("p", [15, 22, 31, 44])
def test_period_recovered_at_120(p):
    assert estimate_period(periodic_frames(120, p)) == p


# --- pieces


@pytest.mark.parametrize("n,tau,lengths", [(9, 3, (3, 3, 3)), (10, 3, (3, 3, 3, 1)), (5, 5, (5,))])
def test_pmcshr_piece_lengths(n, tau, lengths):
    app = build_pmcshr([desc((RED, 1.0))] * n, tau)
    assert app.piece_lengths == lengths
    assert app.n_pieces == len(lengths)


def test_distance_examples():
    h = desc((RED, 1.0))
    assert appearance_distance(pieces(h), pieces(h)) == 1.0
    a = pieces(desc((RED, 1.0)))
    b = pieces(desc((RED, 0.4), (BLUE, 0.6)), desc((RED, 0.8), (GREEN, 0.2)))
    assert appearance_distance(a, b) == pytest.approx(0.6, abs=1e-15)
    assert appearance_distance(pieces(desc((RED, 1.0))), pieces(desc((BLUE, 1.0)))) == 0.0


def test_mug_examples():
    assert mug(pieces(desc((RED, 1.0))), pieces(desc((RED, 0.3), (BLUE, 0.7)))) == 0.0
    a = pieces(desc((RED, 1.0)))
    b = pieces(desc((RED, 0.2), (BLUE, 0.8)), desc((RED, 0.9), (GREEN, 0.1)))
    assert mug(a, b) == pytest.approx(0.7, abs=1e-15)
    h = desc((RED, 0.5), (GREEN, 0.5))
    assert mug(pieces(h, h), pieces(h, h, h)) == 0.0


@settings(max_examples=50)
@given(st.lists(descriptors, min_size=1, max_size=4), st.lists(descriptors, min_size=1, max_size=4))
def test_batch_scores_match_naive_double_loop(da, db):
    a, b = pieces(*da), pieces(*db)
    sims = piece_similarities(a, b)
    dis, spread = appearance_scores([a, b], [0, 1], [1, 0])
    assert dis[0] == pytest.approx(sims.mean(), abs=1e-12)
    assert dis[0] == pytest.approx(dis[1], abs=1e-12)  # symmetric
    assert spread[0] == pytest.approx(sims.max() - sims.min(), abs=1e-12)
    assert 0.0 <= dis[0] <= 1.0 and 0.0 <= spread[0] <= 1.0
