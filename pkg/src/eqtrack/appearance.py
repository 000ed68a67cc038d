"""Major-colour appearance model.

Per-frame descriptors come from an online k-means over the pixels of a
target crop. A tracklet is split into pieces one gait period long and each
piece is summarised by the average descriptor of its frames; two tracklets
are compared through the similarities of all their piece pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from . import kernels
from .core import MAX_COLORS, MajorColorDescriptor, Tracklet, ValidationError

MATCH_RADIUS = 60.0
COVERAGE = 0.9
DEFAULT_GAMMA = 15
# scores within this of the best lag count as tied; see estimate_period
PERIOD_TIE_TOL = 0.02


@dataclass(frozen=True)
class PiecewiseAppearance:
    period: int
    pieces: Tuple[MajorColorDescriptor, ...]
    piece_lengths: Tuple[int, ...]

    @property
    def n_pieces(self) -> int:
        return len(self.pieces)


def compute_mcshr(pixels, radius: float = MATCH_RADIUS, max_colors: int = MAX_COLORS,
                  coverage: float = COVERAGE) -> MajorColorDescriptor:
    """Major colours of an RGB buffer of shape ``(h, w, 3)`` or ``(n, 3)``.

    Clusters are ranked by pixel count and kept until they cover ``coverage``
    of the pixels (at most ``max_colors`` of them); the kept weights are
    renormalised.
    """
    px = np.asarray(pixels)
    if px.size == 0:
        raise ValidationError("cannot compute major colours of an empty buffer")
    if px.shape[-1] != 3:
        raise ValidationError(f"expected RGB triples, got trailing dimension {px.shape[-1]}")
    centroids, counts = kernels.online_kmeans(px.reshape(-1, 3).astype(np.uint8, copy=False), radius)
    order = sorted(range(len(counts)), key=lambda k: (-counts[k], k))
    total = float(counts.sum())
    kept = []
    covered = 0
    for k in order[:max_colors]:
        kept.append(k)
        covered += counts[k]
        if covered / total >= coverage:
            break
    kept_total = float(sum(counts[k] for k in kept))
    return MajorColorDescriptor(
        np.clip(centroids[kept], 0.0, 255.0),
        np.array([counts[k] / kept_total for k in kept], dtype=np.float64),
    )


def mcshr_similarity(a: MajorColorDescriptor, b: MajorColorDescriptor, radius: float = MATCH_RADIUS) -> float:
    """Matched colour mass shared by two descriptors.

    Colour pairs closer than ``radius`` are matched greedily, heaviest
    shared weight first, each entry at most once; the result is the sum of
    ``min(w_a, w_b)`` over the matches.
    """
    return kernels.match_similarity(a.colors, a.weights, b.colors, b.weights, radius)


def incremental_mcshr(frames: Sequence[MajorColorDescriptor], radius: float = MATCH_RADIUS,
                      max_colors: int = MAX_COLORS) -> MajorColorDescriptor:
    """Average descriptor of a run of frames.

    The first frame seeds the colour list; entries of later frames merge
    into the nearest accumulated colour within ``radius`` (weight-averaged
    colour) or start a new one. Weights are divided by the number of frames,
    then the list is truncated to ``max_colors`` and renormalised.
    """
    if len(frames) == 0:
        raise ValidationError("incremental descriptor needs at least one frame")
    colors: List[np.ndarray] = [c.copy() for c in frames[0].colors]
    mass: List[float] = list(frames[0].weights.tolist())
    r2 = radius * radius
    for desc in frames[1:]:
        for c, w in zip(desc.colors, desc.weights.tolist()):
            best, best_d = -1, 0.0
            for k, acc in enumerate(colors):
                d = float(np.dot(c - acc, c - acc))
                if best < 0 or d < best_d:
                    best, best_d = k, d
            if best >= 0 and best_d <= r2:
                m = mass[best] + w
                colors[best] = colors[best] + (c - colors[best]) * (w / m)
                mass[best] = m
            else:
                colors.append(c.copy())
                mass.append(w)
    n = len(frames)
    entries = sorted(((mass[k] / n, k) for k in range(len(mass))), key=lambda e: (-e[0], e[1]))[:max_colors]
    total = sum(w for w, _ in entries)
    return MajorColorDescriptor(
        np.clip(np.array([colors[k] for _, k in entries]), 0.0, 255.0),
        np.array([w / total for w, _ in entries], dtype=np.float64),
    )


def descriptor_table(descs: Sequence[MajorColorDescriptor]):
    """Pack descriptors into padded ``(colors, weights, counts)`` arrays for the kernels."""
    width = max((len(d) for d in descs), default=1) or 1
    colors = np.zeros((len(descs), width, 3), dtype=np.float64)
    weights = np.zeros((len(descs), width), dtype=np.float64)
    counts = np.zeros(len(descs), dtype=np.int32)
    for k, d in enumerate(descs):
        n = len(d)
        colors[k, :n] = d.colors
        weights[k, :n] = d.weights
        counts[k] = n
    return colors, weights, counts


def period_scores(frames: Sequence[MajorColorDescriptor], t_lo: int, t_hi: int,
                  radius: float = MATCH_RADIUS) -> np.ndarray:
    """Mean self-similarity at each lag ``t`` in ``[t_lo, t_hi]``."""
    colors, weights, counts = descriptor_table(frames)
    return kernels.lag_scores(colors, weights, counts, int(t_lo), int(t_hi), radius)


def estimate_period(tracklet_or_frames, gamma: int = DEFAULT_GAMMA, radius: float = MATCH_RADIUS,
                    tie_tol: float = PERIOD_TIE_TOL) -> int:
    """Gait period of a tracklet in frames.

    Candidate lags run over ``gamma <= t < n/2``. The period is the smallest
    lag whose mean self-similarity is within ``tie_tol`` of the best one, so
    an exact period wins over its multiples even when noise nudges a
    multiple ahead. With no candidate lag the whole tracklet is one period.
    """
    frames = tracklet_or_frames.appearance if isinstance(tracklet_or_frames, Tracklet) else tracklet_or_frames
    n = len(frames)
    t_hi = (n - 1) // 2
    if t_hi < gamma:
        return n
    scores = period_scores(frames, gamma, t_hi, radius)
    best = float(scores.max())
    for k, s in enumerate(scores.tolist()):
        if s >= best - tie_tol:
            return gamma + k
    raise AssertionError("unreachable")


def build_pmcshr(tracklet_or_frames, period: int, radius: float = MATCH_RADIUS) -> PiecewiseAppearance:
    frames = tracklet_or_frames.appearance if isinstance(tracklet_or_frames, Tracklet) else tracklet_or_frames
    n = len(frames)
    if period < 1:
        raise ValidationError(f"period must be at least 1, got {period}")
    if n == 0:
        raise ValidationError("tracklet has no appearance frames")
    d = math.ceil(n / period)
    pieces = []
    lengths = []
    for k in range(d):
        lo, hi = k * period, min((k + 1) * period, n)
        pieces.append(incremental_mcshr(frames[lo:hi], radius))
        lengths.append(hi - lo)
    return PiecewiseAppearance(int(period), tuple(pieces), tuple(lengths))


def piecewise_appearance(tracklet: Tracklet, gamma: int = DEFAULT_GAMMA, radius: float = MATCH_RADIUS,
                         tie_tol: float = PERIOD_TIE_TOL) -> PiecewiseAppearance:
    """Estimate the period of ``tracklet`` and cut it into pieces."""
    tau = estimate_period(tracklet, gamma, radius, tie_tol)
    return build_pmcshr(tracklet, tau, radius)


def piece_similarities(a: PiecewiseAppearance, b: PiecewiseAppearance, radius: float = MATCH_RADIUS) -> np.ndarray:
    return np.array([[mcshr_similarity(x, y, radius) for y in b.pieces] for x in a.pieces])


def appearance_distance(a: PiecewiseAppearance, b: PiecewiseAppearance, radius: float = MATCH_RADIUS) -> float:
    """Mean similarity over all piece pairs (higher means more alike)."""
    return float(appearance_scores([a, b], [0], [1], radius)[0][0])


def mug(a: PiecewiseAppearance, b: PiecewiseAppearance, radius: float = MATCH_RADIUS) -> float:
    """Spread between the most and least similar piece pair."""
    return float(appearance_scores([a, b], [0], [1], radius)[1][0])


def appearance_scores(appearances: Sequence[PiecewiseAppearance], edges_i, edges_j,
                      radius: float = MATCH_RADIUS) -> Tuple[np.ndarray, np.ndarray]:
    """Batch piece-pair mean and spread for index pairs into ``appearances``."""
    pieces = [p for app in appearances for p in app.pieces]
    offsets = np.zeros(len(appearances) + 1, dtype=np.int64)
    np.cumsum([app.n_pieces for app in appearances], out=offsets[1:])
    colors, weights, counts = descriptor_table(pieces)
    return kernels.pair_scores(
        colors, weights, counts, offsets,
        np.asarray(edges_i, dtype=np.int64), np.asarray(edges_j, dtype=np.int64), radius,
    )
