"""Align same-camera appearance similarities with the cross-camera ones.

Same-camera similarities run systematically higher than cross-camera
ones, which makes a joint optimiser favour in-camera links. Statistics
are taken over reliable edges only (small piece-pair spread) and the
same-camera values are mapped ``dis -> delta_sigma * (dis - delta_mu)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Tuple

import numpy as np

DEFAULT_EPSILON = 0.4
P_MIN = 1e-6


@dataclass(frozen=True)
class EqualizationStats:
    mu1: float = 0.0
    sigma1: float = 0.0
    mu2: float = 0.0
    sigma2: float = 0.0
    delta_mu: float = 0.0
    delta_sigma: float = 1.0
    n1: int = 0
    n2: int = 0
    fallback: str = ""

    def as_dict(self):
        return asdict(self)


IDENTITY = EqualizationStats(fallback="disabled")


def collect_stats(edges: Iterable[Tuple[float, float, bool]], epsilon: float = DEFAULT_EPSILON) -> EqualizationStats:
    """Moments of the MUG-filtered similarities.

    ``edges`` yields ``(dis, mug, same_camera)``. Standard deviations are
    population ones. Degenerate samples fall back to the identity
    transform and say so in ``fallback``.
    """
    same, cross = [], []
    for dis, spread, same_camera in edges:
        if spread < epsilon:
            (same if same_camera else cross).append(float(dis))
    n1, n2 = len(same), len(cross)
    mu1 = float(np.mean(same)) if n1 else 0.0
    mu2 = float(np.mean(cross)) if n2 else 0.0
    sigma1 = float(np.std(same)) if n1 else 0.0
    sigma2 = float(np.std(cross)) if n2 else 0.0

    notes = []
    if n1 == 0 or n2 == 0:
        delta_mu = 0.0
        notes.append("empty sample: delta_mu=0")
    else:
        delta_mu = max(mu1 - mu2, 0.0)
    if n1 < 2 or n2 < 2 or sigma1 == 0.0:
        delta_sigma = 1.0
        notes.append("degenerate spread: delta_sigma=1")
    else:
        delta_sigma = sigma2 / sigma1
    return EqualizationStats(mu1, sigma1, mu2, sigma2, delta_mu, delta_sigma, n1, n2, "; ".join(notes))


def transform_same_camera(dis, stats: EqualizationStats):
    """Unclamped affine map applied to same-camera similarities."""
    return stats.delta_sigma * (dis - stats.delta_mu)


def equalized_appearance(dis: float, same_camera: bool, stats: EqualizationStats, p_min: float = P_MIN) -> float:
    if not same_camera:
        return dis
    v = transform_same_camera(dis, stats)
    return min(max(v, p_min), 1.0)
