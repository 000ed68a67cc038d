import numpy as np
import pytest

from eqtrack import kernels
from eqtrack.core import MajorColorDescriptor, make_tracklet

RED = (255.0, 0.0, 0.0)
GREEN = (0.0, 255.0, 0.0)
BLUE = (0.0, 0.0, 255.0)


def desc(*entries):
    """``desc((RED, 0.5), (BLUE, 0.5))``"""
    return MajorColorDescriptor.from_entries(entries)


def line_tracklet(tid, camera, start, n, origin=(100.0, 300.0), velocity=(2.0, 0.0), confidence=0.8,
                  appearance=None):
    """Tracklet whose foot point moves linearly from ``origin``."""
    k = np.arange(n)[:, None]
    feet = np.asarray(origin) + np.asarray(velocity) * k
    boxes = np.column_stack([feet[:, 0] - 20.0, feet[:, 1] - 100.0, np.full(n, 40.0), np.full(n, 100.0)])
    if appearance is None:
        appearance = [desc((RED, 1.0))] * n
    return make_tracklet(tid, camera, start, boxes, confidence, appearance)


def periodic_frames(n, period, n_colors=8, noise=0.0, rng=None):
    """Per-frame descriptors that repeat with ``period``.

    The dominant colour walks around a ring of ``n_colors`` well separated
    colours once per period, blending linearly between neighbours.
    """
    palette = [(float(30 * k), float(255 - 30 * k), float((97 * k) % 256)) for k in range(n_colors)]
    out = []
    for f in range(n):
        phase = (f % period) / period * n_colors
        w = np.array([max(0.0, 1.0 - min(abs(phase - k), n_colors - abs(phase - k))) for k in range(n_colors)])
        w = 0.05 + w
        w = w / w.sum()
        if noise:
            w = np.clip(w + rng.uniform(-noise, noise, n_colors), 1e-3, None)
            w = w / w.sum()
        out.append(MajorColorDescriptor.from_entries(zip(palette, w.tolist())))
    return out


@pytest.fixture(params=["python", "cython"])
def backend(request):
    try:
        return kernels.get_backend(request.param)
    except ImportError:
        pytest.skip("compiled kernels not built")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
