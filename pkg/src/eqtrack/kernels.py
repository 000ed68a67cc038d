"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
twin is used. Set ``EQTRACK_PURE_PYTHON=1`` to force the fallback.
"""

import logging
import os

from . import _pykernels

logger = logging.getLogger(__name__)


def _load():
    if os.environ.get("EQTRACK_PURE_PYTHON", "") not in ("", "0"):
        return _pykernels
    try:
        from . import _ckernels
    except ImportError:
        logger.info("compiled kernels unavailable; using pure-Python fallback")
        return _pykernels
    return _ckernels


backend = _load()
BACKEND = backend.BACKEND

online_kmeans = backend.online_kmeans
match_similarity = backend.match_similarity
lag_scores = backend.lag_scores
pair_scores = backend.pair_scores
min_cost_flow = backend.min_cost_flow


def get_backend(name):
    """Return the kernel module called ``name`` (``"cython"`` or ``"python"``)."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
