"""Multi-camera tracking accuracy (MCTA).

Ground truth and hypotheses are matched frame by frame, CLEAR-MOT style.
Identity switches are then split by whether the two consecutive matched
frames of a ground-truth target lie in the same camera or not.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

logger = logging.getLogger(__name__)

DEFAULT_IOU = 0.5
DEFAULT_REENTRY_GAP = 60 * 25

Box = Tuple[float, float, float, float]


class FrameAnnotations:
    """Boxes per ``(camera, frame)``: lists of ``(target_id, (x, y, w, h))``."""

    def __init__(self, rows: Optional[Iterable[Tuple[str, int, int, Box]]] = None):
        self.frames: Dict[Tuple[str, int], List[Tuple[int, Box]]] = defaultdict(list)
        for camera, frame, tid, box in rows or ():
            self.add(camera, frame, tid, box)

    def add(self, camera: str, frame: int, tid: int, box) -> None:
        key = (str(camera), int(frame))
        tid = int(tid)
        if any(t == tid for t, _ in self.frames[key]):
            raise ValueError(f"target {tid} appears twice in camera {camera} frame {frame}")
        self.frames[key].append((tid, tuple(float(v) for v in box)))

    def rows(self):
        for (camera, frame) in sorted(self.frames, key=lambda k: (k[1], k[0])):
            for tid, box in sorted(self.frames[(camera, frame)]):
                yield camera, frame, tid, box

    def keys(self):
        return self.frames.keys()

    def get(self, key):
        return self.frames.get(key, [])

    def __len__(self) -> int:
        return sum(len(v) for v in self.frames.values())

    def targets(self):
        return sorted({t for v in self.frames.values() for t, _ in v})


def iou(a: Box, b: Box) -> float:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    iw = min(ax + aw, bx + bw) - max(ax, bx)
    ih = min(ay + ah, by + bh) - max(ay, by)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else 0.0


@dataclass
class FrameMatch:
    camera: str
    frame: int
    pairs: Dict[int, int]  # gt id -> hyp id
    misses: int
    false_positives: int
    n_gt: int
    n_hyp: int


def match_frames(gt: FrameAnnotations, hyp: FrameAnnotations, iou_threshold: float = DEFAULT_IOU,
                 identity_match: bool = False) -> List[FrameMatch]:
    """One-to-one gt/hyp correspondences for every annotated ``(camera, frame)``.

    A ground-truth target keeps its previous hypothesis when that one is
    still present with IoU above the threshold; the rest is assigned by
    maximum total IoU. ``identity_match`` pairs only boxes with identical
    coordinates (the protocol where ground-truth detections are the input).
    """
    keys = sorted(set(gt.keys()) | set(hyp.keys()), key=lambda k: (k[1], k[0]))
    last: Dict[int, int] = {}
    out = []
    for key in keys:
        g = sorted(gt.get(key))
        h = sorted(hyp.get(key))
        pairs: Dict[int, int] = {}
        if identity_match:
            used = set()
            for gid, gbox in g:
                for k, (hid, hbox) in enumerate(h):
                    if k not in used and hbox == gbox:
                        pairs[gid] = hid
                        used.add(k)
                        break
        elif g and h:
            scores = np.array([[iou(gb, hb) for _, hb in h] for _, gb in g])
            hyp_pos = {hid: k for k, (hid, _) in enumerate(h)}
            used_g, used_h = set(), set()
            for a, (gid, _) in enumerate(g):
                prev = last.get(gid)
                b = hyp_pos.get(prev) if prev is not None else None
                if b is not None and b not in used_h and scores[a, b] >= iou_threshold:
                    pairs[gid] = prev
                    used_g.add(a)
                    used_h.add(b)
            rest_g = [a for a in range(len(g)) if a not in used_g]
            rest_h = [b for b in range(len(h)) if b not in used_h]
            if rest_g and rest_h:
                sub = scores[np.ix_(rest_g, rest_h)]
                cost = np.where(sub >= iou_threshold, -sub, 1.0)
                rows, cols = linear_sum_assignment(cost)
                for r, c in zip(rows, cols):
                    if sub[r, c] >= iou_threshold:
                        pairs[g[rest_g[r]][0]] = h[rest_h[c]][0]
        last.update(pairs)
        out.append(FrameMatch(key[0], key[1], pairs, len(g) - len(pairs), len(h) - len(pairs), len(g), len(h)))
    return out


@dataclass
class MismatchCounts:
    mme_s: int = 0
    mme_c: int = 0
    tp_s: int = 0
    tp_c: int = 0
    matched: int = 0


def count_mismatches(matches: List[FrameMatch], reentry_gap: int = DEFAULT_REENTRY_GAP) -> MismatchCounts:
    """Walk each target's matched frames in time order.

    The first matched frame of a target counts as one inter-camera pair.
    Each later matched frame pairs with the previous one: same camera gives
    a single-camera pair, a camera change (or a return to the same camera
    after more than ``reentry_gap`` frames) an inter-camera pair. A change
    of hypothesis id within a pair is a mismatch of that pair's kind.
    """
    per_target: Dict[int, List[Tuple[int, str, int]]] = defaultdict(list)
    for fm in matches:
        for gid, hid in fm.pairs.items():
            per_target[gid].append((fm.frame, fm.camera, hid))
    counts = MismatchCounts()
    for gid in sorted(per_target):
        seq = sorted(per_target[gid], key=lambda r: (r[0], r[1]))
        counts.matched += len(seq)
        counts.tp_c += 1
        for (f0, c0, h0), (f1, c1, h1) in zip(seq, seq[1:]):
            cross = c0 != c1 or (f1 - f0) > reentry_gap
            if cross:
                counts.tp_c += 1
                counts.mme_c += h0 != h1
            else:
                counts.tp_s += 1
                counts.mme_s += h0 != h1
    return counts


@dataclass
class MctaReport:
    precision: float
    recall: float
    f1: float
    mme_s: int
    mme_c: int
    tp_s: int
    tp_c: int
    tracking_sct: float
    tracking_ict: float
    mcta: float
    false_positives: int = 0
    misses: int = 0
    n_gt: int = 0
    n_hyp: int = 0
    reentry_gap: int = DEFAULT_REENTRY_GAP  # same-camera returns beyond this count as inter-camera
    warnings: List[str] = field(default_factory=list)
    datasets: Dict[str, "MctaReport"] = field(default_factory=dict)

    def as_dict(self):
        d = asdict(self)
        d["datasets"] = {k: v.as_dict() for k, v in self.datasets.items()}
        return d


def _bracket(mme: int, tp: int, name: str, warnings: List[str]) -> float:
    if tp <= 0:
        warnings.append(f"no {name} ground-truth pairs; bracket set to 1")
        return 1.0
    return min(max(1.0 - mme / tp, 0.0), 1.0)


def mcta(counts: MismatchCounts, false_positives: int, misses: int, n_hyp: int, n_gt: int) -> MctaReport:
    """Combine detection F1 with the single- and inter-camera mismatch terms."""
    warnings: List[str] = []
    precision = 1.0 - false_positives / n_hyp if n_hyp else 1.0
    recall = 1.0 - misses / n_gt if n_gt else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    sct = _bracket(counts.mme_s, counts.tp_s, "single-camera", warnings)
    ict = _bracket(counts.mme_c, counts.tp_c, "inter-camera", warnings)
    for w in warnings:
        logger.warning(w)
    return MctaReport(
        precision=precision,
        recall=recall,
        f1=f1,
        mme_s=counts.mme_s,
        mme_c=counts.mme_c,
        tp_s=counts.tp_s,
        tp_c=counts.tp_c,
        tracking_sct=sct,
        tracking_ict=ict,
        mcta=min(max(f1 * sct * ict, 0.0), 1.0),
        false_positives=false_positives,
        misses=misses,
        n_gt=n_gt,
        n_hyp=n_hyp,
        warnings=warnings,
    )


def evaluate(gt: FrameAnnotations, hyp: FrameAnnotations, iou_threshold: float = DEFAULT_IOU,
             identity_match: bool = False, reentry_gap: int = DEFAULT_REENTRY_GAP) -> MctaReport:
    matches = match_frames(gt, hyp, iou_threshold, identity_match)
    counts = count_mismatches(matches, reentry_gap)
    fp = sum(m.false_positives for m in matches)
    miss = sum(m.misses for m in matches)
    report = mcta(counts, fp, miss, n_hyp=len(hyp), n_gt=len(gt))
    report.reentry_gap = reentry_gap
    return report


def evaluate_datasets(pairs: Dict[str, Tuple[FrameAnnotations, FrameAnnotations]], **kwargs) -> MctaReport:
    """Pool several datasets; per-dataset reports go in ``datasets``."""
    parts = {}
    counts = MismatchCounts()
    fp = miss = n_hyp = n_gt = 0
    for name, (gt, hyp) in sorted(pairs.items()):
        parts[name] = evaluate(gt, hyp, **kwargs)
        r = parts[name]
        counts.mme_s += r.mme_s
        counts.mme_c += r.mme_c
        counts.tp_s += r.tp_s
        counts.tp_c += r.tp_c
        fp += r.false_positives
        miss += r.misses
        n_hyp += r.n_hyp
        n_gt += r.n_gt
    report = mcta(counts, fp, miss, n_hyp, n_gt)
    report.reentry_gap = kwargs.get("reentry_gap", DEFAULT_REENTRY_GAP)
    report.datasets = parts
    return report
