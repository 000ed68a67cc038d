"""Readers and writers for tracklets, topologies, trajectories and reports.

Tracklets are newline-delimited JSON, one self-contained record per line.
Appearance is either given inline as per-frame ``[[r, g, b, weight], ...]``
lists or as ``crops``: a directory (relative to the tracklet file) holding
``<k>.rgb`` for every frame ``k`` of the tracklet, each a little-endian
uint32 width and height followed by row-major 8-bit RGB triples.
"""

from __future__ import annotations

import csv
import json
import logging
import struct
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .appearance import compute_mcshr
from .core import (
    CameraTopology,
    MajorColorDescriptor,
    Portal,
    Rejection,
    TrajectorySet,
    Tracklet,
    ValidationError,
    make_tracklet,
    validate_topology,
    validate_tracklets,
)
from .evaluate import FrameAnnotations, MctaReport
from .equalize import EqualizationStats

logger = logging.getLogger(__name__)

REPORT_KEYS = ("precision", "recall", "f1", "mme_s", "mme_c", "tp_s", "tp_c", "mcta", "delta_mu", "delta_sigma")
TRAJECTORY_HEADER = "# trajectories objective_cost"
ANNOTATION_FIELDS = ("camera", "frame", "id", "x", "y", "w", "h")


class FormatError(ValidationError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message: str, path=None, line: Optional[int] = None):
        where = f"{path}:{line}: " if line is not None else (f"{path}: " if path is not None else "")
        super().__init__(where + message)
        self.path = path
        self.line = line


# ---------------------------------------------------------------- crops


def write_rgb(path, pixels: np.ndarray) -> None:
    px = np.ascontiguousarray(pixels, dtype=np.uint8)
    if px.ndim != 3 or px.shape[2] != 3:
        raise ValidationError(f"expected an (h, w, 3) buffer, got shape {px.shape}")
    h, w = px.shape[:2]
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", w, h))
        fh.write(px.tobytes())


def read_rgb(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise FormatError("truncated crop header", path)
    w, h = struct.unpack_from("<II", data)
    body = data[8:]
    if len(body) != w * h * 3:
        raise FormatError(f"crop is {w}x{h} but holds {len(body)} bytes", path)
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)


# ---------------------------------------------------------------- tracklets


def _descriptor_from_json(entries) -> MajorColorDescriptor:
    if not isinstance(entries, list) or any(not isinstance(e, list) or len(e) != 4 for e in entries):
        raise ValidationError("colour entries must be [r, g, b, weight]")
    rows = [(tuple(float(v) for v in e[:3]), float(e[3])) for e in entries]
    desc = MajorColorDescriptor([c for c, _ in rows], [w for _, w in rows])
    try:
        desc.check()
        return desc  # already canonical: keep values bit for bit
    except ValidationError:
        return MajorColorDescriptor.from_entries(rows)


def _parse_record(rec: dict, base: Path) -> Tracklet:
    for key in ("id", "camera", "start_frame", "bboxes", "confidence"):
        if key not in rec:
            raise ValidationError(f"missing field {key!r}")
    if "appearance" not in rec and "crops" not in rec:
        raise ValidationError("record has neither 'appearance' nor 'crops'")
    try:
        if "appearance" in rec:
            descs = [_descriptor_from_json(entries) for entries in rec["appearance"]]
        else:
            crop_dir = base / rec["crops"]
            descs = [compute_mcshr(read_rgb(crop_dir / f"{k}.rgb")) for k in range(len(rec["bboxes"]))]
        bboxes = np.asarray(rec["bboxes"], dtype=np.float64)
        if bboxes.size and (bboxes.ndim != 2 or bboxes.shape[1] != 4):
            raise ValidationError("bboxes must be [x, y, w, h] rows")
        positions = rec.get("positions")
        velocities = rec.get("velocities")
        return make_tracklet(
            rec["id"],
            rec["camera"],
            rec["start_frame"],
            bboxes,
            rec["confidence"],
            descs,
            positions=None if positions is None else np.asarray(positions, dtype=np.float64),
            velocities=None if velocities is None else np.asarray(velocities, dtype=np.float64),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc)) from None


def read_tracklets(path, rejected: Optional[List[Rejection]] = None) -> List[Tracklet]:
    """Parse a tracklet file.

    Syntax errors raise :class:`FormatError` with the line number. Records
    that parse but break a per-frame length invariant are dropped and
    reported through ``rejected``.
    """
    path = Path(path)
    base = path.parent
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if not isinstance(rec, dict):
                    raise ValidationError("record is not an object")
                out.append(_parse_record(rec, base))
            except (json.JSONDecodeError, ValidationError, OSError) as exc:
                raise FormatError(str(exc), path, lineno) from None
    return validate_tracklets(out, rejected=rejected)


def tracklet_record(t: Tracklet) -> dict:
    return {
        "id": t.id,
        "camera": t.camera,
        "start_frame": t.start_frame,
        "confidence": t.confidence,
        "bboxes": t.bboxes.tolist(),
        "positions": t.positions.tolist(),
        "velocities": t.velocities.tolist(),
        "appearance": [[[*c, w] for c, w in d.entries] for d in t.appearance],
    }


def write_tracklets(tracklets: Sequence[Tracklet], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in tracklets:
            fh.write(json.dumps(tracklet_record(t), separators=(",", ":")) + "\n")


# ---------------------------------------------------------------- topology


def _points(raw, what: str):
    try:
        pts = tuple((float(x), float(y)) for x, y in raw)
    except (TypeError, ValueError):
        raise ValidationError(f"{what} must be a list of [x, y] vertices") from None
    return pts


def _point(raw, what: str):
    try:
        x, y = raw
        return (float(x), float(y))
    except (TypeError, ValueError):
        raise ValidationError(f"{what} must be an [x, y] pair") from None


def topology_from_dict(doc: dict) -> CameraTopology:
    try:
        cameras = tuple(str(c) for c in doc["cameras"])
        adjacency = tuple(tuple(bool(v) for v in row) for row in doc.get("adjacency", ()))
        portals = tuple(
            Portal(
                str(p["from"]),
                str(p["to"]),
                _points(p["exit_area"], "exit_area"),
                _points(p["enter_area"], "enter_area"),
                _point(p["exit_point"], "exit_point"),
                _point(p["enter_point"], "enter_point"),
            )
            for p in doc.get("portals", ())
        )
    except KeyError as exc:
        raise ValidationError(f"topology is missing field {exc.args[0]!r}") from None
    except TypeError as exc:
        raise ValidationError(f"malformed topology: {exc}") from None
    return validate_topology(CameraTopology(cameras, adjacency, portals))


def topology_to_dict(topo: CameraTopology) -> dict:
    return {
        "cameras": list(topo.cameras),
        "adjacency": [list(r) for r in topo.adjacency],
        "portals": [
            {
                "from": p.source,
                "to": p.target,
                "exit_area": [list(v) for v in p.exit_area],
                "enter_area": [list(v) for v in p.enter_area],
                "exit_point": list(p.exit_point),
                "enter_point": list(p.enter_point),
            }
            for p in topo.portals
        ],
    }


def read_topology(path) -> CameraTopology:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, path, exc.lineno) from None
    if not isinstance(doc, dict):
        raise FormatError("topology must be a JSON object", path)
    return topology_from_dict(doc)


def write_topology(topo: CameraTopology, path) -> None:
    Path(path).write_text(json.dumps(topology_to_dict(topo), indent=1) + "\n", encoding="utf-8")


# ---------------------------------------------------------------- trajectories


def _check_camera_name(cam: str) -> None:
    if not cam or any(ch.isspace() or ch == "," for ch in cam):
        raise ValidationError(f"camera id {cam!r} cannot be written (empty, whitespace or comma)")


def write_trajectories(result: TrajectorySet, path, tracklets: Sequence[Tracklet], hypothesis_path=None) -> None:
    """One line per trajectory; optionally the per-frame hypothesis CSV too.

    Line format: ``gid tid,camera,start,end tid,camera,start,end ...`` with
    1-based global ids in trajectory order.
    """
    by_id = {t.id: t for t in tracklets}
    lines = [f"{TRAJECTORY_HEADER} {float(result.objective_cost)!r}"]
    for gid, traj in enumerate(result.trajectories, start=1):
        parts = [str(gid)]
        for tid in traj:
            t = by_id[tid]
            _check_camera_name(t.camera)
            parts.append(f"{t.id},{t.camera},{t.start_frame},{t.end_frame}")
        lines.append(" ".join(parts))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if hypothesis_path is not None:
        from .pipeline import hypotheses

        write_annotations(hypotheses(result, tracklets), hypothesis_path)


def read_trajectories(path) -> TrajectorySet:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith(TRAJECTORY_HEADER):
        raise FormatError("missing trajectory header", path, 1)
    try:
        cost = float(lines[0][len(TRAJECTORY_HEADER):].strip())
    except ValueError:
        raise FormatError("bad objective cost in header", path, 1) from None
    trajectories = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split()
        try:
            gid = int(fields[0])
            if gid != len(trajectories) + 1:
                raise ValueError(f"expected global id {len(trajectories) + 1}, got {gid}")
            traj = []
            for item in fields[1:]:
                tid, _cam, start, end = item.split(",")
                if int(end) < int(start):
                    raise ValueError(f"tracklet {tid} ends before it starts")
                traj.append(int(tid))
            if not traj:
                raise ValueError("trajectory without tracklets")
        except ValueError as exc:
            raise FormatError(str(exc), path, lineno) from None
        trajectories.append(traj)
    return TrajectorySet(trajectories, cost)


# ---------------------------------------------------------------- annotations


def write_annotations(ann: FrameAnnotations, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ANNOTATION_FIELDS)
        for camera, frame, tid, box in ann.rows():
            _check_camera_name(camera)
            w.writerow([camera, frame, tid, *(repr(float(v)) for v in box)])


def read_annotations(path) -> FrameAnnotations:
    ann = FrameAnnotations()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return ann
        if tuple(h.strip() for h in header) != ANNOTATION_FIELDS:
            raise FormatError(f"expected header {','.join(ANNOTATION_FIELDS)}", path, 1)
        for row in reader:
            if not row:
                continue
            try:
                if len(row) != len(ANNOTATION_FIELDS):
                    raise ValueError(f"expected {len(ANNOTATION_FIELDS)} fields, got {len(row)}")
                box = [float(v) for v in row[3:]]
                if box[2] < 0 or box[3] < 0:
                    raise ValueError("negative box size")
                ann.add(row[0], int(row[1]), int(row[2]), box)
            except ValueError as exc:
                raise FormatError(str(exc), path, reader.line_num) from None
    return ann


# ---------------------------------------------------------------- reports


def report_dict(report: MctaReport, stats: Optional[EqualizationStats] = None) -> Dict[str, float]:
    d = {k: getattr(report, k) for k in REPORT_KEYS[:8]}
    d["delta_mu"] = stats.delta_mu if stats is not None else 0.0
    d["delta_sigma"] = stats.delta_sigma if stats is not None else 1.0
    d["reentry_gap"] = report.reentry_gap
    return d


def format_report(report: MctaReport, stats: Optional[EqualizationStats] = None) -> str:
    return "".join(f"{k}={v!r}\n" for k, v in report_dict(report, stats).items())


def write_report(report: MctaReport, path, stats: Optional[EqualizationStats] = None, as_json: bool = False) -> None:
    if as_json:
        doc = report_dict(report, stats)
        doc["warnings"] = list(report.warnings)
        doc["datasets"] = {k: report_dict(v) for k, v in report.datasets.items()}
        text = json.dumps(doc, indent=1, sort_keys=False) + "\n"
    else:
        text = format_report(report, stats)
    Path(path).write_text(text, encoding="utf-8")


def read_report(path) -> Dict[str, float]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep or key not in REPORT_KEYS + ("reentry_gap",):
            raise FormatError(f"unexpected report line {line!r}", path, lineno)
        out[key] = int(value) if key.startswith(("mme", "tp", "reentry")) else float(value)
    return out


def write_scenario(scenario, out_dir) -> Dict[str, Path]:
    """Write a synthetic scenario as tracklets, topology and ground truth."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "tracklets": out / "tracklets.jsonl",
        "topology": out / "topology.json",
        "ground_truth": out / "gt.csv",
    }
    write_tracklets(scenario.tracklets, paths["tracklets"])
    write_topology(scenario.topology, paths["topology"])
    write_annotations(scenario.ground_truth, paths["ground_truth"])
    return paths
