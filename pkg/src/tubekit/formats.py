"""File formats: JSONL streams and JSON documents, loadable back bit-exact.

Floats are written with 9 significant digits everywhere, so identical inputs
produce byte-identical files.  JSONL diagnostics carry 1-based line numbers.
Intervals may be given in seconds (ts_sec / te_sec) instead of frames when
the document carries an fps; they are converted once at load time.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .association import Detection, FrameDetections, Tube, TubeRecord
from .autolabel import CandidateRecord, CandidateTube
from .errors import FormatError, ValidationError
from .geometry import Box
from .metrics import Prediction
from .mining import GtTube

SCHEMA_VERSION = 1


def f9(x: float) -> float:
    """Round to 9 significant digits; idempotent, so rereading is stable."""
    return float(f"{float(x):.9g}")


def _dump(obj) -> str:
    return json.dumps(obj)


def _require(obj: dict, key: str, path: str, line: int | None = None):
    if key not in obj:
        raise FormatError(f"missing required key '{key}'", path=path, line=line)
    return obj[key]


def _box_from(arr, path: str, line: int | None = None) -> Box:
    try:
        return Box.from_list(arr)
    except (ValidationError, TypeError) as e:
        raise FormatError(f"bad box {arr!r}: {e}", path=path, line=line) from e


def _load_json_doc(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise FormatError(f"cannot read file: {e}", path=path) from e
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e.msg}", path=path, line=e.lineno) from e
    if not isinstance(obj, dict):
        raise FormatError("expected a JSON object at top level", path=path)
    return obj


def _iter_jsonl(path: str):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise FormatError(f"cannot read file: {e}", path=path) from e
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise FormatError(f"invalid JSON: {e.msg}", path=path, line=lineno) from e
        if not isinstance(obj, dict):
            raise FormatError("expected a JSON object", path=path, line=lineno)
        yield lineno, obj


def _interval_from(obj: dict, path: str, line: int | None = None) -> tuple[int, int]:
    if "ts" in obj and "te" in obj:
        return int(obj["ts"]), int(obj["te"])
    if "ts_sec" in obj and "te_sec" in obj:
        if "fps" not in obj:
            raise FormatError("second-denominated interval needs an fps key",
                              path=path, line=line)
        fps = float(obj["fps"])
        return int(round(float(obj["ts_sec"]) * fps)), int(round(float(obj["te_sec"]) * fps))
    raise FormatError("interval needs ts/te (frames) or ts_sec/te_sec plus fps",
                      path=path, line=line)


# ---------------------------------------------------------------- detections

def save_detections(path: str, video_id: str, fps: float,
                    frames: list[FrameDetections]) -> None:
    if not frames:
        raise ValidationError("refusing to write an empty detections file")
    header = {"video_id": video_id, "fps": f9(fps),
              "frame_count": len(frames),
              "feature_dim": frames[0].feature_dim}
    lines = [_dump(header)]
    for fr in frames:
        lines.append(_dump({
            "t": fr.t,
            "detections": [{
                "box": [f9(v) for v in d.box.to_list()],
                "score": f9(d.score),
                "embed": [f9(v) for v in d.feature],
            } for d in fr.detections],
        }))
    Path(path).write_text("\n".join(lines) + "\n")


def load_detections(path: str) -> tuple[dict, list[FrameDetections]]:
    it = _iter_jsonl(path)
    try:
        lineno, header = next(it)
    except StopIteration:
        raise FormatError("empty detections file", path=path) from None
    meta = {
        "video_id": str(_require(header, "video_id", path, lineno)),
        "fps": float(_require(header, "fps", path, lineno)),
        "frame_count": int(_require(header, "frame_count", path, lineno)),
        "feature_dim": int(_require(header, "feature_dim", path, lineno)),
    }
    frames: list[FrameDetections] = []
    for lineno, obj in it:
        t = int(_require(obj, "t", path, lineno))
        if t != len(frames):
            raise FormatError(f"expected frame t={len(frames)}, got t={t}",
                              path=path, line=lineno)
        dets = []
        for d in _require(obj, "detections", path, lineno):
            box = _box_from(_require(d, "box", path, lineno), path, lineno)
            embed = np.asarray(_require(d, "embed", path, lineno), dtype=float)
            if embed.shape != (meta["feature_dim"],):
                raise FormatError(
                    f"embed length {embed.shape} does not match feature_dim "
                    f"{meta['feature_dim']}", path=path, line=lineno)
            try:
                dets.append(Detection(box=box,
                                      score=float(_require(d, "score", path, lineno)),
                                      feature=embed))
            except ValidationError as e:
                raise FormatError(str(e), path=path, line=lineno) from e
        try:
            frames.append(FrameDetections(t=t, detections=dets))
        except ValidationError as e:
            raise FormatError(str(e), path=path, line=lineno) from e
    if len(frames) != meta["frame_count"]:
        raise FormatError(
            f"header promises {meta['frame_count']} frames, file has {len(frames)}",
            path=path)
    return meta, frames


# ------------------------------------------------------------------ gt files

def save_gt(path: str, video_id: str, gt: GtTube) -> None:
    doc = {
        "video_id": video_id,
        "ts": gt.ts,
        "te": gt.te,
        "boxes": [{"t": t, "box": [f9(v) for v in gt.boxes[t].to_list()]}
                  for t in range(gt.ts, gt.te + 1)],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _gt_from_obj(obj: dict, path: str, line: int | None = None) -> tuple[str, GtTube]:
    video_id = str(_require(obj, "video_id", path, line))
    ts, te = _interval_from(obj, path, line)
    boxes = {}
    for item in _require(obj, "boxes", path, line):
        t = int(_require(item, "t", path, line))
        boxes[t] = _box_from(_require(item, "box", path, line), path, line)
    try:
        return video_id, GtTube(ts=ts, te=te, boxes=boxes)
    except ValidationError as e:
        raise FormatError(str(e), path=path, line=line) from e


def load_gt(path: str) -> tuple[str, GtTube]:
    return _gt_from_obj(_load_json_doc(path), path)


def load_gt_collection(path: str) -> list[tuple[str, GtTube]]:
    """One GT per line (JSONL), or a single GT document (JSON)."""
    try:
        obj = _load_json_doc(path)
    except FormatError:
        obj = None
    if obj is not None:
        return [_gt_from_obj(obj, path)]
    out = [_gt_from_obj(o, path, lineno) for lineno, o in _iter_jsonl(path)]
    if not out:
        raise FormatError("empty ground-truth file", path=path)
    return out


# ---------------------------------------------------------------- tube files

def save_tubes(path: str, video_id: str, tubes: list[Tube],
               include_embeds: bool = False) -> None:
    out = []
    for tube in tubes:
        records = []
        for r in tube.records:
            rec = {"t": r.t, "box": [f9(v) for v in r.box.to_list()],
                   "score": f9(r.score), "det": r.det}
            if include_embeds:
                if r.feature is None:
                    raise ValidationError(
                        f"tube {tube.slot_id} has no feature at frame {r.t}")
                rec["embed"] = [f9(v) for v in r.feature]
            records.append(rec)
        out.append({"slot_id": tube.slot_id, "records": records})
    doc = {"video_id": video_id, "n_q": len(tubes), "tubes": out}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_tubes(path: str) -> tuple[str, list[Tube]]:
    obj = _load_json_doc(path)
    video_id = str(_require(obj, "video_id", path))
    n_q = int(_require(obj, "n_q", path))
    tubes = []
    for entry in _require(obj, "tubes", path):
        records = []
        for r in _require(entry, "records", path):
            embed = r.get("embed")
            records.append(TubeRecord(
                t=int(_require(r, "t", path)),
                box=_box_from(_require(r, "box", path), path),
                score=float(_require(r, "score", path)),
                feature=None if embed is None else np.asarray(embed, dtype=float),
                det=None if r.get("det") is None else int(r["det"]),
            ))
        tubes.append(Tube(slot_id=int(_require(entry, "slot_id", path)),
                          records=records))
    if len(tubes) != n_q:
        raise FormatError(f"header promises n_q={n_q} tubes, file has {len(tubes)}",
                          path=path)
    return video_id, tubes


# -------------------------------------------------------------- predictions

def save_predictions(path: str, items: list[tuple[str, Prediction]]) -> None:
    lines = []
    for video_id, pred in items:
        keys = sorted(pred.boxes)
        lines.append(_dump({
            "video_id": video_id, "ts": pred.ts, "te": pred.te,
            "boxes": [{"t": t, "box": [f9(v) for v in pred.boxes[t].to_list()]}
                      for t in keys],
        }))
    Path(path).write_text("\n".join(lines) + "\n")


def load_predictions(path: str) -> list[tuple[str, Prediction]]:
    out = []
    for lineno, obj in _iter_jsonl(path):
        video_id = str(_require(obj, "video_id", path, lineno))
        ts, te = _interval_from(obj, path, lineno)
        boxes = {}
        for item in _require(obj, "boxes", path, lineno):
            t = int(_require(item, "t", path, lineno))
            boxes[t] = _box_from(_require(item, "box", path, lineno), path, lineno)
        try:
            out.append((video_id, Prediction(ts=ts, te=te, boxes=boxes)))
        except ValidationError as e:
            raise FormatError(str(e), path=path, line=lineno) from e
    if not out:
        raise FormatError("empty predictions file", path=path)
    return out


# -------------------------------------------------------------- label files

def save_labels(path: str, video_id: str, identities: list[list[int]]) -> None:
    doc = {"video_id": video_id,
           "frames": [{"t": t, "ids": ids} for t, ids in enumerate(identities)]}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_labels(path: str) -> tuple[str, list[list[int]]]:
    obj = _load_json_doc(path)
    video_id = str(_require(obj, "video_id", path))
    identities = []
    for item in _require(obj, "frames", path):
        t = int(_require(item, "t", path))
        if t != len(identities):
            raise FormatError(f"expected frame t={len(identities)}, got t={t}", path=path)
        identities.append([int(x) for x in _require(item, "ids", path)])
    return video_id, identities


# ---------------------------------------------------------------- candidates

def save_candidates(path: str, video_id: str, candidates: list[CandidateTube]) -> None:
    def _record(r: CandidateRecord) -> dict:
        rec = {"t": r.t, "box": [f9(v) for v in r.box.to_list()],
               "score": f9(r.score)}
        if r.interpolated:
            rec["interpolated"] = True
        return rec

    doc = {
        "video_id": video_id,
        "candidates": [{
            "category": c.category,
            "span": [c.span[0], c.span[1]],
            "records": [_record(r) for r in c.records],
            "appearance": [f9(v) for v in c.appearance],
        } for c in candidates],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_candidates(path: str) -> tuple[str, list[CandidateTube]]:
    obj = _load_json_doc(path)
    video_id = str(_require(obj, "video_id", path))
    out = []
    for c in _require(obj, "candidates", path):
        span = _require(c, "span", path)
        if not (isinstance(span, list) and len(span) == 2):
            raise FormatError(f"span must be a 2-element array, got {span!r}", path=path)
        records = []
        for r in _require(c, "records", path):
            records.append(CandidateRecord(
                t=int(_require(r, "t", path)),
                box=_box_from(_require(r, "box", path), path),
                score=float(_require(r, "score", path)),
                interpolated=bool(r.get("interpolated", False))))
        try:
            out.append(CandidateTube(
                category=str(_require(c, "category", path)),
                span=(int(span[0]), int(span[1])),
                records=records,
                appearance=np.asarray(_require(c, "appearance", path), dtype=float)))
        except ValidationError as e:
            raise FormatError(str(e), path=path) from e
    return video_id, out


# ------------------------------------------------------------------- reports

def save_report(path: str, doc: dict) -> None:
    """Reports are plain JSON documents; floats must already be f9-rounded."""
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
