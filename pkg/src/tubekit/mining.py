"""Ground-truth-aligned tube mining.

Scores every tube of a clip against an annotated interval with a weighted
sum of four costs and picks the cheapest:

    total = w_cls * mean(1 - confidence)          over GT frames
          + w_bbox * mean(center-size L1)         over GT frames
          + w_giou * mean(1 - giou)               over GT frames
          + w_temp * temporal cost                over the full clip

The temporal term measures frame-to-frame smoothness of the tube itself and
deliberately covers all frames, not just the annotated span, so a tube that
wanders outside the interval pays for it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .association import Tube
from .errors import ValidationError
from .geometry import Box, giou, to_center_size


@dataclass(frozen=True)
class GtTube:
    """Dense per-frame annotation over an inclusive frame interval [ts, te]."""

    ts: int
    te: int
    boxes: dict[int, Box]

    def __post_init__(self):
        if self.ts > self.te:
            raise ValidationError(f"empty GT interval [{self.ts}, {self.te}]")
        missing = [t for t in range(self.ts, self.te + 1) if t not in self.boxes]
        if missing:
            raise ValidationError(f"GT interval is missing boxes at frames {missing[:5]}")
        extra = [t for t in self.boxes if t < self.ts or t > self.te]
        if extra:
            raise ValidationError(f"GT has boxes outside its interval at frames {sorted(extra)[:5]}")

    @property
    def length(self) -> int:
        return self.te - self.ts + 1


@dataclass(frozen=True)
class CostWeights:
    w_cls: float = 1.0
    w_bbox: float = 5.0
    w_giou: float = 3.0
    w_temp: float = 2.0

    def __post_init__(self):
        for name in ("w_cls", "w_bbox", "w_giou", "w_temp"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"{name} must be finite and nonnegative, got {v}")


@dataclass(frozen=True)
class CostBreakdown:
    c_cls: float
    c_bbox: float
    c_giou: float
    c_temp: float
    total: float


def center_size_l1(a: Box, b: Box) -> float:
    """Sum of absolute differences in (cx, cy, w, h)."""
    ca, cb = to_center_size(a), to_center_size(b)
    return (abs(ca.cx - cb.cx) + abs(ca.cy - cb.cy)
            + abs(ca.w - cb.w) + abs(ca.h - cb.h))


def temporal_cost(tube: Tube) -> float:
    """Mean (1 - giou) over consecutive box pairs; needs at least 2 records."""
    n = len(tube.records)
    if n < 2:
        raise ValidationError(f"temporal cost needs at least 2 records, tube {tube.slot_id} has {n}")
    acc = 0.0
    for a, b in zip(tube.records, tube.records[1:]):
        acc += 1.0 - giou(a.box, b.box)
    return acc / (n - 1)


def match_cost(tube: Tube, gt: GtTube, weights: CostWeights | None = None) -> CostBreakdown:
    """Cost of one tube against the annotation.  The tube must cover every
    frame of the GT interval (association guarantees full-clip coverage)."""
    if weights is None:
        weights = CostWeights()
    by_t = {r.t: r for r in tube.records}
    missing = [t for t in range(gt.ts, gt.te + 1) if t not in by_t]
    if missing:
        raise ValidationError(
            f"tube {tube.slot_id} does not cover GT frames {missing[:5]}")

    c_cls = 0.0
    c_bbox = 0.0
    c_giou = 0.0
    for t in range(gt.ts, gt.te + 1):
        rec = by_t[t]
        c_cls += 1.0 - rec.score
        c_bbox += center_size_l1(rec.box, gt.boxes[t])
        c_giou += 1.0 - giou(rec.box, gt.boxes[t])
    n = gt.length
    c_cls /= n
    c_bbox /= n
    c_giou /= n
    c_temp = temporal_cost(tube)
    total = (weights.w_cls * c_cls + weights.w_bbox * c_bbox
             + weights.w_giou * c_giou + weights.w_temp * c_temp)
    return CostBreakdown(c_cls=c_cls, c_bbox=c_bbox, c_giou=c_giou,
                         c_temp=c_temp, total=total)


def mine_best_tube(tubes: list[Tube], gt: GtTube,
                   weights: CostWeights | None = None) -> tuple[int, list[CostBreakdown]]:
    """Index of the cheapest tube plus every tube's breakdown.

    Ties go to the lowest index, so the result is deterministic for
    duplicated tubes.
    """
    if not tubes:
        raise ValidationError("mine_best_tube needs at least one tube")
    breakdowns = [match_cost(tube, gt, weights) for tube in tubes]
    best = 0
    for i, b in enumerate(breakdowns):
        if b.total < breakdowns[best].total:
            best = i
    return best, breakdowns
