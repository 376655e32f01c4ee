"""Axis-aligned box geometry on the normalized unit square.

Boxes live in corner form [x1, y1, x2, y2] with 0 <= x1 < x2 <= 1 and
0 <= y1 < y2 <= 1.  Construction clamps coordinates into [0, 1] and rejects
boxes that are left with zero area.  Center-size form (cx, cy, w, h) is the
secondary representation used by L1 matching costs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError

# Floor on box extent after clamping; anything thinner is treated as empty.
_MIN_EXTENT = 0.0


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in corner form, normalized to the unit square."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        vals = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError(f"box coordinates must be finite, got {vals}")
        object.__setattr__(self, "x1", min(max(self.x1, 0.0), 1.0))
        object.__setattr__(self, "y1", min(max(self.y1, 0.0), 1.0))
        object.__setattr__(self, "x2", min(max(self.x2, 0.0), 1.0))
        object.__setattr__(self, "y2", min(max(self.y2, 0.0), 1.0))
        if self.x2 - self.x1 <= _MIN_EXTENT or self.y2 - self.y1 <= _MIN_EXTENT:
            raise ValidationError(
                f"box has no area after clamping to the unit square: {vals}"
            )

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def to_list(self) -> list[float]:
        """Serialize as the canonical 4-element array."""
        return [self.x1, self.y1, self.x2, self.y2]

    @classmethod
    def from_list(cls, arr) -> "Box":
        if len(arr) != 4:
            raise ValidationError(f"box array must have 4 elements, got {len(arr)}")
        return cls(float(arr[0]), float(arr[1]), float(arr[2]), float(arr[3]))


@dataclass(frozen=True)
class CenterSizeBox:
    """Box in center-size form (cx, cy, w, h); w and h strictly positive."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        vals = (self.cx, self.cy, self.w, self.h)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError(f"center-size coordinates must be finite, got {vals}")
        if self.w <= 0 or self.h <= 0:
            raise ValidationError(f"center-size box needs positive extents, got {vals}")


def to_center_size(box: Box) -> CenterSizeBox:
    """Corner form -> center-size form."""
    return CenterSizeBox(
        cx=0.5 * (box.x1 + box.x2),
        cy=0.5 * (box.y1 + box.y2),
        w=box.x2 - box.x1,
        h=box.y2 - box.y1,
    )


def to_corner(cs: CenterSizeBox) -> Box:
    """Center-size form -> corner form.  Inverse of to_center_size."""
    return Box(
        x1=cs.cx - 0.5 * cs.w,
        y1=cs.cy - 0.5 * cs.h,
        x2=cs.cx + 0.5 * cs.w,
        y2=cs.cy + 0.5 * cs.h,
    )


def intersection_area(a: Box, b: Box) -> float:
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return iw * ih


def union_area(a: Box, b: Box) -> float:
    return a.area + b.area - intersection_area(a, b)


def iou(a: Box, b: Box) -> float:
    """Intersection over union, in [0, 1]."""
    inter = intersection_area(a, b)
    return inter / (a.area + b.area - inter)


def enclosing_area(a: Box, b: Box) -> float:
    """Area of the smallest axis-aligned box containing both."""
    return (max(a.x2, b.x2) - min(a.x1, b.x1)) * (max(a.y2, b.y2) - min(a.y1, b.y1))


def giou(a: Box, b: Box) -> float:
    """Generalized IoU: iou minus the enclosing-box penalty, in (-1, 1].

    Equals plain IoU whenever the enclosing box coincides with the union.
    Far-apart small boxes approach -1; identical boxes give exactly 1.
    """
    u = union_area(a, b)
    c = enclosing_area(a, b)
    return intersection_area(a, b) / u - (c - u) / c
