"""Temporal consistency losses over a mined tube, with analytic gradients.

Two losses, both averages over the T-1 consecutive pairs of a tube:

    feature loss   mean(1 - cos(q_t, q_{t+1}))      on the feature rows
    geometry loss  mean(1 - giou(b_t, b_{t+1}))     on the boxes

The geometry loss is piecewise smooth.  Its gradient exists only where
consecutive boxes strictly overlap and share no coordinate value; at
touching edges or partially tied coordinates we refuse with NonSmoothError
rather than silently pick a subgradient.  The one exception is a pair of
exactly identical boxes: that is the global minimum of the pair term
(a symmetric kink), and its gradient contribution is defined as zero so a
constant tube reports zero gradients everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .association import Tube
from .errors import NonSmoothError, ValidationError
from .geometry import Box, giou


@dataclass(frozen=True)
class MinedTube:
    """Dense tube handed to the losses: per-frame feature rows and boxes."""

    features: np.ndarray  # (T, D)
    boxes: list[Box]

    def __post_init__(self):
        f = np.array(self.features, dtype=float)
        if f.ndim != 2 or f.shape[0] < 2:
            raise ValidationError(f"features must be (T >= 2, D), got {f.shape}")
        if len(self.boxes) != f.shape[0]:
            raise ValidationError(
                f"{len(self.boxes)} boxes for {f.shape[0]} feature rows")
        if not np.all(np.isfinite(f)):
            raise ValidationError("features contain non-finite values")
        if np.any(np.linalg.norm(f, axis=1) == 0.0):
            raise ValidationError("features contain a zero-norm row")
        f.setflags(write=False)
        object.__setattr__(self, "features", f)

    @property
    def length(self) -> int:
        return self.features.shape[0]

    @classmethod
    def from_tube(cls, tube: Tube) -> "MinedTube":
        if any(r.feature is None for r in tube.records):
            raise ValidationError(
                f"tube {tube.slot_id} carries no embeddings; write the tube "
                "file with embeddings included")
        return cls(features=np.stack([r.feature for r in tube.records]),
                   boxes=[r.box for r in tube.records])


@dataclass(frozen=True)
class LossWeights:
    w_temp: float = 2.0
    w_feat: float = 1.0

    def __post_init__(self):
        for name in ("w_temp", "w_feat"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValidationError(f"{name} must be finite and nonnegative, got {v}")


@dataclass(frozen=True)
class Gradients:
    d_features: np.ndarray  # (T, D), gradient of the feature loss
    d_boxes: np.ndarray     # (T, 4), gradient of the geometry loss, corner order


@dataclass(frozen=True)
class GradCheckReport:
    max_rel_error: float
    max_abs_analytic: float
    max_abs_numeric: float
    skipped_kink_coords: int
    step: float


# Floor for the relative-error denominator.  Components below this magnitude
# are compared absolutely at this scale: central differences carry roundoff
# of about 1e-10 at h = 1e-6, which would swamp a plain relative error on
# near-zero components while a genuine formula error still shows up well
# above any sensible tolerance.
_REL_GUARD = 1e-3


def feature_loss(tube: MinedTube) -> float:
    return _feature_loss_raw(tube.features)


def geom_loss(tube: MinedTube) -> float:
    # Deliberately the same accumulation as the mining temporal cost, so the
    # two agree bit for bit on the same boxes.
    n = len(tube.boxes)
    acc = 0.0
    for a, b in zip(tube.boxes, tube.boxes[1:]):
        acc += 1.0 - giou(a, b)
    return acc / (n - 1)


def combined_loss(tube: MinedTube, weights: LossWeights | None = None) -> float:
    """w_temp * geometry loss + w_feat * feature loss."""
    if weights is None:
        weights = LossWeights()
    return weights.w_temp * geom_loss(tube) + weights.w_feat * feature_loss(tube)


def _feature_loss_raw(f: np.ndarray) -> float:
    acc = 0.0
    for t in range(f.shape[0] - 1):
        u, v = f[t], f[t + 1]
        acc += 1.0 - float(np.dot(u, v)) / (float(np.linalg.norm(u)) * float(np.linalg.norm(v)))
    return acc / (f.shape[0] - 1)


def _geom_loss_raw(b: np.ndarray) -> float:
    # Unvalidated corner arithmetic, used for finite differencing only.
    acc = 0.0
    for t in range(b.shape[0] - 1):
        acc += 1.0 - _giou_raw(b[t], b[t + 1])
    return acc / (b.shape[0] - 1)


def _giou_raw(a, b) -> float:
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    inter = iw * ih if (iw > 0.0 and ih > 0.0) else 0.0
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    u = area_a + area_b - inter
    c = (max(a[2], b[2]) - min(a[0], b[0])) * (max(a[3], b[3]) - min(a[1], b[1]))
    return inter / u - (c - u) / c


def _pair_is_identical(a, b) -> bool:
    return a[0] == b[0] and a[1] == b[1] and a[2] == b[2] and a[3] == b[3]


def _check_pair_smooth(a, b, t: int) -> None:
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    if iw <= 0.0 or ih <= 0.0:
        raise NonSmoothError(
            f"non-smooth point: boxes at frames {t} and {t + 1} touch or do not overlap")
    if a[0] == b[0] or a[1] == b[1] or a[2] == b[2] or a[3] == b[3]:
        raise NonSmoothError(
            f"non-smooth point: boxes at frames {t} and {t + 1} share a coordinate")


def _giou_pair_grads(a, b) -> tuple[np.ndarray, np.ndarray]:
    """d giou / d corners for a strictly overlapping, untied pair.

    With I the intersection, U the union and C the enclosing area,
    giou = I/U - 1 + U/C, so

        d giou = (I' U - I U') / U^2 + (U' C - U C') / C^2 .

    Each of I, U, C is bilinear in whichever corner the min/max picks, which
    is why tied coordinates have no derivative.
    """
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    inter = iw * ih
    wa, ha = a[2] - a[0], a[3] - a[1]
    wb, hb = b[2] - b[0], b[3] - b[1]
    u = wa * ha + wb * hb - inter
    cw = max(a[2], b[2]) - min(a[0], b[0])
    ch = max(a[3], b[3]) - min(a[1], b[1])
    c = cw * ch

    di_a = np.array([
        -ih if a[0] > b[0] else 0.0,
        -iw if a[1] > b[1] else 0.0,
        ih if a[2] < b[2] else 0.0,
        iw if a[3] < b[3] else 0.0,
    ])
    di_b = np.array([
        -ih if b[0] > a[0] else 0.0,
        -iw if b[1] > a[1] else 0.0,
        ih if b[2] < a[2] else 0.0,
        iw if b[3] < a[3] else 0.0,
    ])
    darea_a = np.array([-ha, -wa, ha, wa])
    darea_b = np.array([-hb, -wb, hb, wb])
    du_a = darea_a - di_a
    du_b = darea_b - di_b
    dc_a = np.array([
        -ch if a[0] < b[0] else 0.0,
        -cw if a[1] < b[1] else 0.0,
        ch if a[2] > b[2] else 0.0,
        cw if a[3] > b[3] else 0.0,
    ])
    dc_b = np.array([
        -ch if b[0] < a[0] else 0.0,
        -cw if b[1] < a[1] else 0.0,
        ch if b[2] > a[2] else 0.0,
        cw if b[3] > a[3] else 0.0,
    ])

    dg_a = (di_a * u - inter * du_a) / (u * u) + (du_a * c - u * dc_a) / (c * c)
    dg_b = (di_b * u - inter * du_b) / (u * u) + (du_b * c - u * dc_b) / (c * c)
    return dg_a, dg_b


def _cos_pair_grads(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """d cos(u, v) / du and / dv.  Each gradient is orthogonal to its own
    vector: grad_u = v/(|u||v|) - cos * u/|u|^2, and u . grad_u = 0."""
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    cos = float(np.dot(u, v)) / (nu * nv)
    gu = v / (nu * nv) - cos * u / (nu * nu)
    gv = u / (nu * nv) - cos * v / (nv * nv)
    return gu, gv


def _identical_pair_mask(boxes: np.ndarray) -> np.ndarray:
    """Per-box flag: box belongs to at least one exactly identical adjacent
    pair (the kink special case)."""
    n = boxes.shape[0]
    mask = np.zeros(n, dtype=bool)
    for t in range(n - 1):
        if _pair_is_identical(boxes[t], boxes[t + 1]):
            mask[t] = True
            mask[t + 1] = True
    return mask


def loss_gradients(tube: MinedTube) -> Gradients:
    """Analytic gradients of both losses.

    Raises NonSmoothError when any consecutive box pair sits at a kink of the
    geometry loss, except exactly identical pairs, whose contribution is zero
    by the flat-minimum convention described in the module docstring.
    """
    f = tube.features
    n = f.shape[0]
    scale = 1.0 / (n - 1)

    d_features = np.zeros_like(f)
    for t in range(n - 1):
        gu, gv = _cos_pair_grads(f[t], f[t + 1])
        d_features[t] -= scale * gu
        d_features[t + 1] -= scale * gv

    boxes = np.array([b.to_list() for b in tube.boxes], dtype=float)
    d_boxes = np.zeros((n, 4), dtype=float)
    for t in range(n - 1):
        a, b = boxes[t], boxes[t + 1]
        if _pair_is_identical(a, b):
            continue
        _check_pair_smooth(a, b, t)
        dg_a, dg_b = _giou_pair_grads(a, b)
        d_boxes[t] -= scale * dg_a
        d_boxes[t + 1] -= scale * dg_b
    return Gradients(d_features=d_features, d_boxes=d_boxes)


def grad_check(tube: MinedTube, h: float = 1e-6) -> GradCheckReport:
    """Compare analytic gradients against central finite differences.

    Every feature component is checked.  Box coordinates are checked unless
    the box belongs to an exactly identical adjacent pair: the loss has a
    symmetric kink there, central differences do not estimate a derivative at
    a kink, and those coordinates are counted in skipped_kink_coords instead.
    Relative error floors its denominator at 1e-3, so components near
    zero are compared absolutely at that scale.
    """
    if not (np.isfinite(h) and h > 0):
        raise ValidationError(f"step must be positive and finite, got {h}")
    grads = loss_gradients(tube)
    f = np.array(tube.features, dtype=float)
    boxes = np.array([b.to_list() for b in tube.boxes], dtype=float)

    max_rel = 0.0
    max_abs_num = 0.0
    for t in range(f.shape[0]):
        for d in range(f.shape[1]):
            orig = f[t, d]
            f[t, d] = orig + h
            hi = _feature_loss_raw(f)
            f[t, d] = orig - h
            lo = _feature_loss_raw(f)
            f[t, d] = orig
            num = (hi - lo) / (2.0 * h)
            ana = grads.d_features[t, d]
            max_abs_num = max(max_abs_num, abs(num))
            max_rel = max(max_rel, abs(ana - num) / max(abs(ana), abs(num), _REL_GUARD))

    kinked = _identical_pair_mask(boxes)
    skipped = 0
    for t in range(boxes.shape[0]):
        if kinked[t]:
            skipped += 4
            continue
        for k in range(4):
            orig = boxes[t, k]
            boxes[t, k] = orig + h
            hi = _geom_loss_raw(boxes)
            boxes[t, k] = orig - h
            lo = _geom_loss_raw(boxes)
            boxes[t, k] = orig
            num = (hi - lo) / (2.0 * h)
            ana = grads.d_boxes[t, k]
            max_abs_num = max(max_abs_num, abs(num))
            max_rel = max(max_rel, abs(ana - num) / max(abs(ana), abs(num), _REL_GUARD))

    max_abs_ana = max(float(np.max(np.abs(grads.d_features))),
                      float(np.max(np.abs(grads.d_boxes))))
    return GradCheckReport(max_rel_error=max_rel,
                           max_abs_analytic=max_abs_ana,
                           max_abs_numeric=max_abs_num,
                           skipped_kink_coords=skipped,
                           step=h)
