"""Box geometry: intersection, occlusion validity, Gaussian scoring and
closed-form recovery of a lost box from an occluder plus occlusion center.

Boxes are axis-aligned (x_l, y_t, x_r, y_b) in continuous image coordinates
with y growing downward. Boxes are half-open: width = x_r - x_l with no +1
pixel convention, which keeps the recovery algebra exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

DEFAULT_OCCLUSION_TAU = 0.7


@dataclass(frozen=True)
class BBox:
    x_l: float
    y_t: float
    x_r: float
    y_b: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x_l, self.y_t, self.x_r, self.y_b)):
            raise ValueError("box coordinates must be finite")
        if self.x_l > self.x_r or self.y_t > self.y_b:
            raise ValueError(f"malformed box {(self.x_l, self.y_t, self.x_r, self.y_b)}")

    @property
    def width(self) -> float:
        return self.x_r - self.x_l

    @property
    def height(self) -> float:
        return self.y_b - self.y_t

    @property
    def center(self) -> "Point2":
        return Point2((self.x_l + self.x_r) / 2.0, (self.y_t + self.y_b) / 2.0)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.x_l, self.y_t, self.x_r, self.y_b)


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("point coordinates must be finite")


@dataclass(frozen=True)
class OcclusionEvent:
    region: BBox
    center: Point2
    source_pair: Tuple[int, int]


def area(b: BBox) -> float:
    return b.width * b.height


def intersect(a: BBox, b: BBox) -> Optional[BBox]:
    """Coordinate-wise max/min intersection; None when there is no positive
    area on both axes (disjoint or merely touching boxes)."""
    x_l = max(a.x_l, b.x_l)
    y_t = max(a.y_t, b.y_t)
    x_r = min(a.x_r, b.x_r)
    y_b = min(a.y_b, b.y_b)
    if x_r <= x_l or y_b <= y_t:
        return None
    return BBox(x_l, y_t, x_r, y_b)


def iou(a: BBox, b: BBox) -> float:
    o = intersect(a, b)
    if o is None:
        return 0.0
    inter = area(o)
    union = area(a) + area(b) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def occlusion_valid(
    a: BBox, b: BBox, tau: float = DEFAULT_OCCLUSION_TAU, source_pair: Tuple[int, int] = (0, 1)
) -> Optional[OcclusionEvent]:
    """Valid occlusion event iff the overlap covers strictly more than ``tau``
    of the smaller box. Degenerate zero-area boxes never produce one (simulated
    detectors can emit slivers, so this is tolerated rather than an error)."""
    if not 0.0 < tau <= 1.0:
        raise ValueError("tau must be in (0, 1]")
    region = intersect(a, b)
    if region is None:
        return None
    smaller = min(area(a), area(b))
    if smaller <= 0.0:
        return None
    if area(region) / smaller <= tau:
        return None
    return OcclusionEvent(region=region, center=region.center, source_pair=source_pair)


def gaussian_radius(height: float, width: float, min_overlap: float = 0.7) -> float:
    """Largest displacement of a height x width box that still leaves IoU >=
    ``min_overlap`` with the original placement (the usual keypoint-heatmap
    radius rule): the tightest of the three quadratic cases."""
    a1 = 1.0
    b1 = height + width
    c1 = width * height * (1 - min_overlap) / (1 + min_overlap)
    r1 = (b1 - math.sqrt(max(b1 * b1 - 4 * a1 * c1, 0.0))) / (2 * a1)

    a2 = 4.0
    b2 = 2 * (height + width)
    c2 = (1 - min_overlap) * width * height
    r2 = (b2 - math.sqrt(max(b2 * b2 - 4 * a2 * c2, 0.0))) / (2 * a2)

    a3 = 4.0 * min_overlap
    b3 = -2 * min_overlap * (height + width)
    c3 = (min_overlap - 1) * width * height
    r3 = (b3 + math.sqrt(max(b3 * b3 - 4 * a3 * c3, 0.0))) / (2 * a3)
    return max(min(r1, r2, r3), 0.0)


def gaussian_sigma(
    region: BBox, stride: float = 1.0, min_overlap: float = 0.7, sigma_min: float = 1.0
) -> float:
    """Kernel std for a region, in heatmap cells: radius/3 floored at
    ``sigma_min`` so tiny overlaps never degenerate to zero-width kernels."""
    r = gaussian_radius(region.height / stride, region.width / stride, min_overlap)
    return max(r / 3.0, sigma_min)


def gaussian_score(
    region: BBox,
    query: Point2,
    stride: float = 1.0,
    min_overlap: float = 0.7,
    sigma_min: float = 1.0,
    sigma: Optional[float] = None,
    quantize: bool = True,
) -> float:
    """Gaussian kernel of ``region`` evaluated at ``query`` (both in units of
    ``stride`` cells).

    With ``quantize=True`` the kernel is centered on the quantized cell
    floor(center/stride), matching heatmap rendering; score is exactly 1 when
    the query equals that cell. With ``quantize=False`` the kernel keeps the
    continuous center, which is the form used when scoring predicted occlusion
    centers against an overlap region at stride 1.
    """
    if stride < 1.0:
        raise ValueError("stride must be >= 1")
    c = region.center
    cx = c.x / stride
    cy = c.y / stride
    if quantize:
        cx = math.floor(cx)
        cy = math.floor(cy)
    s = gaussian_sigma(region, stride, min_overlap, sigma_min) if sigma is None else sigma
    d2 = (query.x - cx) ** 2 + (query.y - cy) ** 2
    return math.exp(-d2 / (2.0 * s * s))


def recover_coordinate(a1: float, a2: float, b1: float, b2: float, z: float) -> float:
    """Recover the low edge of interval (a1, a2) from the overlapping interval
    (b1, b2) and the overlap-center coordinate z.

    The branch is selected from the relative placement of the two intervals;
    when z really is the overlap midpoint the result is exactly a1. The final
    branch (b contained in a on this axis) has no usable constraint and
    returns the predicted a1 itself.
    """
    if a1 > a2 or b1 > b2:
        raise ValueError("intervals must be ordered")
    if a1 <= b1 and a2 <= b2:
        return 2.0 * z - b1 - (a2 - a1)
    if a1 > b1 and a2 <= b2:
        return z - (a2 - a1) / 2.0
    if a1 > b1 and a2 > b2:
        return 2.0 * z - b2
    return a1


def recover_box(predicted: BBox, neighbor: BBox, occ_center: Point2) -> BBox:
    """Reconstruct a lost object's box from its motion-predicted box, the
    occluding neighbor's box and the occlusion-center point. Width and height
    are taken from the predicted box; the top-left corner is recovered per
    axis with :func:`recover_coordinate`."""
    x_l = recover_coordinate(predicted.x_l, predicted.x_r, neighbor.x_l, neighbor.x_r, occ_center.x)
    y_t = recover_coordinate(predicted.y_t, predicted.y_b, neighbor.y_t, neighbor.y_b, occ_center.y)
    return BBox(x_l, y_t, x_l + predicted.width, y_t + predicted.height)
