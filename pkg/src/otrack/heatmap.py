"""Occlusion-center heatmaps: ground-truth rendering, the focal/L1 training
losses and peak decoding back to image-space center points.

Grids are stored as (rows, cols) = (ceil(H/stride), ceil(W/stride)) numpy
arrays indexed [y, x]. Cell (x, y) of a heatmap covers image pixels
[x*stride, (x+1)*stride) x [y*stride, (y+1)*stride).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .geometry import BBox, OcclusionEvent, Point2, gaussian_sigma, occlusion_valid

PRED_CLAMP_EPS = 1e-7
DEFAULT_SCORE_THRESHOLD = 0.3
DEFAULT_MAX_PEAKS = 128


@dataclass
class Heatmap:
    values: np.ndarray  # (rows, cols) float64 in [0, 1]
    stride: int

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass
class OffsetMap:
    offsets: np.ndarray  # (rows, cols, 2), channels (dx, dy) in [0, 1)
    mask: np.ndarray  # (rows, cols) bool, True only at supervised center cells
    stride: int


@dataclass(frozen=True)
class FocalParams:
    alpha: float = 2.0
    beta: float = 4.0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("focal exponents must be positive")


def grid_shape(image_size: Tuple[float, float], stride: int) -> Tuple[int, int]:
    w, h = image_size
    return (int(math.ceil(h / stride)), int(math.ceil(w / stride)))


def valid_occlusions(boxes: Sequence[BBox], tau: float) -> List[OcclusionEvent]:
    """Valid occlusion events over unordered box pairs i < j."""
    events = []
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            ev = occlusion_valid(boxes[i], boxes[j], tau, source_pair=(i, j))
            if ev is not None:
                events.append(ev)
    return events


def render_targets(
    boxes: Sequence[BBox],
    tau: float,
    image_size: Tuple[float, float],
    stride: int,
    min_overlap: float = 0.7,
    sigma_min: float = 1.0,
) -> Tuple[Heatmap, OffsetMap, int]:
    """Ground-truth heatmap/offset targets for one frame.

    The heatmap is the cell-wise max of one Gaussian kernel per valid
    occlusion, each centered on the quantized center cell. Offsets hold the
    sub-cell fraction of the true center and are supervised only at center
    cells. Returns (heatmap, offsets, number of valid occlusions).
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    rows, cols = grid_shape(image_size, stride)
    values = np.zeros((rows, cols), dtype=np.float64)
    offsets = np.zeros((rows, cols, 2), dtype=np.float64)
    mask = np.zeros((rows, cols), dtype=bool)

    events = valid_occlusions(boxes, tau)
    # sort by intrinsic geometry so the rendered result is independent of the
    # input box ordering even when two centers quantize to the same cell
    events = sorted(events, key=lambda e: (e.center.y, e.center.x, e.region.as_tuple()))

    ys = np.arange(rows, dtype=np.float64)[:, None]
    xs = np.arange(cols, dtype=np.float64)[None, :]
    for ev in events:
        cx = ev.center.x / stride
        cy = ev.center.y / stride
        cell_x = min(int(math.floor(cx)), cols - 1)
        cell_y = min(int(math.floor(cy)), rows - 1)
        sigma = gaussian_sigma(ev.region, stride, min_overlap, sigma_min)
        kernel = np.exp(-((xs - cell_x) ** 2 + (ys - cell_y) ** 2) / (2.0 * sigma * sigma))
        np.maximum(values, kernel, out=values)
        if not mask[cell_y, cell_x]:
            mask[cell_y, cell_x] = True
            offsets[cell_y, cell_x, 0] = cx - math.floor(cx)
            offsets[cell_y, cell_x, 1] = cy - math.floor(cy)

    return Heatmap(values, stride), OffsetMap(offsets, mask, stride), len(events)


def focal_center_loss(target: Heatmap, pred: Heatmap, params: FocalParams = FocalParams()) -> float:
    """Penalty-reduced focal loss between a rendered target and a predicted
    heatmap, summed over all cells. Predictions are clamped away from {0, 1}
    before the logs."""
    y = target.values
    y_hat = np.asarray(pred.values, dtype=np.float64)
    if y.shape != y_hat.shape:
        raise ValueError(f"heatmap shape mismatch {y.shape} vs {y_hat.shape}")
    y_hat = np.clip(y_hat, PRED_CLAMP_EPS, 1.0 - PRED_CLAMP_EPS)
    pos = y == 1.0
    pos_term = -((1.0 - y_hat[pos]) ** params.alpha) * np.log(y_hat[pos])
    neg = ~pos
    neg_term = -((1.0 - y[neg]) ** params.beta) * (y_hat[neg] ** params.alpha) * np.log(1.0 - y_hat[neg])
    return float(pos_term.sum() + neg_term.sum())


def offset_loss(target: OffsetMap, pred: np.ndarray) -> float:
    """L1 loss over both offset channels, restricted to supervised cells."""
    pred = np.asarray(pred, dtype=np.float64)
    if pred.shape != target.offsets.shape:
        raise ValueError(f"offset shape mismatch {pred.shape} vs {target.offsets.shape}")
    if not target.mask.any():
        return 0.0
    diff = np.abs(pred[target.mask] - target.offsets[target.mask])
    return float(diff.sum())


def occlusion_loss(center_loss: float, off_loss: float, valid_count: int) -> float:
    """Per-frame occlusion loss: (center + offset) normalized by the number of
    valid occlusions, with the empty-frame denominator clamped to one."""
    if center_loss < 0 or off_loss < 0:
        raise ValueError("losses must be non-negative")
    return (center_loss + off_loss) / max(1, valid_count)


def mean_occlusion_loss(per_frame: Sequence[float]) -> float:
    """Batch-mean reduction over per-frame occlusion losses."""
    if not per_frame:
        return 0.0
    return float(sum(per_frame) / len(per_frame))


def decode_peaks(
    pred: Heatmap,
    offsets: Optional[np.ndarray] = None,
    score_threshold: float = DEFAULT_SCORE_THRESHOLD,
    max_peaks: int = DEFAULT_MAX_PEAKS,
) -> List[Tuple[Point2, float]]:
    """Strict 3x3 local maxima above ``score_threshold``, best ``max_peaks``
    first. A tie with a neighbor is won by the lower (y, x) cell so plateaus
    decode deterministically. Centers are mapped back to image space as
    stride * (cell + offset); without an offset map the cell midpoint (+0.5)
    is used."""
    if not 0.0 < score_threshold < 1.0:
        raise ValueError("score_threshold must be in (0, 1)")
    v = pred.values
    rows, cols = v.shape
    peaks = []
    for y in range(rows):
        for x in range(cols):
            s = v[y, x]
            if s <= score_threshold:
                continue
            is_peak = True
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    if dx == 0 and dy == 0:
                        continue
                    ny, nx = y + dy, x + dx
                    if not (0 <= ny < rows and 0 <= nx < cols):
                        continue
                    n = v[ny, nx]
                    if n > s or (n == s and (ny, nx) < (y, x)):
                        is_peak = False
                        break
                if not is_peak:
                    break
            if is_peak:
                peaks.append((y, x, s))

    peaks.sort(key=lambda p: (-p[2], p[0], p[1]))
    out = []
    for y, x, s in peaks[:max_peaks]:
        if offsets is not None:
            ox, oy = float(offsets[y, x, 0]), float(offsets[y, x, 1])
        else:
            ox = oy = 0.5
        out.append((Point2(pred.stride * (x + ox), pred.stride * (y + oy)), float(s)))
    return out


def to_pgm(heatmap: Heatmap) -> bytes:
    """Binary 8-bit PGM (P5) of a heatmap, values scaled by 255 and rounded
    half-up."""
    v = np.clip(heatmap.values, 0.0, 1.0)
    bytes_grid = np.floor(v * 255.0 + 0.5).astype(np.uint8)
    header = f"P5\n{heatmap.width} {heatmap.height}\n255\n".encode("ascii")
    return header + bytes_grid.tobytes()
