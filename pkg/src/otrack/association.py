"""Cost construction and optimal bipartite matching between tracklets and
detections.

Costs blend appearance (1 - cosine) and motion (1 - IoU); entries failing a
gate become +inf and can never be matched. ``solve`` returns the minimum-cost
assignment over finite entries: infeasible pairs are padded with a constant
large enough that the solver first maximizes the number of finite matches,
then minimizes their total cost.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .geometry import BBox, iou

DEFAULT_LAMBDA = 0.6
DEFAULT_IOU_GATE = 0.1
DEFAULT_COS_GATE = 0.3

# dominates any achievable finite total (finite costs live in [0, 2])
_GATED = np.inf
_BIG = 1.0e9


def cosine_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarity between rows of a (n, d) and b (m, d)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size and b.size and a.shape[1] != b.shape[1]:
        raise ValueError(f"feature dimension mismatch {a.shape[1]} vs {b.shape[1]}")
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros((a.shape[0], b.shape[0]))
    an = a / np.maximum(np.linalg.norm(a, axis=1, keepdims=True), 1e-12)
    bn = b / np.maximum(np.linalg.norm(b, axis=1, keepdims=True), 1e-12)
    return an @ bn.T


def build_cost(
    track_boxes: Sequence[BBox],
    track_features: np.ndarray,
    track_is_lost: Sequence[bool],
    det_boxes: Sequence[BBox],
    det_features: np.ndarray,
    lam: float = DEFAULT_LAMBDA,
    iou_gate: float = DEFAULT_IOU_GATE,
    cos_gate: float = DEFAULT_COS_GATE,
) -> np.ndarray:
    """Tracklet x detection cost matrix.

    cost = lam * (1 - cosine) + (1 - lam) * (1 - IoU of predicted vs detected
    box). The IoU gate applies only to tracklets that are currently tracked;
    lost tracklets may re-associate on appearance alone. The cosine gate
    applies everywhere (set it <= -1 to disable when running without
    appearance features).
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must be in [0, 1]")
    n, m = len(track_boxes), len(det_boxes)
    cost = np.zeros((n, m), dtype=np.float64)
    if n == 0 or m == 0:
        return cost
    cos = cosine_matrix(track_features, det_features)
    for i in range(n):
        for j in range(m):
            ov = iou(track_boxes[i], det_boxes[j])
            c = cos[i, j]
            if c < cos_gate or (not track_is_lost[i] and ov < iou_gate):
                cost[i, j] = _GATED
            else:
                cost[i, j] = lam * (1.0 - c) + (1.0 - lam) * (1.0 - ov)
    return cost


def solve(cost: np.ndarray) -> Tuple[List[Tuple[int, int]], List[int], List[int]]:
    """Optimal assignment over the finite entries of a rectangular cost
    matrix.

    Returns (matches, unmatched_rows, unmatched_cols); the three index sets
    partition rows and columns, matches are sorted by (row, col) and never use
    a gated entry.
    """
    cost = np.asarray(cost, dtype=np.float64)
    n, m = cost.shape if cost.ndim == 2 else (0, 0)
    if n == 0 or m == 0:
        return [], list(range(n)), list(range(m))
    finite = np.isfinite(cost)
    work = np.where(finite, cost, _BIG)
    rows, cols = linear_sum_assignment(work)
    matches = sorted((int(r), int(c)) for r, c in zip(rows, cols) if finite[r, c])
    matched_rows = {r for r, _ in matches}
    matched_cols = {c for _, c in matches}
    unmatched_rows = [r for r in range(n) if r not in matched_rows]
    unmatched_cols = [c for c in range(m) if c not in matched_cols]
    return matches, unmatched_rows, unmatched_cols
