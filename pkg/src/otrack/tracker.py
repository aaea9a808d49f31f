"""Online tracking state machine over per-frame detections, features and
predicted occlusion centers.

Each frame: predict every tracklet's box, assign detections to tracklets,
update matched tracklets, spawn tracklets from confident unmatched detections,
then try to recover each unmatched tracklet from an occluding detection plus a
nearby occlusion center. A successfully recovered box is emitted (and fed to
the motion filter with inflated noise); otherwise the tracklet's lost counter
grows and its predicted box is cached without being emitted. Tracklets lost
longer than the time window are dropped and their ids are never reused.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import association, kalman
from .geometry import BBox, Point2, gaussian_score, intersect, recover_box

STATUS_TRACKED = "tracked"
STATUS_LOST = "lost"

PROVENANCE_DETECTED = "detected"
PROVENANCE_REFOUND = "refound"

REFIND_NOISE_SCALE = 4.0


@dataclass
class TrackerConfig:
    time_window: int = 30  # frames a tracklet may stay lost before dropping
    tau_o: float = 0.7  # refind acceptance threshold on the Gaussian score
    lam: float = association.DEFAULT_LAMBDA
    iou_gate: float = association.DEFAULT_IOU_GATE
    cos_gate: float = association.DEFAULT_COS_GATE
    spawn_conf: float = 0.5  # detection confidence needed to start a tracklet
    smooth_alpha: float = 0.9
    refind: bool = True
    reset_lost_on_refind: bool = False  # pseudocode leaves the counter as-is
    stride: int = 4  # cell size used when scoring occlusion centers
    sigma_min: float = 1.0
    use_appearance: bool = True


@dataclass
class Tracklet:
    box: BBox
    obj_id: int
    lost_count: int
    center: Point2
    feature: Optional[np.ndarray]
    kalman: kalman.KalmanState
    status: str = STATUS_TRACKED
    predicted_box: Optional[BBox] = None


@dataclass
class TrackerState:
    config: TrackerConfig = field(default_factory=TrackerConfig)
    tracklets: List[Tracklet] = field(default_factory=list)
    next_id: int = 1


@dataclass
class FrameInput:
    detections: List[Tuple[BBox, float, Point2]]  # (box, confidence, center)
    features: Optional[np.ndarray]  # (n_det, D) aligned with detections
    occlusion_centers: List[Tuple[Point2, float]]


@dataclass
class FrameOutput:
    results: List[Tuple[BBox, int, str]]  # (box, id, provenance)


def smooth_feature(old: Optional[np.ndarray], new: np.ndarray, alpha: float) -> np.ndarray:
    """Exponential moving average of appearance, renormalized to unit norm.
    Keeps the old feature if the blend degenerates to zero."""
    new = np.asarray(new, dtype=np.float64)
    n = np.linalg.norm(new)
    unit_new = new / n if n > 1e-12 else new
    if old is None:
        return unit_new
    blended = alpha * old + (1.0 - alpha) * unit_new
    norm = np.linalg.norm(blended)
    if norm < 1e-12:
        return old
    return blended / norm


def refind(
    predicted: BBox,
    det_boxes: Sequence[BBox],
    occ_centers: Sequence[Point2],
    tau_o: float,
    stride: int = 4,
    sigma_min: float = 1.0,
) -> Optional[BBox]:
    """Recover a lost object's box from the best (occluding detection,
    occlusion center) pair.

    Candidates are detections overlapping the predicted box; each candidate
    region is scored against every center with the continuous Gaussian kernel
    in heatmap-cell units. The best pair wins if its score strictly exceeds
    ``tau_o``."""
    best_score = -1.0
    best: Optional[Tuple[BBox, Point2]] = None
    for db in det_boxes:
        region = intersect(predicted, db)
        if region is None:
            continue
        for pc in occ_centers:
            q = Point2(pc.x / stride, pc.y / stride)
            s = gaussian_score(region, q, stride=stride, sigma_min=sigma_min, quantize=False)
            if s > best_score:
                best_score = s
                best = (db, pc)
    if best is None or best_score <= tau_o:
        return None
    neighbor, center = best
    return recover_box(predicted, neighbor, center)


def step(state: TrackerState, frame: FrameInput) -> Tuple[TrackerState, FrameOutput]:
    """Advance the tracker one frame; returns the new state and the emitted
    boxes. The input state is not mutated."""
    cfg = state.config
    n_det = len(frame.detections)
    if frame.features is not None and frame.features.shape[0] != n_det:
        raise ValueError(
            f"feature rows ({frame.features.shape[0]}) do not match detections ({n_det})"
        )

    tracklets = [replace(t) for t in state.tracklets]
    next_id = state.next_id
    results: List[Tuple[BBox, int, str]] = []

    for t in tracklets:
        t.kalman, t.predicted_box = kalman.predict(t.kalman)

    det_boxes = [d[0] for d in frame.detections]
    use_feats = (
        cfg.use_appearance
        and frame.features is not None
        and n_det > 0
        and all(t.feature is not None for t in tracklets)
    )
    if tracklets and n_det:
        if use_feats:
            track_feats = np.vstack([t.feature for t in tracklets])
            det_feats = frame.features
            lam, cos_gate = cfg.lam, cfg.cos_gate
        else:
            dim = 1
            track_feats = np.ones((len(tracklets), dim))
            det_feats = np.ones((n_det, dim))
            lam, cos_gate = 0.0, -2.0  # motion-only association
        cost = association.build_cost(
            [t.predicted_box for t in tracklets],
            track_feats,
            [t.status == STATUS_LOST for t in tracklets],
            det_boxes,
            det_feats,
            lam=lam,
            iou_gate=cfg.iou_gate,
            cos_gate=cos_gate,
        )
        matches, unmatched_tracks, unmatched_dets = association.solve(cost)
    else:
        matches = []
        unmatched_tracks = list(range(len(tracklets)))
        unmatched_dets = list(range(n_det))

    survivors: List[Tracklet] = []

    for ti, dj in matches:
        t = tracklets[ti]
        box, _conf, center = frame.detections[dj]
        t.kalman = kalman.update(t.kalman, box)
        t.box = box
        t.center = center
        t.lost_count = 0
        t.status = STATUS_TRACKED
        if use_feats:
            t.feature = smooth_feature(t.feature, frame.features[dj], cfg.smooth_alpha)
        survivors.append(t)
        results.append((box, t.obj_id, PROVENANCE_DETECTED))

    for dj in unmatched_dets:
        box, conf, center = frame.detections[dj]
        if conf < cfg.spawn_conf:
            continue
        feature = None
        if frame.features is not None:
            feature = smooth_feature(None, frame.features[dj], cfg.smooth_alpha)
        t = Tracklet(
            box=box,
            obj_id=next_id,
            lost_count=0,
            center=center,
            feature=feature,
            kalman=kalman.init(box),
            status=STATUS_TRACKED,
        )
        next_id += 1
        survivors.append(t)
        results.append((box, t.obj_id, PROVENANCE_DETECTED))

    occ_points = [p for p, _score in frame.occlusion_centers]
    for ti in sorted(unmatched_tracks, key=lambda i: tracklets[i].obj_id):
        t = tracklets[ti]
        if t.lost_count >= cfg.time_window:
            continue  # dropped; its id is retired
        recovered = None
        if cfg.refind:
            recovered = refind(
                t.predicted_box, det_boxes, occ_points, cfg.tau_o,
                stride=cfg.stride, sigma_min=cfg.sigma_min,
            )
        if recovered is not None:
            t.kalman = kalman.update(t.kalman, recovered, noise_scale=REFIND_NOISE_SCALE)
            t.box = recovered
            t.center = recovered.center
            t.status = STATUS_TRACKED
            if cfg.reset_lost_on_refind:
                t.lost_count = 0
            survivors.append(t)
            results.append((recovered, t.obj_id, PROVENANCE_REFOUND))
        else:
            t.lost_count += 1
            t.box = t.predicted_box
            t.center = t.predicted_box.center
            t.status = STATUS_LOST
            survivors.append(t)

    new_state = TrackerState(config=cfg, tracklets=survivors, next_id=next_id)
    return new_state, FrameOutput(results=results)
