"""Deterministic synthetic tracking world.

Generates ground-truth trajectories (constant velocity with small acceleration
noise, bouncing at arena walls, optional spawn/despawn), exact per-object
visibility under a fixed depth order, an imperfect detector, appearance
descriptors, and per-frame occlusion events. Everything is driven by the
counter-based RNG so a config + seed reproduces a sequence byte for byte on
any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .geometry import BBox, OcclusionEvent, Point2, area, intersect, occlusion_valid
from .heatmap import decode_peaks, render_targets
from .rng import CounterRng

MC_SAMPLES = 4096
CHANNEL_MODES = ("oracle", "noisy", "rendered")


@dataclass
class SimConfig:
    arena_w: float = 320.0
    arena_h: float = 240.0
    objects: int = 8
    frames: int = 100
    speed_min: float = 1.0
    speed_max: float = 4.0
    accel_std: float = 0.05
    width_min: float = 16.0
    width_max: float = 40.0
    height_min: float = 24.0
    height_max: float = 60.0
    spawn_rate: float = 0.0
    despawn_rate: float = 0.0
    vis_threshold: float = 0.0
    det_noise_std: float = 0.0
    fp_rate: float = 0.0
    descriptor_dim: int = 24
    descriptor_jitter: float = 0.05
    clutter_dim: int = 8
    clutter_scale: float = 0.0
    occl_corruption: float = 0.0
    occlusion_tau: float = 0.7
    channel_mode: str = "oracle"
    channel_noise: float = 0.0
    channel_dropout: float = 0.0
    stride: int = 4
    peak_threshold: float = 0.3  # rendered-mode decoding
    max_peaks: int = 128
    seed: int = 0

    def validate(self):
        if self.arena_w <= 0 or self.arena_h <= 0:
            raise ValueError("arena dimensions must be positive")
        for name in ("spawn_rate", "despawn_rate", "channel_dropout"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.fp_rate < 0.0:
            raise ValueError("fp_rate must be >= 0")
        if self.width_max >= self.arena_w or self.height_max >= self.arena_h:
            raise ValueError("objects larger than the arena are impossible to place")
        if not 0.0 < self.occlusion_tau <= 1.0:
            raise ValueError("occlusion_tau must be in (0, 1]")
        if self.channel_mode not in CHANNEL_MODES:
            raise ValueError(f"channel_mode must be one of {CHANNEL_MODES}")
        if self.frames < 1 or self.objects < 0:
            raise ValueError("need frames >= 1 and objects >= 0")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")


@dataclass
class GtObject:
    obj_id: int
    box: BBox
    depth: int  # larger = nearer the camera
    visibility: float


@dataclass
class Detection:
    box: BBox
    conf: float
    center: Point2


@dataclass
class FrameData:
    gt: List[GtObject]
    detections: List[Detection]
    det_ids: List[int]  # ground-truth id per detection, -1 for false positives
    descriptors: np.ndarray  # (n_det, descriptor_dim + clutter_dim)
    occlusions: List[OcclusionEvent]  # source_pair carries gt object ids


@dataclass
class SyntheticSequence:
    config: SimConfig
    frames: List[FrameData]
    signatures: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def n_frames(self) -> int:
        return len(self.frames)


class _Body:
    __slots__ = ("obj_id", "x", "y", "w", "h", "vx", "vy", "depth")

    def __init__(self, obj_id, x, y, w, h, vx, vy, depth):
        self.obj_id = obj_id
        self.x = x
        self.y = y
        self.w = w
        self.h = h
        self.vx = vx
        self.vy = vy
        self.depth = depth

    def box(self) -> BBox:
        return BBox(self.x, self.y, self.x + self.w, self.y + self.h)


def _occluded_area(box: BBox, fronts: List[BBox], mc_rng: CounterRng) -> float:
    """Area of ``box`` covered by the union of the front boxes. Exact by
    inclusion-exclusion for <= 2 overlapping fronts, Monte-Carlo beyond."""
    regions = []
    for f in fronts:
        r = intersect(box, f)
        if r is not None:
            regions.append(r)
    if not regions:
        return 0.0
    if len(regions) == 1:
        return area(regions[0])
    if len(regions) == 2:
        both = intersect(regions[0], regions[1])
        overlap = area(both) if both is not None else 0.0
        return area(regions[0]) + area(regions[1]) - overlap
    hits = 0
    for _ in range(MC_SAMPLES):
        px = box.x_l + mc_rng.uniform() * box.width
        py = box.y_t + mc_rng.uniform() * box.height
        for r in regions:
            if r.x_l <= px < r.x_r and r.y_t <= py < r.y_b:
                hits += 1
                break
    return area(box) * hits / MC_SAMPLES


def _spawn(cfg: SimConfig, rng: CounterRng, obj_id: int, depth: int) -> _Body:
    w = rng.uniform(cfg.width_min, cfg.width_max)
    h = rng.uniform(cfg.height_min, cfg.height_max)
    x = rng.uniform(0.0, cfg.arena_w - w)
    y = rng.uniform(0.0, cfg.arena_h - h)
    speed = rng.uniform(cfg.speed_min, cfg.speed_max)
    angle = rng.uniform(0.0, 2.0 * math.pi)
    return _Body(obj_id, x, y, w, h, speed * math.cos(angle), speed * math.sin(angle), depth)


def _advance(body: _Body, cfg: SimConfig, rng: CounterRng):
    body.vx += rng.normal(0.0, cfg.accel_std)
    body.vy += rng.normal(0.0, cfg.accel_std)
    body.x += body.vx
    body.y += body.vy
    # reflect at the walls, keeping the box inside the arena
    if body.x < 0.0:
        body.x = -body.x
        body.vx = -body.vx
    if body.x + body.w > cfg.arena_w:
        body.x = 2.0 * (cfg.arena_w - body.w) - body.x
        body.vx = -body.vx
    if body.y < 0.0:
        body.y = -body.y
        body.vy = -body.vy
    if body.y + body.h > cfg.arena_h:
        body.y = 2.0 * (cfg.arena_h - body.h) - body.y
        body.vy = -body.vy
    body.x = min(max(body.x, 0.0), cfg.arena_w - body.w)
    body.y = min(max(body.y, 0.0), cfg.arena_h - body.h)


def _signature(rng: CounterRng, dim: int) -> np.ndarray:
    return np.array(rng.unit_vector(dim))


def _descriptor(
    cfg: SimConfig, rng: CounterRng, signature: np.ndarray, visibility: float
) -> np.ndarray:
    sig = signature + np.array(rng.normals(cfg.descriptor_dim, 0.0, cfg.descriptor_jitter))
    if cfg.occl_corruption > 0.0 and visibility < 1.0:
        sig = sig + np.array(
            rng.normals(cfg.descriptor_dim, 0.0, cfg.occl_corruption * (1.0 - visibility))
        )
    if cfg.clutter_dim > 0:
        clutter = cfg.clutter_scale * np.array(rng.unit_vector(cfg.clutter_dim))
        return np.concatenate([sig, clutter])
    return sig


def _observe_frame(
    cfg: SimConfig,
    t: int,
    objs: List[Tuple[int, BBox, int]],
    rng: CounterRng,
    signatures: Dict[int, np.ndarray],
) -> FrameData:
    """Ground truth, occlusion events, detector output and descriptors for
    one frame of (id, box, depth) objects."""
    desc_dim = cfg.descriptor_dim + cfg.clutter_dim
    gt: List[GtObject] = []
    for obj_id, box, depth in objs:
        fronts = [b for _i, b, d in objs if d > depth]
        mc_rng = rng.split(0x56495300 ^ (t * 1000003 + obj_id))
        occluded = _occluded_area(box, fronts, mc_rng)
        vis = max(0.0, 1.0 - occluded / area(box)) if area(box) > 0 else 0.0
        gt.append(GtObject(obj_id, box, depth, vis))

    occlusions: List[OcclusionEvent] = []
    for i in range(len(gt)):
        for j in range(i + 1, len(gt)):
            ev = occlusion_valid(
                gt[i].box, gt[j].box, cfg.occlusion_tau,
                source_pair=(gt[i].obj_id, gt[j].obj_id),
            )
            if ev is not None:
                occlusions.append(ev)

    detections: List[Detection] = []
    det_ids: List[int] = []
    desc_rows: List[np.ndarray] = []
    for obj in gt:
        if obj.visibility < cfg.vis_threshold:
            continue
        b = obj.box
        if cfg.det_noise_std > 0.0:
            dx = rng.normal(0.0, cfg.det_noise_std)
            dy = rng.normal(0.0, cfg.det_noise_std)
            dw = rng.normal(0.0, cfg.det_noise_std)
            dh = rng.normal(0.0, cfg.det_noise_std)
            w = max(b.width + dw, 1.0)
            h = max(b.height + dh, 1.0)
            b = BBox(b.x_l + dx, b.y_t + dy, b.x_l + dx + w, b.y_t + dy + h)
        conf = min(max(obj.visibility, 0.0), 1.0)
        detections.append(Detection(box=b, conf=conf, center=b.center))
        det_ids.append(obj.obj_id)
        desc_rows.append(_descriptor(cfg, rng, signatures[obj.obj_id], obj.visibility))

    n_fp = rng.poisson(cfg.fp_rate)
    for _ in range(n_fp):
        w = rng.uniform(cfg.width_min, cfg.width_max)
        h = rng.uniform(cfg.height_min, cfg.height_max)
        x = rng.uniform(0.0, cfg.arena_w - w)
        y = rng.uniform(0.0, cfg.arena_h - h)
        b = BBox(x, y, x + w, y + h)
        detections.append(Detection(box=b, conf=rng.uniform(0.1, 1.0), center=b.center))
        det_ids.append(-1)
        fake_sig = _signature(rng, cfg.descriptor_dim)
        desc_rows.append(_descriptor(cfg, rng, fake_sig, 1.0))

    descriptors = (
        np.vstack(desc_rows) if desc_rows else np.zeros((0, desc_dim), dtype=np.float64)
    )
    return FrameData(
        gt=gt,
        detections=detections,
        det_ids=det_ids,
        descriptors=descriptors,
        occlusions=occlusions,
    )


def generate(cfg: SimConfig) -> SyntheticSequence:
    """Generate a full synthetic sequence from a validated config."""
    cfg.validate()
    rng = CounterRng(cfg.seed)

    bodies: List[_Body] = []
    signatures: Dict[int, np.ndarray] = {}
    next_id = 1
    next_depth = 0
    for _ in range(cfg.objects):
        bodies.append(_spawn(cfg, rng, next_id, next_depth))
        signatures[next_id] = _signature(rng, cfg.descriptor_dim)
        next_id += 1
        next_depth += 1

    frames: List[FrameData] = []
    for t in range(cfg.frames):
        if t > 0:
            for body in bodies:
                _advance(body, cfg, rng)
            if cfg.despawn_rate > 0.0:
                bodies = [b for b in bodies if rng.uniform() >= cfg.despawn_rate]
            if cfg.spawn_rate > 0.0 and rng.uniform() < cfg.spawn_rate:
                bodies.append(_spawn(cfg, rng, next_id, next_depth))
                signatures[next_id] = _signature(rng, cfg.descriptor_dim)
                next_id += 1
                next_depth += 1

        bodies.sort(key=lambda b: b.obj_id)
        objs = [(b.obj_id, b.box(), b.depth) for b in bodies]
        frames.append(_observe_frame(cfg, t, objs, rng, signatures))

    return SyntheticSequence(config=cfg, frames=frames, signatures=signatures)


def from_trajectories(
    cfg: SimConfig,
    trajectories: Dict[int, List[Optional[BBox]]],
    depths: Optional[Dict[int, int]] = None,
) -> SyntheticSequence:
    """Sequence from scripted per-frame boxes (None = absent), sharing the
    observation pipeline with :func:`generate`. Depth defaults to object id:
    larger ids occlude smaller ones."""
    if not trajectories:
        raise ValueError("need at least one trajectory")
    n_frames = max(len(v) for v in trajectories.values())
    cfg = replace(cfg, frames=n_frames)
    cfg.validate()
    rng = CounterRng(cfg.seed)
    depths = depths or {obj_id: obj_id for obj_id in trajectories}
    signatures = {
        obj_id: _signature(rng, cfg.descriptor_dim) for obj_id in sorted(trajectories)
    }
    frames: List[FrameData] = []
    for t in range(n_frames):
        objs = []
        for obj_id in sorted(trajectories):
            traj = trajectories[obj_id]
            if t < len(traj) and traj[t] is not None:
                objs.append((obj_id, traj[t], depths[obj_id]))
        frames.append(_observe_frame(cfg, t, objs, rng, signatures))
    return SyntheticSequence(config=cfg, frames=frames, signatures=signatures)


def occlusion_channel(
    seq: SyntheticSequence,
    mode: Optional[str] = None,
    noise: Optional[float] = None,
    dropout: Optional[float] = None,
) -> List[List[Tuple[Point2, float]]]:
    """Per-frame occlusion-center observations.

    oracle: exact centers of the valid ground-truth occlusions.
    noisy: oracle centers with Gaussian jitter and dropout.
    rendered: render the ground-truth heatmap and decode its peaks, exercising
    the full heatmap path.
    """
    cfg = seq.config
    mode = cfg.channel_mode if mode is None else mode
    noise = cfg.channel_noise if noise is None else noise
    dropout = cfg.channel_dropout if dropout is None else dropout
    if mode not in CHANNEL_MODES:
        raise ValueError(f"unknown occlusion channel mode {mode!r}")

    rng = CounterRng(cfg.seed, stream=0x0CC1)
    out: List[List[Tuple[Point2, float]]] = []
    for t, frame in enumerate(seq.frames):
        centers: List[Tuple[Point2, float]] = []
        if mode == "oracle":
            centers = [(ev.center, 1.0) for ev in frame.occlusions]
        elif mode == "noisy":
            for ev in frame.occlusions:
                if rng.uniform() < dropout:
                    continue
                cx = ev.center.x + rng.normal(0.0, noise)
                cy = ev.center.y + rng.normal(0.0, noise)
                centers.append((Point2(cx, cy), 1.0))
        else:  # rendered
            boxes = [g.box for g in frame.gt]
            heat, offsets, _ = render_targets(
                boxes, cfg.occlusion_tau, (cfg.arena_w, cfg.arena_h), cfg.stride
            )
            centers = decode_peaks(
                heat, offsets.offsets, cfg.peak_threshold, cfg.max_peaks
            )
        out.append(centers)
    return out


def config_to_dict(cfg: SimConfig) -> dict:
    return asdict(cfg)
