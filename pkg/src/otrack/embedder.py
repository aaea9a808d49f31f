"""Small trainable embedding (descriptor -> feature) optimized with the
unsupervised re-identification losses.

The model is a one- or two-layer affine map with an optional tanh between
layers; gradients flow from the pair losses through the cosine/softmax chain
into the weights by plain backprop. Training samples positive pairs from
nearby frames of one sequence (or jittered copies of one frame in image mode)
and negative pairs from two different scenes.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .reid import FeatureSet, PairBatch, loss_batch
from .rng import CounterRng
from .simulate import SyntheticSequence

CHECKPOINT_MAGIC = b"OTEM"
CHECKPOINT_VERSION = 1
_ACT_CODES = {"none": 0, "tanh": 1}
_ACT_NAMES = {v: k for k, v in _ACT_CODES.items()}

PAIR_MODES = ("video", "image")


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class EmbedderModel:
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    activation: str = "tanh"  # applied between layers, never after the last

    def __post_init__(self):
        if self.activation not in _ACT_CODES:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not self.weights or len(self.weights) != len(self.biases):
            raise ValueError("weights and biases must align")

    @property
    def d_in(self) -> int:
        return self.weights[0].shape[0]

    @property
    def d_out(self) -> int:
        return self.weights[-1].shape[1]


@dataclass
class TrainConfig:
    lr: float = 0.05
    steps: int = 500
    margin: float = 0.5
    neg_ratio: float = 0.25
    seed: int = 0
    optimizer: str = "sgd"  # "sgd" | "adam"
    placeholder: str = "mean"
    pos_pairs: int = 4  # positive pairs per step
    gap: int = 3
    pair_mode: str = "video"
    image_jitter: float = 0.05

    def validate(self):
        if self.lr < 0:
            raise ValueError("learning rate must be >= 0")
        if self.neg_ratio < 0:
            raise ValueError("neg/pos ratio must be >= 0")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError("optimizer must be sgd or adam")
        if self.pair_mode not in PAIR_MODES:
            raise ValueError("pair_mode must be video or image")
        if self.gap < 1:
            raise ValueError("gap must be >= 1")


@dataclass
class DescriptorPair:
    prev: np.ndarray
    cur: np.ndarray
    kind: str
    prev_ids: List[int] = field(default_factory=list)
    cur_ids: List[int] = field(default_factory=list)


def init_model(d_in: int, d_out: int, hidden: int = 0, seed: int = 0,
               activation: str = "tanh") -> EmbedderModel:
    """Random-normal init scaled by 1/sqrt(fan_in); hidden=0 gives a single
    affine layer."""
    rng = CounterRng(seed, stream=0x1217)
    dims = [d_in, d_out] if hidden <= 0 else [d_in, hidden, d_out]
    weights, biases = [], []
    for a, b in zip(dims[:-1], dims[1:]):
        scale = 1.0 / math.sqrt(a)
        w = np.array(rng.normals(a * b, 0.0, scale)).reshape(a, b)
        weights.append(w)
        biases.append(np.zeros(b))
    return EmbedderModel(weights, biases, activation)


def _forward(model: EmbedderModel, x: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    cache = [x]
    h = x
    last = len(model.weights) - 1
    for k, (w, b) in enumerate(zip(model.weights, model.biases)):
        h = h @ w + b
        if k < last and model.activation == "tanh":
            h = np.tanh(h)
        cache.append(h)
    return h, cache


def _backward(
    model: EmbedderModel, cache: List[np.ndarray], d_out: np.ndarray
) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    grads_w = [np.zeros_like(w) for w in model.weights]
    grads_b = [np.zeros_like(b) for b in model.biases]
    last = len(model.weights) - 1
    g = d_out
    for k in range(last, -1, -1):
        if k < last and model.activation == "tanh":
            # cache[k+1] holds the post-activation output of layer k
            g = g * (1.0 - cache[k + 1] ** 2)
        grads_w[k] = cache[k].T @ g
        grads_b[k] = g.sum(axis=0)
        g = g @ model.weights[k].T
    return grads_w, grads_b


def embed(model: EmbedderModel, descriptors: np.ndarray) -> FeatureSet:
    """One feature row per descriptor row; raises on input width mismatch."""
    x = np.asarray(descriptors, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("descriptors must be (N, D_in)")
    if x.shape[1] != model.d_in:
        raise ValueError(f"descriptor dim {x.shape[1]} does not match model input {model.d_in}")
    out, _ = _forward(model, x)
    return FeatureSet(out)


def make_pairs(
    sequences: Sequence[SyntheticSequence],
    gap: int,
    rng: CounterRng,
    n_pos: int,
    n_neg: int,
    mode: str = "video",
    image_jitter: float = 0.05,
) -> Tuple[List[DescriptorPair], List[DescriptorPair]]:
    """Sample training pairs. Positive pairs come from two frames at most
    ``gap`` apart within one sequence (video mode) or two jittered copies of
    one frame (image mode); negative pairs always come from two distinct
    scenes."""
    if gap < 1:
        raise ValueError("gap must be >= 1")
    if mode not in PAIR_MODES:
        raise ValueError(f"mode must be one of {PAIR_MODES}")
    if mode == "video" and any(s.n_frames < 2 for s in sequences):
        raise ValueError("video-mode pairing needs sequences with at least 2 frames")
    if n_neg > 0 and len(sequences) < 2:
        raise ValueError("negative pairs need at least two scenes")

    def frame_desc(seq, t):
        return seq.frames[t].descriptors, list(seq.frames[t].det_ids)

    positives: List[DescriptorPair] = []
    attempts = 0
    while len(positives) < n_pos and attempts < 50 * max(n_pos, 1):
        attempts += 1
        seq = sequences[rng.integers(0, len(sequences))]
        if mode == "video":
            t = rng.integers(0, seq.n_frames - 1)
            d = rng.integers(1, min(gap, seq.n_frames - 1 - t) + 1)
            prev, prev_ids = frame_desc(seq, t)
            cur, cur_ids = frame_desc(seq, t + d)
        else:
            t = rng.integers(0, seq.n_frames)
            base, base_ids = frame_desc(seq, t)
            if base.shape[0] == 0:
                continue
            jit = lambda: np.array(
                rng.normals(base.size, 0.0, image_jitter)
            ).reshape(base.shape)
            prev, cur = base + jit(), base + jit()
            prev_ids = cur_ids = base_ids
        if prev.shape[0] + cur.shape[0] < 2:
            continue
        positives.append(DescriptorPair(prev, cur, "positive", prev_ids, cur_ids))

    negatives: List[DescriptorPair] = []
    attempts = 0
    while len(negatives) < n_neg and attempts < 50 * max(n_neg, 1):
        attempts += 1
        ia = rng.integers(0, len(sequences))
        ib = rng.integers(0, len(sequences) - 1)
        if ib >= ia:
            ib += 1
        sa, sb = sequences[ia], sequences[ib]
        prev, prev_ids = frame_desc(sa, rng.integers(0, sa.n_frames))
        cur, cur_ids = frame_desc(sb, rng.integers(0, sb.n_frames))
        if prev.shape[0] + cur.shape[0] < 2:
            continue
        negatives.append(DescriptorPair(prev, cur, "negative", prev_ids, cur_ids))

    return positives, negatives


class _Adam:
    def __init__(self, params: List[np.ndarray], lr: float):
        self.lr = lr
        self.b1, self.b2, self.eps = 0.9, 0.999, 1e-8
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: List[np.ndarray], grads: List[np.ndarray]):
        self.t += 1
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.b1 * self.m[i] + (1 - self.b1) * g
            self.v[i] = self.b2 * self.v[i] + (1 - self.b2) * g * g
            m_hat = self.m[i] / (1 - self.b1**self.t)
            v_hat = self.v[i] / (1 - self.b2**self.t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def train(
    model: EmbedderModel,
    sequences: Sequence[SyntheticSequence],
    config: TrainConfig,
) -> Tuple[EmbedderModel, List[float]]:
    """Optimize the embedder on the batch loss; returns the trained model and
    the per-step loss history (length == steps). Deterministic given
    (sequences, config)."""
    config.validate()
    if not sequences:
        raise ValueError("empty dataset")
    rng = CounterRng(config.seed, stream=0x7E41)
    model = EmbedderModel(
        [w.copy() for w in model.weights], [b.copy() for b in model.biases], model.activation
    )
    params = model.weights + model.biases
    adam = _Adam(params, config.lr) if config.optimizer == "adam" else None
    n_neg = int(round(config.pos_pairs * config.neg_ratio))
    if config.neg_ratio >= 1.0:
        import warnings

        warnings.warn("neg/pos ratio >= 1 is known not to converge", stacklevel=2)

    history: List[float] = []
    for step_i in range(config.steps):
        pos_raw, neg_raw = make_pairs(
            sequences, config.gap, rng, config.pos_pairs, n_neg,
            mode=config.pair_mode, image_jitter=config.image_jitter,
        )
        if not pos_raw and not neg_raw:
            raise ValueError("could not sample any training pairs from the dataset")

        pairs: List[PairBatch] = []
        caches = []
        splits = []
        for raw in pos_raw + neg_raw:
            x = np.vstack([raw.prev, raw.cur]) if raw.prev.size and raw.cur.size else (
                raw.prev if raw.prev.size else raw.cur
            )
            out, cache = _forward(model, x)
            n_prev = raw.prev.shape[0]
            pairs.append(
                PairBatch(FeatureSet(out[:n_prev]), FeatureSet(out[n_prev:]), raw.kind)
            )
            caches.append(cache)
            splits.append(n_prev)

        n_pos_actual = len(pos_raw)
        report = loss_batch(
            pairs[:n_pos_actual], pairs[n_pos_actual:], config.margin, config.placeholder
        )
        if not math.isfinite(report.total):
            raise TrainingDiverged(f"non-finite loss {report.total!r} at step {step_i}")
        history.append(report.total)

        grads_w = [np.zeros_like(w) for w in model.weights]
        grads_b = [np.zeros_like(b) for b in model.biases]
        for cache, g_feat in zip(caches, report.gradient):
            gw, gb = _backward(model, cache, g_feat)
            for k in range(len(grads_w)):
                grads_w[k] += gw[k]
                grads_b[k] += gb[k]

        grads = grads_w + grads_b
        if adam is not None:
            adam.step(params, grads)
        else:
            for p, g in zip(params, grads):
                p -= config.lr * g

    return model, history


def matching_accuracy(
    model: EmbedderModel, sequences: Sequence[SyntheticSequence], gap: int = 1
) -> float:
    """Cross-frame top-1 matching accuracy against the simulator's identity
    oracle: for every true detection whose identity also appears ``gap``
    frames later, does its nearest feature in that frame share the identity?"""
    correct = total = 0
    for seq in sequences:
        for t in range(seq.n_frames - gap):
            a, b = seq.frames[t], seq.frames[t + gap]
            if not a.det_ids or not b.det_ids:
                continue
            fa = embed(model, a.descriptors).rows
            fb = embed(model, b.descriptors).rows
            fa = fa / np.maximum(np.linalg.norm(fa, axis=1, keepdims=True), 1e-12)
            fb = fb / np.maximum(np.linalg.norm(fb, axis=1, keepdims=True), 1e-12)
            sim = fa @ fb.T
            ids_b = set(i for i in b.det_ids if i >= 0)
            for i, gid in enumerate(a.det_ids):
                if gid < 0 or gid not in ids_b:
                    continue
                j = int(np.argmax(sim[i]))
                total += 1
                if b.det_ids[j] == gid:
                    correct += 1
    if total == 0:
        return 0.0
    return correct / total


def eval_retrieval(
    model: EmbedderModel, sequences: Sequence[SyntheticSequence]
) -> Tuple[float, float]:
    """Rank-1 accuracy and mean average precision of query-vs-gallery cosine
    retrieval. Each identity's observations are split in half: first part
    queries, rest gallery; single-observation identities join the gallery
    only."""
    per_id: Dict[int, List[np.ndarray]] = {}
    for seq in sequences:
        for frame in seq.frames:
            if not frame.det_ids:
                continue
            feats = embed(model, frame.descriptors).rows
            for i, gid in enumerate(frame.det_ids):
                if gid < 0:
                    continue
                per_id.setdefault(gid, []).append(feats[i])

    queries: List[Tuple[int, np.ndarray]] = []
    gallery: List[Tuple[int, np.ndarray]] = []
    for gid, obs in sorted(per_id.items()):
        if len(obs) < 2:
            gallery.extend((gid, f) for f in obs)
            continue
        half = len(obs) // 2
        queries.extend((gid, f) for f in obs[:half])
        gallery.extend((gid, f) for f in obs[half:])

    if not queries or not gallery:
        return 0.0, 0.0
    q = np.vstack([f for _, f in queries])
    g = np.vstack([f for _, f in gallery])
    q = q / np.maximum(np.linalg.norm(q, axis=1, keepdims=True), 1e-12)
    g = g / np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-12)
    sim = q @ g.T
    g_ids = np.array([gid for gid, _ in gallery])

    r1_hits = 0
    aps = []
    for qi, (gid, _) in enumerate(queries):
        order = np.argsort(-sim[qi], kind="stable")
        ranked = g_ids[order]
        rel = ranked == gid
        if not rel.any():
            continue
        if rel[0]:
            r1_hits += 1
        hits = np.cumsum(rel)
        precision_at = hits / (np.arange(len(rel)) + 1)
        aps.append(float((precision_at * rel).sum() / rel.sum()))
    if not aps:
        return 0.0, 0.0
    return r1_hits / len(aps), float(np.mean(aps))


def save_checkpoint(model: EmbedderModel, path: str):
    """Versioned little-endian binary: magic, version, layer count,
    activation code, then (rows, cols, W row-major, bias) per layer."""
    buf = bytearray()
    buf += CHECKPOINT_MAGIC
    buf += struct.pack("<I", CHECKPOINT_VERSION)
    buf += struct.pack("<I", len(model.weights))
    buf += struct.pack("<I", _ACT_CODES[model.activation])
    for w, b in zip(model.weights, model.biases):
        buf += struct.pack("<II", w.shape[0], w.shape[1])
        buf += np.ascontiguousarray(w, dtype="<f8").tobytes()
        buf += np.ascontiguousarray(b, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(buf))


def load_checkpoint(path: str) -> EmbedderModel:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != CHECKPOINT_MAGIC:
        raise ValueError("not an embedder checkpoint (bad magic)")
    version, n_layers, act = struct.unpack_from("<III", data, 4)
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    off = 16
    weights, biases = [], []
    for _ in range(n_layers):
        rows, cols = struct.unpack_from("<II", data, off)
        off += 8
        w = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=off).reshape(rows, cols)
        off += rows * cols * 8
        b = np.frombuffer(data, dtype="<f8", count=cols, offset=off)
        off += cols * 8
        weights.append(w.copy())
        biases.append(b.copy())
    return EmbedderModel(weights, biases, _ACT_NAMES[act])
