"""Unsupervised re-identification losses over pairs of frames.

Given appearance features for the objects of two frames, a cosine similarity
matrix with an adaptive-temperature row softmax produces a soft assignment
between objects. Three positive-pair terms (intra-frame exclusion, inter-frame
margin, forward/backward cycle consistency) and one negative-pair term are
combined into a batch loss. Every loss returns its analytic gradient with
respect to the raw input features, computed by a hand-rolled reverse pass
through the normalize -> cosine -> softmax chain. Argmax indices in the margin
loss and the placeholder value are treated as constants of the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

# finite stand-in for the -inf diagonal; its softmax mass underflows to 0.0
NEG_SENTINEL = -1.0e4
DEFAULT_MARGIN = 0.5
MIN_ROW_NORM = 1e-12

PLACEHOLDER_MODES = ("mean", "zero", "none")


@dataclass
class FeatureSet:
    rows: np.ndarray  # (N, D) float64

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2:
            raise ValueError("features must be a 2-D (N, D) array")
        if self.rows.shape[0] > 0:
            if not np.isfinite(self.rows).all():
                raise ValueError("non-finite feature entries")
            norms = np.linalg.norm(self.rows, axis=1)
            if np.any(norms < MIN_ROW_NORM):
                raise ValueError("zero-norm feature row")

    @property
    def count(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


@dataclass
class PairBatch:
    prev: FeatureSet
    cur: FeatureSet
    kind: str  # "positive" | "negative"

    def __post_init__(self):
        if self.kind not in ("positive", "negative"):
            raise ValueError(f"unknown pair kind {self.kind!r}")
        if self.prev.count + self.cur.count < 2:
            raise ValueError("a pair needs at least two objects in total")
        if self.prev.count and self.cur.count and self.prev.dim != self.cur.dim:
            raise ValueError("feature dimension mismatch between frames")

    @property
    def n_prev(self) -> int:
        return self.prev.count

    @property
    def n_cur(self) -> int:
        return self.cur.count

    def stacked(self) -> np.ndarray:
        if self.prev.count == 0:
            return self.cur.rows
        if self.cur.count == 0:
            return self.prev.rows
        return np.vstack([self.prev.rows, self.cur.rows])


@dataclass
class SimilarityMatrix:
    square: np.ndarray  # (N, N), diagonal -inf
    placeholder: Optional[float]
    n_prev: int
    n_cur: int

    @property
    def n_total(self) -> int:
        return self.n_prev + self.n_cur

    def padded(self) -> np.ndarray:
        """Effective matrix: the square part plus the placeholder column when
        one is configured."""
        if self.placeholder is None:
            return self.square
        col = np.full((self.n_total, 1), self.placeholder)
        return np.hstack([self.square, col])


@dataclass
class AssignmentMatrix:
    rows: np.ndarray  # (N, C) row-stochastic
    temperature: float
    n_prev: int
    n_cur: int
    has_placeholder: bool

    @property
    def n_total(self) -> int:
        return self.n_prev + self.n_cur


@dataclass
class LossReport:
    intra: float
    inter: float
    cycle: float
    total: float
    gradient: Union[np.ndarray, List[np.ndarray], None]


def similarity(pair: PairBatch, placeholder="mean") -> SimilarityMatrix:
    """Cosine similarity between every pair of objects from both frames.

    The diagonal is a -inf sentinel so nothing assigns to itself. The
    placeholder is the adaptive assign-to-nothing score: the dynamic mean of
    the finite entries ("mean", the default), a fixed 0 ("zero"), absent
    ("none"), or any explicit float. No gradient ever flows through the
    placeholder, so it acts as a per-step constant threshold.
    """
    if not isinstance(placeholder, (int, float)) and placeholder not in PLACEHOLDER_MODES:
        raise ValueError(f"placeholder must be a number or one of {PLACEHOLDER_MODES}")
    x = pair.stacked()
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    u = x / norms
    s = u @ u.T
    np.fill_diagonal(s, -np.inf)
    p: Optional[float]
    if isinstance(placeholder, (int, float)):
        p = float(placeholder)
    elif placeholder == "mean":
        n = s.shape[0]
        if n > 1:
            off_diag = s[~np.eye(n, dtype=bool)]
            p = float(off_diag.mean())
        else:
            p = 0.0
    elif placeholder == "zero":
        p = 0.0
    else:
        p = None
    return SimilarityMatrix(square=s, placeholder=p, n_prev=pair.n_prev, n_cur=pair.n_cur)


def adaptive_temperature(n_columns: int) -> float:
    """T = 2 ln(C + 1) for C columns, so the per-row winner stays equally
    peaked as the number of objects varies."""
    return 2.0 * math.log(n_columns + 1)


def assignment(sim: SimilarityMatrix, temperature: Optional[float] = None) -> AssignmentMatrix:
    """Row-stochastic soft assignment: softmax of T * S' per row, where the
    -inf diagonal is replaced by a large negative sentinel whose mass
    underflows to exactly zero."""
    s = sim.padded().copy()
    s[~np.isfinite(s)] = NEG_SENTINEL
    t = adaptive_temperature(s.shape[1]) if temperature is None else float(temperature)
    z = t * s
    z -= z.max(axis=1, keepdims=True)
    e = np.exp(z)
    m = e / e.sum(axis=1, keepdims=True)
    return AssignmentMatrix(
        rows=m,
        temperature=t,
        n_prev=sim.n_prev,
        n_cur=sim.n_cur,
        has_placeholder=sim.placeholder is not None,
    )


def loss_intra(m: AssignmentMatrix) -> float:
    """Mass wrongly assigned between objects of the same frame: the sum of the
    two same-frame diagonal blocks of the square part."""
    np_, nc = m.n_prev, m.n_cur
    r = m.rows
    return float(r[:np_, :np_].sum() + r[np_ : np_ + nc, np_ : np_ + nc].sum())


def _row_top2(row: np.ndarray) -> Tuple[int, int]:
    j1 = int(np.argmax(row))
    masked = row.copy()
    masked[j1] = -np.inf
    j2 = int(np.argmax(masked))
    return j1, j2


def inter_top2_indices(m: AssignmentMatrix) -> List[Tuple[int, int]]:
    """Per-row (argmax, runner-up) column indices of the margin loss. These
    are the indices treated as constants during gradient computation; they are
    exposed so an external check can pin them."""
    return [_row_top2(m.rows[i]) for i in range(m.rows.shape[0])]


def loss_inter(
    m: AssignmentMatrix,
    margin: float = DEFAULT_MARGIN,
    top2: Optional[Sequence[Tuple[int, int]]] = None,
) -> float:
    """Margin loss pushing each row's best match above the runner-up by
    ``margin``; the placeholder column competes as an ordinary column.
    ``top2`` pins the per-row index pairs instead of recomputing them."""
    if top2 is None:
        top2 = inter_top2_indices(m)
    total = 0.0
    for i, (j1, j2) in enumerate(top2):
        total += max(m.rows[i, j2] + margin - m.rows[i, j1], 0.0)
    return total


def loss_cycle(m: AssignmentMatrix) -> float:
    """Forward/backward consistency: |M[i, j] - M[j, i]| summed over
    current-frame rows i against previous-frame columns j."""
    np_, nc = m.n_prev, m.n_cur
    if np_ == 0 or nc == 0:
        return 0.0
    fwd = m.rows[np_ : np_ + nc, :np_]
    bwd = m.rows[:np_, np_ : np_ + nc]
    return float(np.abs(fwd - bwd.T).sum())


def _softmax_backward(m: np.ndarray, g: np.ndarray, temperature: float) -> np.ndarray:
    """dL/dZ for row softmax M = softmax(Z), then scaled into dL/dS' space."""
    dz = m * (g - (g * m).sum(axis=1, keepdims=True))
    return temperature * dz


def _features_backward(pair: PairBatch, d_square: np.ndarray) -> np.ndarray:
    """Backpropagate a gradient on the (finite part of the) similarity square
    through cosine normalization onto the raw stacked features."""
    x = pair.stacked()
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    u = x / norms
    ds = d_square.copy()
    np.fill_diagonal(ds, 0.0)
    du = (ds + ds.T) @ u
    dx = (du - (du * u).sum(axis=1, keepdims=True) * u) / norms
    return dx


def _positive_grad_on_m(
    m: AssignmentMatrix,
    margin: float,
    top2: Optional[Sequence[Tuple[int, int]]] = None,
) -> Tuple[np.ndarray, float, float, float]:
    """Forward values of the three positive terms plus dL/dM for their
    unnormalized sum."""
    np_, nc = m.n_prev, m.n_cur
    r = m.rows
    g = np.zeros_like(r)

    intra = float(r[:np_, :np_].sum() + r[np_ : np_ + nc, np_ : np_ + nc].sum())
    g[:np_, :np_] += 1.0
    g[np_ : np_ + nc, np_ : np_ + nc] += 1.0

    if top2 is None:
        top2 = inter_top2_indices(m)
    inter = 0.0
    for i, (j1, j2) in enumerate(top2):
        slack = r[i, j2] + margin - r[i, j1]
        if slack > 0.0:
            inter += slack
            g[i, j2] += 1.0
            g[i, j1] -= 1.0

    cycle = 0.0
    if np_ > 0 and nc > 0:
        fwd = r[np_ : np_ + nc, :np_]
        bwd = r[:np_, np_ : np_ + nc]
        diff = fwd - bwd.T
        cycle = float(np.abs(diff).sum())
        sign = np.sign(diff)
        g[np_ : np_ + nc, :np_] += sign
        g[:np_, np_ : np_ + nc] -= sign.T

    return g, intra, inter, cycle


def _pair_backward(pair: PairBatch, m: AssignmentMatrix, g_on_m: np.ndarray) -> np.ndarray:
    n = m.n_total
    d_sprime = _softmax_backward(m.rows, g_on_m, m.temperature)
    # drop the placeholder column: p carries no gradient by design
    d_square = d_sprime[:, :n]
    return _features_backward(pair, d_square)


def loss_positive(
    pair: PairBatch, margin: float = DEFAULT_MARGIN, placeholder="mean",
    temperature: Optional[float] = None,
    top2: Optional[Sequence[Tuple[int, int]]] = None,
) -> LossReport:
    """Positive-pair loss (intra + inter + cycle) / (N_prev + N_cur) with its
    gradient on the stacked input features."""
    if pair.kind != "positive":
        raise ValueError("loss_positive expects a positive pair")
    sim = similarity(pair, placeholder)
    m = assignment(sim, temperature)
    g, intra, inter, cycle = _positive_grad_on_m(m, margin, top2)
    n = m.n_total
    grad = _pair_backward(pair, m, g) / n
    total = (intra + inter + cycle) / n
    return LossReport(intra=intra / n, inter=inter / n, cycle=cycle / n, total=total, gradient=grad)


def loss_negative(
    pair: PairBatch, placeholder="mean", temperature: Optional[float] = None
) -> LossReport:
    """Negative-pair loss: all assignment mass outside the placeholder column
    (everything should be assigned to nothing)."""
    if pair.kind != "negative":
        raise ValueError("loss_negative expects a negative pair")
    sim = similarity(pair, placeholder)
    m = assignment(sim, temperature)
    n = m.n_total
    total = float(m.rows[:, :n].sum())
    g = np.zeros_like(m.rows)
    g[:, :n] = 1.0
    grad = _pair_backward(pair, m, g)
    return LossReport(intra=total, inter=0.0, cycle=0.0, total=total, gradient=grad)


def loss_batch(
    positives: Sequence[PairBatch],
    negatives: Sequence[PairBatch],
    margin: float = DEFAULT_MARGIN,
    placeholder="mean",
) -> LossReport:
    """Batch loss: count-weighted combination of the mean positive and mean
    negative losses. ``gradient`` holds one array per input pair, positives
    first, each already scaled by its batch weight."""
    n_pos, n_neg = len(positives), len(negatives)
    if n_pos + n_neg == 0:
        raise ValueError("empty batch")
    w_pos = n_pos / (n_pos + n_neg)
    w_neg = n_neg / (n_pos + n_neg)

    grads: List[np.ndarray] = []
    pos_total = intra = inter = cycle = 0.0
    for p in positives:
        rep = loss_positive(p, margin, placeholder)
        pos_total += rep.total
        intra += rep.intra
        inter += rep.inter
        cycle += rep.cycle
        grads.append(rep.gradient * (w_pos / n_pos))
    neg_total = 0.0
    for p in negatives:
        rep = loss_negative(p, placeholder)
        neg_total += rep.total
        grads.append(rep.gradient * (w_neg / n_neg))

    pos_mean = pos_total / n_pos if n_pos else 0.0
    neg_mean = neg_total / n_neg if n_neg else 0.0
    total = w_pos * pos_mean + w_neg * neg_mean
    scale = w_pos / n_pos if n_pos else 0.0
    return LossReport(
        intra=intra * scale,
        inter=inter * scale,
        cycle=cycle * scale,
        total=total,
        gradient=grads,
    )
