"""Constant-velocity Kalman filter over box state (cx, cy, w, h) plus the
four velocities. One state per tracklet; all operations are pure and return
fresh states.

Noise scales follow the usual pedestrian-tracking convention of being
proportional to the object height: per-frame process std h/20 on position and
size, h/160 on velocities, and measurement std h/20. The ``noise_scale``
argument of :func:`update` inflates the measurement noise, which is how
recovered (rather than detected) boxes are folded in with reduced trust.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .geometry import BBox

STD_POS_WEIGHT = 1.0 / 20.0
STD_VEL_WEIGHT = 1.0 / 160.0
MIN_SIZE = 1e-3

_F = np.eye(8)
for _i in range(4):
    _F[_i, 4 + _i] = 1.0
_H = np.eye(4, 8)


@dataclass
class KalmanState:
    mean: np.ndarray  # (8,): cx, cy, w, h, vcx, vcy, vw, vh
    cov: np.ndarray  # (8, 8) symmetric PSD


def _box_to_measurement(box: BBox) -> np.ndarray:
    c = box.center
    return np.array([c.x, c.y, box.width, box.height], dtype=np.float64)


def _mean_to_box(mean: np.ndarray) -> BBox:
    cx, cy = mean[0], mean[1]
    w = max(mean[2], MIN_SIZE)
    h = max(mean[3], MIN_SIZE)
    return BBox(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)


def init(box: BBox) -> KalmanState:
    """Fresh state from a first detection; velocities start at zero with
    inflated uncertainty."""
    if box.width <= 0 or box.height <= 0:
        raise ValueError("cannot initialize a track from a zero-area box")
    z = _box_to_measurement(box)
    mean = np.concatenate([z, np.zeros(4)])
    h = box.height
    std = np.array(
        [
            2 * STD_POS_WEIGHT * h,
            2 * STD_POS_WEIGHT * h,
            2 * STD_POS_WEIGHT * h,
            2 * STD_POS_WEIGHT * h,
            10 * STD_VEL_WEIGHT * h,
            10 * STD_VEL_WEIGHT * h,
            10 * STD_VEL_WEIGHT * h,
            10 * STD_VEL_WEIGHT * h,
        ]
    )
    return KalmanState(mean=mean, cov=np.diag(std**2))


def _process_noise(h: float) -> np.ndarray:
    std_pos = STD_POS_WEIGHT * h
    std_vel = STD_VEL_WEIGHT * h
    std = np.array([std_pos] * 4 + [std_vel] * 4)
    return np.diag(std**2)


def predict(state: KalmanState) -> Tuple[KalmanState, BBox]:
    """Advance one frame under constant velocity; returns the new state and
    the predicted box."""
    h = max(state.mean[3], MIN_SIZE)
    mean = _F @ state.mean
    cov = _F @ state.cov @ _F.T + _process_noise(h)
    cov = 0.5 * (cov + cov.T)
    new = KalmanState(mean=mean, cov=cov)
    return new, _mean_to_box(mean)


def update(state: KalmanState, measurement: BBox, noise_scale: float = 1.0) -> KalmanState:
    """Standard linear Gauss-Markov posterior on (cx, cy, w, h)."""
    z = _box_to_measurement(measurement)
    h = max(state.mean[3], MIN_SIZE)
    r_std = STD_POS_WEIGHT * h * noise_scale
    r = np.diag(np.full(4, r_std**2))
    s = _H @ state.cov @ _H.T + r
    k = state.cov @ _H.T @ np.linalg.inv(s)
    innovation = z - _H @ state.mean
    mean = state.mean + k @ innovation
    cov = (np.eye(8) - k @ _H) @ state.cov
    cov = 0.5 * (cov + cov.T)
    mean[2] = max(mean[2], MIN_SIZE)
    mean[3] = max(mean[3], MIN_SIZE)
    return KalmanState(mean=mean, cov=cov)


def state_box(state: KalmanState) -> BBox:
    return _mean_to_box(state.mean)
