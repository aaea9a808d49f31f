"""Occlusion-aware online multi-object tracking toolkit.

Library surface: box geometry and lost-box recovery (:mod:`otrack.geometry`),
occlusion-center heatmaps and losses (:mod:`otrack.heatmap`), unsupervised
re-identification losses with analytic gradients (:mod:`otrack.reid`), a small
trainable embedder (:mod:`otrack.embedder`), constant-velocity Kalman
filtering (:mod:`otrack.kalman`), detection-tracklet association
(:mod:`otrack.association`), the online tracker (:mod:`otrack.tracker`), a
deterministic synthetic world (:mod:`otrack.simulate`), MOTChallenge I/O and
metrics (:mod:`otrack.mot`) and the ``otrack`` CLI (:mod:`otrack.cli`).
"""

__version__ = "0.1.0"

from .geometry import BBox, Point2, OcclusionEvent  # noqa: F401
