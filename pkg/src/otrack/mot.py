"""MOTChallenge text I/O and tracking metrics (CLEAR family plus IDF1).

Records are one comma-separated line per object: frame, id, x, y, w, h, conf
and three trailing placeholder fields. Detections carry id -1. The evaluator
follows the standard CLEAR protocol: per-frame matching at IoU >= 0.5 that
prefers carrying over the previous frame's correspondences, with identity
switches counted against each ground-truth trajectory's last known match.
IDF1 comes from the globally optimal one-to-one identity mapping.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .geometry import BBox, iou

IOU_THRESHOLD = 0.5
MT_COVERAGE = 0.8
ML_COVERAGE = 0.2


class MotFormatError(ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


@dataclass(frozen=True)
class MotRecord:
    frame: int
    obj_id: int
    x: float
    y: float
    w: float
    h: float
    conf: float
    extra: Tuple[float, float, float] = (-1.0, -1.0, -1.0)

    @property
    def box(self) -> BBox:
        return BBox(self.x, self.y, self.x + self.w, self.y + self.h)


@dataclass
class MetricsReport:
    mota: float
    motp: float
    idf1: float
    recall: float
    mt: int
    ml: int
    fp: int
    fn: int
    ids: int
    frag: int

    FIELDS = ("MOTA", "MOTP", "IDF1", "Recall", "MT", "ML", "FP", "FN", "IDS", "Frag")

    def values(self) -> Tuple:
        return (
            self.mota, self.motp, self.idf1, self.recall,
            self.mt, self.ml, self.fp, self.fn, self.ids, self.frag,
        )


def parse(text: str) -> List[MotRecord]:
    """Parse MOTChallenge CSV text; raises MotFormatError with the offending
    line number on malformed input."""
    records: List[MotRecord] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) < 7:
            raise MotFormatError(line_no, f"expected at least 7 fields, got {len(parts)}")
        try:
            frame = int(float(parts[0]))
            obj_id = int(float(parts[1]))
            x, y, w, h, conf = (float(p) for p in parts[2:7])
            extra = tuple(float(p) for p in parts[7:10])
        except ValueError:
            raise MotFormatError(line_no, f"unparseable field in {line!r}") from None
        if frame < 1:
            raise MotFormatError(line_no, f"frame must be >= 1, got {frame}")
        while len(extra) < 3:
            extra = extra + (-1.0,)
        records.append(MotRecord(frame, obj_id, x, y, w, h, conf, extra))
    return records


def _fmt(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return f"{v:.6g}"


def write(records: Sequence[MotRecord]) -> str:
    """Serialize records in ascending (frame, id) order, box fields at two
    decimals. Parsing the output reproduces the records exactly."""
    lines = []
    for r in sorted(records, key=lambda r: (r.frame, r.obj_id)):
        extra = ",".join(_fmt(e) for e in r.extra)
        lines.append(
            f"{r.frame},{r.obj_id},{r.x:.2f},{r.y:.2f},{r.w:.2f},{r.h:.2f},{r.conf:.2f},{extra}"
        )
    return "\n".join(lines) + ("\n" if lines else "")


def quantized(records: Sequence[MotRecord]) -> List[MotRecord]:
    """Records with box/conf fields rounded to the serialized precision, so
    that write -> parse is an exact identity."""
    return [
        MotRecord(
            r.frame, r.obj_id,
            float(f"{r.x:.2f}"), float(f"{r.y:.2f}"),
            float(f"{r.w:.2f}"), float(f"{r.h:.2f}"),
            float(f"{r.conf:.2f}"), r.extra,
        )
        for r in records
    ]


def _by_frame(records: Sequence[MotRecord]) -> Dict[int, List[MotRecord]]:
    frames: Dict[int, List[MotRecord]] = defaultdict(list)
    for r in records:
        frames[r.frame].append(r)
    for frame in frames.values():
        frame.sort(key=lambda r: r.obj_id)
    return frames


def clear_mot(
    gt: Sequence[MotRecord], pred: Sequence[MotRecord], iou_threshold: float = IOU_THRESHOLD
) -> MetricsReport:
    """CLEAR metrics over two record sets grouped by frame.

    MOTA = 1 - (FN + FP + IDS) / total ground truth. MOTP is the mean IoU
    distance (1 - IoU) over matched pairs. MT/ML use 80%/20% trajectory
    coverage; Frag counts interruptions of otherwise tracked trajectories.
    """
    if not gt:
        raise ValueError("empty ground truth: MOTA is undefined")
    gt_frames = _by_frame(gt)
    pred_frames = _by_frame(pred)
    all_frames = sorted(set(gt_frames) | set(pred_frames))

    total_gt = len(gt)
    fp = fn = ids = matches_total = 0
    dist_sum = 0.0
    last_match: Dict[int, int] = {}  # gt id -> last matched pred id
    coverage: Dict[int, List[bool]] = defaultdict(list)  # per gt id, matched flags

    for f in all_frames:
        gts = gt_frames.get(f, [])
        preds = pred_frames.get(f, [])
        gt_ids = [g.obj_id for g in gts]
        matched_g: Dict[int, int] = {}
        used_p = set()

        # carry over still-valid correspondences from the last known match
        pred_by_id = {p.obj_id: k for k, p in enumerate(preds)}
        for gi, g in enumerate(gts):
            prev_pid = last_match.get(g.obj_id)
            if prev_pid is None or prev_pid not in pred_by_id:
                continue
            k = pred_by_id[prev_pid]
            if k in used_p:
                continue
            ov = iou(g.box, preds[k].box)
            if ov >= iou_threshold:
                matched_g[gi] = k
                used_p.add(k)

        # assign the remainder by minimum IoU distance
        free_g = [gi for gi in range(len(gts)) if gi not in matched_g]
        free_p = [k for k in range(len(preds)) if k not in used_p]
        if free_g and free_p:
            cost = np.full((len(free_g), len(free_p)), 1e9)
            for a, gi in enumerate(free_g):
                for b, k in enumerate(free_p):
                    ov = iou(gts[gi].box, preds[k].box)
                    if ov >= iou_threshold:
                        cost[a, b] = 1.0 - ov
            rr, cc = linear_sum_assignment(cost)
            for a, b in zip(rr, cc):
                if cost[a, b] < 1e8:
                    matched_g[free_g[a]] = free_p[b]
                    used_p.add(free_p[b])

        for gi, g in enumerate(gts):
            if gi in matched_g:
                k = matched_g[gi]
                pid = preds[k].obj_id
                if g.obj_id in last_match and last_match[g.obj_id] != pid:
                    ids += 1
                last_match[g.obj_id] = pid
                matches_total += 1
                dist_sum += 1.0 - iou(g.box, preds[k].box)
                coverage[g.obj_id].append(True)
            else:
                fn += 1
                coverage[g.obj_id].append(False)
        fp += len(preds) - len(used_p)

    mota = 1.0 - (fn + fp + ids) / total_gt
    motp = dist_sum / matches_total if matches_total else 0.0
    recall = matches_total / total_gt

    mt = ml = frag = 0
    for flags in coverage.values():
        cov = sum(flags) / len(flags)
        if cov >= MT_COVERAGE:
            mt += 1
        if cov <= ML_COVERAGE:
            ml += 1
        # interruption: tracked -> lost with tracking resumed later
        for i in range(1, len(flags)):
            if flags[i - 1] and not flags[i] and any(flags[i:]):
                frag += 1

    return MetricsReport(
        mota=mota,
        motp=motp,
        idf1=idf1(gt, pred, iou_threshold),
        recall=recall,
        mt=mt,
        ml=ml,
        fp=fp,
        fn=fn,
        ids=ids,
        frag=frag,
    )


def _identity_overlaps(
    gt: Sequence[MotRecord], pred: Sequence[MotRecord], iou_threshold: float
) -> Tuple[Dict[Tuple[int, int], int], List[int], List[int], int, int]:
    """Per (gt id, pred id): number of frames where their boxes overlap at the
    threshold."""
    gt_frames = _by_frame(gt)
    pred_frames = _by_frame(pred)
    overlap: Dict[Tuple[int, int], int] = defaultdict(int)
    for f, gts in gt_frames.items():
        preds = pred_frames.get(f, [])
        seen_g = set()
        for g in gts:
            if g.obj_id in seen_g:
                continue
            seen_g.add(g.obj_id)
            seen_p = set()
            for p in preds:
                if p.obj_id in seen_p:
                    continue
                seen_p.add(p.obj_id)
                if iou(g.box, p.box) >= iou_threshold:
                    overlap[(g.obj_id, p.obj_id)] += 1
    gt_ids = sorted({r.obj_id for r in gt})
    pred_ids = sorted({r.obj_id for r in pred})
    return overlap, gt_ids, pred_ids, len(gt), len(pred)


def idf1(
    gt: Sequence[MotRecord], pred: Sequence[MotRecord], iou_threshold: float = IOU_THRESHOLD
) -> float:
    """IDF1: F1 of identity-consistent detections under the best global
    one-to-one mapping between ground-truth and predicted identities."""
    if not gt:
        raise ValueError("empty ground truth: IDF1 is undefined")
    if not pred:
        return 0.0
    overlap, gt_ids, pred_ids, n_gt, n_pred = _identity_overlaps(gt, pred, iou_threshold)
    gain = np.zeros((len(gt_ids), len(pred_ids)))
    for (g, p), c in overlap.items():
        gain[gt_ids.index(g), pred_ids.index(p)] = c
    rr, cc = linear_sum_assignment(-gain)
    idtp = int(gain[rr, cc].sum())
    idfn = n_gt - idtp
    idfp = n_pred - idtp
    return 2.0 * idtp / (2.0 * idtp + idfp + idfn)


def report_table(report: MetricsReport, label: str = "sequence") -> str:
    """Aligned text table for terminal output."""
    header = f"{'':<12}" + "".join(f"{name:>9}" for name in MetricsReport.FIELDS)
    vals = report.values()
    cells = []
    for v in vals[:4]:
        cells.append(f"{v:9.3f}")
    for v in vals[4:]:
        cells.append(f"{v:9d}")
    return header + "\n" + f"{label:<12}" + "".join(cells)


def report_csv(reports: Sequence[Tuple[str, MetricsReport]]) -> str:
    """CSV with one row per labelled report."""
    lines = ["label," + ",".join(MetricsReport.FIELDS)]
    for label, rep in reports:
        vals = rep.values()
        cells = [f"{v:.6f}" for v in vals[:4]] + [str(v) for v in vals[4:]]
        lines.append(label + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


def parse_report_csv(text: str) -> List[Tuple[str, MetricsReport]]:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != "label," + ",".join(MetricsReport.FIELDS):
        raise ValueError("not a metrics report CSV")
    out = []
    for line in lines[1:]:
        parts = line.split(",")
        label = parts[0]
        floats = [float(p) for p in parts[1:5]]
        ints = [int(p) for p in parts[5:11]]
        out.append((label, MetricsReport(*floats, *ints)))
    return out
