"""The ``otrack`` command line: reproducible simulate / track / eval /
train-reid / render experiments.

Every command writes a ``manifest.json`` into its output directory before any
artifact; re-running a manifest (``replay_manifest``) reproduces all artifacts
byte for byte. Randomized commands take an explicit ``--seed``; nothing is
ever seeded from the clock. Exit codes: 0 success, 1 runtime/data error,
2 usage error.
"""

from __future__ import annotations

import dataclasses
import json
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import click
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import __version__, embedder, mot, simulate, tracker
from .geometry import Point2
from .heatmap import render_targets, to_pgm

DESC_MAGIC = b"OTDC"
DESC_VERSION = 1

SIM_OUTPUTS = ["gt.txt", "det.txt", "descriptors.bin", "det_ids.txt", "occ.txt"]
PNG_METADATA = {"Software": "otrack"}


# ---------------------------------------------------------------------------
# config files: flat "key = value" text with typed validation


def parse_config_file(path: str, defaults) -> object:
    """Overlay a key=value config file onto a defaults dataclass; unknown keys
    and type errors name the offending key."""
    fields = {f.name: f.type for f in dataclasses.fields(defaults)}
    values = dataclasses.asdict(defaults)
    text = Path(path).read_text()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in fields:
            raise ValueError(f"{path}:{line_no}: unknown config key {key!r}")
        current = values[key]
        try:
            if isinstance(current, bool):
                values[key] = val.lower() in ("1", "true", "yes", "on")
            elif isinstance(current, int):
                values[key] = int(val)
            elif isinstance(current, float):
                values[key] = float(val)
            else:
                values[key] = val
        except ValueError:
            raise ValueError(f"{path}:{line_no}: bad value for {key!r}: {val!r}") from None
    return dataclasses.replace(defaults, **values)


# ---------------------------------------------------------------------------
# binary descriptor file


def write_descriptors(path: Path, frames: Sequence[np.ndarray], dim: int):
    buf = bytearray()
    buf += DESC_MAGIC
    buf += struct.pack("<III", DESC_VERSION, len(frames), dim)
    for mat in frames:
        buf += struct.pack("<I", mat.shape[0])
        buf += np.ascontiguousarray(mat, dtype="<f8").tobytes()
    path.write_bytes(bytes(buf))


def read_descriptors(path: Path) -> List[np.ndarray]:
    data = path.read_bytes()
    if data[:4] != DESC_MAGIC:
        raise ValueError(f"{path}: not a descriptor file (bad magic)")
    version, n_frames, dim = struct.unpack_from("<III", data, 4)
    if version != DESC_VERSION:
        raise ValueError(f"{path}: unsupported descriptor version {version}")
    off = 16
    frames = []
    for _ in range(n_frames):
        (count,) = struct.unpack_from("<I", data, off)
        off += 4
        mat = np.frombuffer(data, dtype="<f8", count=count * dim, offset=off)
        off += count * dim * 8
        frames.append(mat.reshape(count, dim).copy())
    return frames


# ---------------------------------------------------------------------------
# small text channels


def write_det_ids(path: Path, per_frame: Sequence[Sequence[int]]):
    lines = []
    for t, ids in enumerate(per_frame, start=1):
        for k, gid in enumerate(ids):
            lines.append(f"{t},{k},{gid}")
    path.write_text("\n".join(lines) + ("\n" if lines else ""))


def read_det_ids(path: Path) -> Dict[int, List[int]]:
    out: Dict[int, List[int]] = {}
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        f, k, gid = (int(v) for v in line.split(","))
        out.setdefault(f, []).append(gid)
    return out


def write_occ(path: Path, per_frame: Sequence[Sequence[Tuple[Point2, float]]]):
    lines = []
    for t, centers in enumerate(per_frame, start=1):
        for p, score in centers:
            lines.append(f"{t},{p.x:.6f},{p.y:.6f},{score:.6f}")
    path.write_text("\n".join(lines) + ("\n" if lines else ""))


def read_occ(path: Path) -> Dict[int, List[Tuple[Point2, float]]]:
    out: Dict[int, List[Tuple[Point2, float]]] = {}
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        f, x, y, s = line.split(",")
        out.setdefault(int(f), []).append((Point2(float(x), float(y)), float(s)))
    return out


# ---------------------------------------------------------------------------
# manifests


def _prepare_out_dir(out_dir: Path, force: bool):
    if out_dir.exists() and any(out_dir.iterdir()) and not force:
        raise click.ClickException(
            f"output directory {out_dir} is not empty (pass --force to overwrite)"
        )
    out_dir.mkdir(parents=True, exist_ok=True)


def write_manifest(out_dir: Path, command: str, seed: Optional[int], config: dict,
                   options: dict, outputs: List[str], name: str = "manifest.json") -> Path:
    manifest = {
        "tool": "otrack",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config": config,
        "options": options,
        "outputs": outputs,
    }
    path = out_dir / name
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def replay_manifest(manifest_path, out_dir):
    """Re-execute the command recorded in a manifest into ``out_dir``;
    artifacts (and the new manifest) are byte-identical to the original run
    given the same inputs."""
    manifest = json.loads(Path(manifest_path).read_text())
    command = manifest["command"]
    out_dir = Path(out_dir)
    _prepare_out_dir(out_dir, force=False)
    if command == "simulate":
        cfg = simulate.SimConfig(**manifest["config"])
        _run_simulate(cfg, out_dir)
    elif command == "track":
        _run_track(out_dir=out_dir, **manifest["options"])
    elif command == "eval":
        _run_eval(out_dir=out_dir, **manifest["options"])
    elif command == "train-reid":
        cfg_dict = dict(manifest["config"])
        model_opts = manifest["options"]
        _run_train(
            data_dirs=model_opts["data_dirs"],
            cfg=embedder.TrainConfig(**cfg_dict),
            embed_dim=model_opts["embed_dim"],
            hidden_dim=model_opts["hidden_dim"],
            out_dir=out_dir,
        )
    elif command == "render":
        opts = manifest["options"]
        _run_render(
            seq_dir=opts["seq_dir"], frame=opts["frame"], stride=opts["stride"],
            out_path=out_dir / manifest["outputs"][0], out_dir=out_dir,
        )
    else:
        raise click.ClickException(f"unknown command in manifest: {command}")


# ---------------------------------------------------------------------------
# command cores (shared by the CLI entry points and manifest replay)


def _run_simulate(cfg: simulate.SimConfig, out_dir: Path):
    write_manifest(
        out_dir, "simulate", cfg.seed, simulate.config_to_dict(cfg), {}, SIM_OUTPUTS
    )
    seq = simulate.generate(cfg)
    gt_records = []
    det_records = []
    desc_frames = []
    det_ids = []
    for t, frame in enumerate(seq.frames, start=1):
        for obj in frame.gt:
            b = obj.box
            gt_records.append(
                mot.MotRecord(t, obj.obj_id, b.x_l, b.y_t, b.width, b.height, 1.0)
            )
        for det in frame.detections:
            b = det.box
            det_records.append(mot.MotRecord(t, -1, b.x_l, b.y_t, b.width, b.height, det.conf))
        desc_frames.append(frame.descriptors)
        det_ids.append(frame.det_ids)
    (out_dir / "gt.txt").write_text(mot.write(gt_records))
    (out_dir / "det.txt").write_text(mot.write(det_records))
    write_descriptors(
        out_dir / "descriptors.bin", desc_frames, cfg.descriptor_dim + cfg.clutter_dim
    )
    write_det_ids(out_dir / "det_ids.txt", det_ids)
    write_occ(out_dir / "occ.txt", simulate.occlusion_channel(seq))


def _load_tracking_inputs(seq_dir: Path, need_occ: bool):
    det_path = seq_dir / "det.txt"
    if not det_path.exists():
        raise click.ClickException(f"missing {det_path}")
    det_records = mot.parse(det_path.read_text())
    by_frame: Dict[int, List[mot.MotRecord]] = {}
    for r in det_records:
        by_frame.setdefault(r.frame, []).append(r)

    desc_path = seq_dir / "descriptors.bin"
    desc_frames = read_descriptors(desc_path) if desc_path.exists() else None

    occ_path = seq_dir / "occ.txt"
    occ = None
    if need_occ:
        if not occ_path.exists():
            raise click.ClickException(
                f"missing {occ_path}: refinding needs an occlusion channel"
            )
        occ = read_occ(occ_path)
    n_frames = max(
        [len(desc_frames) if desc_frames else 0]
        + list(by_frame.keys())
        + (list(occ.keys()) if occ else [0])
    )
    return by_frame, desc_frames, occ, n_frames


def _run_track(
    seq_dir: str,
    out_dir: Path,
    refind: str = "on",
    embedder_spec: str = "oracle",
    time_window: int = 30,
    tau_o: float = 0.7,
    lam: float = 0.6,
    iou_gate: float = 0.1,
    cos_gate: float = 0.3,
    spawn_conf: float = 0.5,
    stride: int = 4,
):
    options = {
        "seq_dir": seq_dir,
        "refind": refind,
        "embedder_spec": embedder_spec,
        "time_window": time_window,
        "tau_o": tau_o,
        "lam": lam,
        "iou_gate": iou_gate,
        "cos_gate": cos_gate,
        "spawn_conf": spawn_conf,
        "stride": stride,
    }
    write_manifest(out_dir, "track", None, {}, options, ["results.txt"])

    seq_path = Path(seq_dir)
    use_refind = refind == "on"
    by_frame, desc_frames, occ, n_frames = _load_tracking_inputs(seq_path, use_refind)

    model = None
    if embedder_spec != "oracle":
        model = embedder.load_checkpoint(embedder_spec)

    cfg = tracker.TrackerConfig(
        time_window=time_window,
        tau_o=tau_o,
        lam=lam,
        iou_gate=iou_gate,
        cos_gate=cos_gate,
        spawn_conf=spawn_conf,
        refind=use_refind,
        stride=stride,
        use_appearance=desc_frames is not None,
    )
    state = tracker.TrackerState(config=cfg)
    results: List[mot.MotRecord] = []
    for t in range(1, n_frames + 1):
        recs = by_frame.get(t, [])
        detections = [(r.box, r.conf, r.box.center) for r in recs]
        features = None
        if desc_frames is not None:
            mat = desc_frames[t - 1] if t - 1 < len(desc_frames) else np.zeros((0, 1))
            if mat.shape[0] != len(detections):
                raise click.ClickException(
                    f"frame {t}: {mat.shape[0]} descriptor rows for {len(detections)} detections"
                )
            features = mat if model is None else embedder.embed(model, mat).rows
        centers = occ.get(t, []) if occ else []
        state, out = tracker.step(
            state, tracker.FrameInput(detections, features, centers)
        )
        for box, obj_id, _prov in out.results:
            results.append(
                mot.MotRecord(t, obj_id, box.x_l, box.y_t, box.width, box.height, 1.0)
            )
    (out_dir / "results.txt").write_text(mot.write(results))


def _merge_for_total(
    pairs: List[Tuple[List[mot.MotRecord], List[mot.MotRecord]]],
) -> Tuple[List[mot.MotRecord], List[mot.MotRecord]]:
    """Concatenate sequences into disjoint frame/id spaces so overall metrics
    are exact."""
    gt_all: List[mot.MotRecord] = []
    pred_all: List[mot.MotRecord] = []
    frame_off = 0
    id_off = 0
    for gt, pred in pairs:
        frames = [r.frame for r in gt] + [r.frame for r in pred]
        ids = [abs(r.obj_id) for r in gt] + [abs(r.obj_id) for r in pred]
        for r in gt:
            gt_all.append(dataclasses.replace(r, frame=r.frame + frame_off, obj_id=r.obj_id + id_off))
        for r in pred:
            pred_all.append(dataclasses.replace(r, frame=r.frame + frame_off, obj_id=r.obj_id + id_off))
        frame_off += (max(frames) if frames else 0) + 1
        id_off += (max(ids) if ids else 0) + 1
    return gt_all, pred_all


def _eval_figure(rows: List[Tuple[str, mot.MetricsReport]], path: Path):
    labels = [label for label, _ in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5), dpi=100)
    x = np.arange(len(labels))
    width = 0.28
    ax1.bar(x - width, [r.mota for _, r in rows], width, label="MOTA")
    ax1.bar(x, [r.idf1 for _, r in rows], width, label="IDF1")
    ax1.bar(x + width, [r.recall for _, r in rows], width, label="Recall")
    ax1.set_xticks(x, labels, rotation=20, fontsize=8)
    ax1.set_ylim(0, 1.05)
    ax1.legend(fontsize=8)
    ax1.set_title("rates")
    ax2.bar(x - width, [r.fp for _, r in rows], width, label="FP")
    ax2.bar(x, [r.fn for _, r in rows], width, label="FN")
    ax2.bar(x + width, [r.ids for _, r in rows], width, label="IDS")
    ax2.set_xticks(x, labels, rotation=20, fontsize=8)
    ax2.legend(fontsize=8)
    ax2.set_title("error counts")
    fig.tight_layout()
    fig.savefig(path, metadata=PNG_METADATA)
    plt.close(fig)


def _run_eval(gt_paths: List[str], results_paths: List[str], out_dir: Path):
    options = {"gt_paths": list(gt_paths), "results_paths": list(results_paths)}
    write_manifest(out_dir, "eval", None, {}, options, ["report.csv", "report.png"])

    pairs = []
    for g, r in zip(gt_paths, results_paths):
        gt = mot.parse(Path(g).read_text())
        pred = mot.parse(Path(r).read_text())
        if not gt:
            raise click.ClickException(f"{g}: empty ground truth")
        pairs.append((gt, pred))

    max_threads = int(os.environ.get("OTRACK_THREADS", "1"))
    labels = [Path(g).parent.name or f"seq{i}" for i, g in enumerate(gt_paths)]
    if max_threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=max_threads) as pool:
            reports = list(pool.map(lambda p: mot.clear_mot(*p), pairs))
    else:
        reports = [mot.clear_mot(gt, pred) for gt, pred in pairs]
    rows = list(zip(labels, reports))
    if len(pairs) > 1:
        rows.append(("TOTAL", mot.clear_mot(*_merge_for_total(pairs))))

    for label, rep in rows:
        click.echo(mot.report_table(rep, label))
    (out_dir / "report.csv").write_text(mot.report_csv(rows))
    _eval_figure(rows, out_dir / "report.png")
    return rows


def _loss_figure(history: List[float], path: Path):
    fig, ax = plt.subplots(figsize=(6, 3.5), dpi=100)
    ax.plot(range(1, len(history) + 1), history, lw=0.8)
    ax.set_xlabel("step")
    ax.set_ylabel("batch loss")
    ax.set_title("re-identification training loss")
    fig.tight_layout()
    fig.savefig(path, metadata=PNG_METADATA)
    plt.close(fig)


class _SequenceView:
    """Dataset view over a simulate output dir, for training and retrieval."""

    class _Frame:
        __slots__ = ("descriptors", "det_ids")

        def __init__(self, descriptors, det_ids):
            self.descriptors = descriptors
            self.det_ids = det_ids

    def __init__(self, seq_dir: Path):
        desc = read_descriptors(seq_dir / "descriptors.bin")
        ids = read_det_ids(seq_dir / "det_ids.txt")
        self.frames = [
            self._Frame(desc[t], ids.get(t + 1, [])) for t in range(len(desc))
        ]

    @property
    def n_frames(self) -> int:
        return len(self.frames)


def _run_train(
    data_dirs: List[str],
    cfg: embedder.TrainConfig,
    embed_dim: int,
    hidden_dim: int,
    out_dir: Path,
):
    options = {
        "data_dirs": list(data_dirs),
        "embed_dim": embed_dim,
        "hidden_dim": hidden_dim,
    }
    outputs = ["model.ckpt", "loss.csv", "retrieval.csv", "loss.png"]
    write_manifest(out_dir, "train-reid", cfg.seed, dataclasses.asdict(cfg), options, outputs)

    views = [_SequenceView(Path(d)) for d in data_dirs]
    if not views or views[0].n_frames == 0:
        raise click.ClickException("no training data found")
    d_in = None
    for v in views:
        for f in v.frames:
            if f.descriptors.shape[0]:
                d_in = f.descriptors.shape[1]
                break
        if d_in is not None:
            break
    if d_in is None:
        raise click.ClickException("dataset contains no detections to train on")

    model = embedder.init_model(d_in, embed_dim, hidden_dim, seed=cfg.seed)
    try:
        model, history = embedder.train(model, views, cfg)
    except embedder.TrainingDiverged as exc:
        for name in outputs:
            p = out_dir / name
            if p.exists():
                p.unlink()
        raise click.ClickException(str(exc)) from exc

    embedder.save_checkpoint(model, str(out_dir / "model.ckpt"))
    loss_lines = ["step,loss"] + [f"{i + 1},{v:.10f}" for i, v in enumerate(history)]
    (out_dir / "loss.csv").write_text("\n".join(loss_lines) + "\n")
    r1, mean_ap = embedder.eval_retrieval(model, views)
    (out_dir / "retrieval.csv").write_text(f"r1,map\n{r1:.6f},{mean_ap:.6f}\n")
    _loss_figure(history, out_dir / "loss.png")
    final = f"{history[-1]:.6f}" if history else "n/a"
    click.echo(f"final loss {final}  R1 {r1:.4f}  mAP {mean_ap:.4f}")


def _run_render(seq_dir: str, frame: int, stride: int, out_path: Path, out_dir: Path):
    write_manifest(
        out_dir, "render", None, {},
        {"seq_dir": seq_dir, "frame": frame, "stride": stride},
        [out_path.name],
        name=out_path.name + ".manifest.json",
    )
    seq_path = Path(seq_dir)
    gt = mot.parse((seq_path / "gt.txt").read_text())
    manifest_path = seq_path / "manifest.json"
    if manifest_path.exists():
        sim_cfg = json.loads(manifest_path.read_text())["config"]
        arena = (sim_cfg["arena_w"], sim_cfg["arena_h"])
        tau = sim_cfg["occlusion_tau"]
    else:
        arena = (
            max((r.x + r.w) for r in gt),
            max((r.y + r.h) for r in gt),
        )
        tau = 0.7
    frames = sorted({r.frame for r in gt})
    if frame not in frames:
        raise click.ClickException(
            f"frame {frame} out of range (sequence has frames {frames[0]}..{frames[-1]})"
        )
    boxes = [r.box for r in gt if r.frame == frame]
    heat, _offsets, _count = render_targets(boxes, tau, arena, stride)
    out_path.write_bytes(to_pgm(heat))


# ---------------------------------------------------------------------------
# click entry points


@click.group()
@click.version_option(__version__)
def main():
    """Occlusion-aware multi-object tracking experiments."""


@main.command("simulate")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="key = value simulation config file")
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--force", is_flag=True, default=False)
def simulate_cmd(config_path, seed, out_dir, force):
    """Generate a synthetic sequence directory."""
    cfg = simulate.SimConfig()
    if config_path:
        try:
            cfg = parse_config_file(config_path, cfg)
        except ValueError as exc:
            raise click.ClickException(str(exc)) from exc
    cfg = dataclasses.replace(cfg, seed=seed)
    try:
        cfg.validate()
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    out = Path(out_dir)
    _prepare_out_dir(out, force)
    _run_simulate(cfg, out)
    click.echo(f"wrote {', '.join(SIM_OUTPUTS)} to {out}")


@main.command("track")
@click.option("--seq", "seq_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--refind", type=click.Choice(["on", "off"]), default="on")
@click.option("--embedder", "embedder_spec", default="oracle",
              help="'oracle' (use raw descriptors) or a model checkpoint path")
@click.option("--time-window", type=int, default=30)
@click.option("--tau-o", type=float, default=0.7)
@click.option("--lam", type=float, default=0.6)
@click.option("--iou-gate", type=float, default=0.1)
@click.option("--cos-gate", type=float, default=0.3)
@click.option("--spawn-conf", type=float, default=0.5)
@click.option("--stride", type=int, default=4)
@click.option("--force", is_flag=True, default=False)
def track_cmd(seq_dir, out_dir, refind, embedder_spec, time_window, tau_o, lam,
              iou_gate, cos_gate, spawn_conf, stride, force):
    """Track a sequence directory into results.txt."""
    out = Path(out_dir)
    _prepare_out_dir(out, force)
    _run_track(
        seq_dir=seq_dir, out_dir=out, refind=refind, embedder_spec=embedder_spec,
        time_window=time_window, tau_o=tau_o, lam=lam, iou_gate=iou_gate,
        cos_gate=cos_gate, spawn_conf=spawn_conf, stride=stride,
    )
    click.echo(f"wrote results.txt to {out}")


@main.command("eval")
@click.option("--gt", "gt_paths", type=click.Path(exists=True), multiple=True, required=True)
@click.option("--results", "results_paths", type=click.Path(exists=True), multiple=True,
              required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--force", is_flag=True, default=False)
def eval_cmd(gt_paths, results_paths, out_dir, force):
    """Evaluate tracking results against ground truth."""
    if len(gt_paths) != len(results_paths):
        raise click.UsageError("--gt and --results must be given the same number of times")
    out = Path(out_dir)
    _prepare_out_dir(out, force)
    try:
        _run_eval(list(gt_paths), list(results_paths), out)
    except (ValueError, mot.MotFormatError) as exc:
        raise click.ClickException(str(exc)) from exc


@main.command("train-reid")
@click.option("--data", "data_dirs", type=click.Path(exists=True, file_okay=False),
              multiple=True, required=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, required=True)
@click.option("--embed-dim", type=int, default=32)
@click.option("--hidden-dim", type=int, default=0, help="0 = single affine layer")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--force", is_flag=True, default=False)
def train_reid_cmd(data_dirs, config_path, seed, embed_dim, hidden_dim, out_dir, force):
    """Train the toy embedder on one or more simulate output dirs."""
    cfg = embedder.TrainConfig()
    if config_path:
        try:
            cfg = parse_config_file(config_path, cfg)
        except ValueError as exc:
            raise click.ClickException(str(exc)) from exc
    cfg = dataclasses.replace(cfg, seed=seed)
    try:
        cfg.validate()
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    out = Path(out_dir)
    _prepare_out_dir(out, force)
    try:
        _run_train(list(data_dirs), cfg, embed_dim, hidden_dim, out)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc


@main.command("render")
@click.option("--seq", "seq_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--frame", type=int, required=True)
@click.option("--stride", type=int, default=4)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--force", is_flag=True, default=False)
def render_cmd(seq_dir, frame, stride, out_path, force):
    """Render the occlusion-target heatmap of one frame as a PGM image."""
    out_file = Path(out_path)
    out_dir = out_file.parent if str(out_file.parent) else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    if out_file.exists() and not force:
        raise click.ClickException(f"{out_file} exists (pass --force to overwrite)")
    _run_render(seq_dir, frame, stride, out_file, out_dir)
    click.echo(f"wrote {out_file}")


if __name__ == "__main__":
    main()
