"""Click-based command line for videolstm."""

from __future__ import annotations

import functools
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
import pandas as pd
from pydantic import ValidationError

from ..autodiff.serialize import write_tensor
from ..config import CellVariant, RunConfig, Stream
from ..data.clip import VideoClip
from ..data.dataset import SPLITS, build_dataset
from ..data.factory import create_clip_source
from ..errors import (
    ConfigurationError,
    DegenerateFusionError,
    DivergenceError,
    EmptyTubeError,
    FormatError,
    ShapeError,
    UsageError,
)
from ..evaluation import (
    DetectionResult,
    EvalReport,
    GroundTruth,
    accuracy,
    format_table,
    map_table,
    mean_tube_iou,
    recall_at_iou,
)
from ..localization import Localization, export_saliency, localize_video, smooth_tube, write_tubes
from ..model import VideoModel, fuse_streams, load_checkpoint, save_checkpoint, transfer_parameters
from ..plotting import plot_localization
from ..preprocessing import prepare_batch
from ..training import RMSProp, TrainResult, predict_clips, train

_LOGGER = logging.getLogger(__name__)

EXIT_IO = 2
EXIT_USAGE = 3
EXIT_NUMERIC = 4

THREADS_ENV = "VLSM_THREADS"
TABLE_VARIANTS = "convnet,lstm,alstm,conv_lstm,conv_alstm,videolstm"


class IOFailure(click.ClickException):
    exit_code = EXIT_IO


class ConfigFailure(click.ClickException):
    exit_code = EXIT_USAGE


class NumericFailure(click.ClickException):
    exit_code = EXIT_NUMERIC


def _guarded(func):
    """Translate library errors into click exceptions with stable exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except click.ClickException:
            raise
        except (DivergenceError, FloatingPointError) as exc:
            raise NumericFailure(str(exc)) from exc
        except (FileNotFoundError, FormatError, OSError) as exc:
            raise IOFailure(str(exc)) from exc
        except (ValidationError, ConfigurationError, UsageError, ShapeError, DegenerateFusionError, ValueError) as exc:
            raise ConfigFailure(str(exc)) from exc

    return wrapper


class VideoLSTMGroup(click.Group):
    """Group whose command-line usage errors exit with code 3."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        if not standalone_mode:
            return super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        try:
            return super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.UsageError as exc:
            exc.show()
            sys.exit(EXIT_USAGE)
        except click.ClickException as exc:
            exc.show()
            sys.exit(exc.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(1)


# ----------------------------------------------------------------------
# configuration


def _default_config_candidates() -> list[Path]:
    root = Path.cwd()
    return [root / "config" / "local.yaml", root / "config" / "example.yaml"]


def _discover_config(explicit: Optional[Path]) -> tuple[RunConfig, Optional[Path]]:
    if explicit:
        if not explicit.exists():
            raise FileNotFoundError(f"Config file '{explicit}' not found")
        return RunConfig.from_file(explicit), explicit
    for candidate in _default_config_candidates():
        if candidate.exists():
            _LOGGER.debug("Using configuration from %s", candidate)
            return RunConfig.from_file(candidate), candidate
    return RunConfig(), None


def _threads_from_env() -> Optional[int]:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{THREADS_ENV} must be a positive integer, got '{raw}'") from exc
    if value < 1:
        raise ConfigurationError(f"{THREADS_ENV} must be a positive integer, got '{raw}'")
    return value


def _get_config(ctx: click.Context) -> RunConfig:
    cfg = ctx.obj.get("CONFIG")
    if cfg is None:
        cfg, resolved_path = _discover_config(ctx.obj.get("CONFIG_PATH"))
        cfg = cfg.with_overrides({"train.workers": _threads_from_env()})
        ctx.obj["CONFIG"] = cfg
        ctx.obj["CONFIG_PATH"] = resolved_path
    return cfg


def _resolve(ctx: click.Context, overrides: Dict[str, Any]) -> RunConfig:
    return _get_config(ctx).with_overrides(overrides)


def _data_overrides(data: Optional[Path]) -> Dict[str, Any]:
    if data is None:
        return {}
    return {"data.backend": "manifest", "data.manifest": str(data)}


def _split_list(value: str, allowed: Sequence[str], what: str) -> List[str]:
    items = [item.strip() for item in value.split(",") if item.strip()]
    unknown = [item for item in items if item not in allowed]
    if unknown or not items:
        raise click.BadParameter(f"unknown {what} {unknown or value!r}; choose from {', '.join(allowed)}")
    return items


# ----------------------------------------------------------------------
# shared steps


@dataclass
class _Dataset:
    clips: List[VideoClip]
    class_names: List[str]
    split: str


def _load_split(cfg: RunConfig, split: str, *, fallback: bool = False) -> _Dataset:
    source = create_clip_source(cfg.data)
    clips = source.load(split)
    if not clips and fallback and split != "train":
        _LOGGER.warning("Split '%s' is empty; evaluating on the training split", split)
        split = "train"
        clips = source.load(split)
    if not clips:
        raise UsageError(f"Split '{split}' has no clips; try --split train or generate test clips")
    return _Dataset(clips=clips, class_names=source.class_names(), split=split)


def _check_fit(model_cfg, dataset: _Dataset) -> None:
    clip = dataset.clips[0]
    if clip.height != model_cfg.frame_size or clip.width != model_cfg.frame_size:
        raise ConfigurationError(
            f"Clips are {clip.height}×{clip.width} but the model expects frame_size {model_cfg.frame_size}"
        )
    if len(dataset.class_names) != model_cfg.num_classes:
        raise ConfigurationError(
            f"Dataset has {len(dataset.class_names)} classes but the model predicts {model_cfg.num_classes}"
        )
    if clip.channels != model_cfg.frame_channels:
        raise ConfigurationError(f"Clips have {clip.channels} channels, model expects {model_cfg.frame_channels}")


def _segment_length(cfg: RunConfig) -> int:
    return cfg.evaluation.segment_length or cfg.train.snippet_length


def _train_run(
    cfg: RunConfig,
    clips: List[VideoClip],
    out_dir: Path,
    *,
    resume: Optional[Path] = None,
    init: Optional[Path] = None,
) -> TrainResult:
    optimizer = RMSProp(cfg.train)
    start = 0
    if resume is not None:
        checkpoint = load_checkpoint(resume)
        model = checkpoint.model
        optimizer.load_state(checkpoint.optimizer_state)
        start = checkpoint.iteration
    else:
        model = VideoModel.initialize(cfg.model, cfg.stream, seed=cfg.train.seed)
        if init is not None:
            transfer_parameters(model, load_checkpoint(init).model.state_arrays())

    checkpoint_dir = out_dir / "checkpoint"
    extra = {"seed": cfg.train.seed}

    def _save(current: VideoModel, opt: RMSProp, iteration: int) -> None:
        save_checkpoint(checkpoint_dir, current, iteration=iteration, optimizer_state=opt.state_arrays(), extra=extra)

    try:
        result = train(clips, model, cfg.train, optimizer=optimizer, start_iteration=start, on_checkpoint=_save)
    except DivergenceError as exc:
        if exc.last_good:
            last_good = VideoModel.from_arrays(model.config, model.stream, exc.last_good)
            save_checkpoint(out_dir / "last_good", last_good, iteration=max(exc.iteration - 1, 0), extra=extra)
        _LOGGER.error("Training diverged at iteration %d: %s", exc.iteration, exc.diagnostics)
        raise
    _save(result.model, result.optimizer, result.iterations)
    result.trace.to_csv(out_dir / "trace.csv", index=False)
    return result


def _clip_attention(model: VideoModel, clip: VideoClip) -> Tuple[np.ndarray, np.ndarray]:
    batch = prepare_batch([clip], model.stream, with_flow=model.needs_flow_input)
    output = model.forward_sequence(batch.inputs, batch.flow)
    return output.attention_weights()[0], output.frame_probs()[0]


def _require_attention(model: VideoModel) -> None:
    if not model.variant.has_attention:
        raise ConfigurationError(
            f"Variant '{model.variant.value}' has no attention maps; use alstm, motion_alstm, conv_alstm or videolstm"
        )


def _map_workers(func, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _emit(report: EvalReport, json_output: bool) -> None:
    click.echo(report.to_json() if json_output else report.format_text())


# ----------------------------------------------------------------------
# commands


@click.group(cls=VideoLSTMGroup, context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    help="Path to a JSON or YAML run configuration. Defaults to config/local.yaml or config/example.yaml.",
)
@click.option("-v", "--verbose", count=True, help="Increase log verbosity (-v info, -vv debug).")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[Path], verbose: int) -> None:
    """Recurrent video classifiers with attention-based localization."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    ctx.ensure_object(dict)
    ctx.obj["CONFIG_PATH"] = config_path
    ctx.obj["CONFIG"] = None


@cli.command("gen-data")
@click.option("--classes", type=int, help="Number of motion classes (2-6)")
@click.option("--clips-per-class", type=int, help="Training clips per class")
@click.option("--test-per-class", type=int, help="Test clips per class")
@click.option("--frames", type=int, help="Frames per clip")
@click.option("--frame", "frame_size", type=int, help="Frame height and width in pixels")
@click.option("--glyph-size", type=int, help="Glyph extent in pixels")
@click.option("--clutter", type=float, help="Density of static distractor texture in [0, 1]")
@click.option("--noise", "noise_sigma", type=float, help="Standard deviation of additive pixel noise")
@click.option("--seed", type=int, help="Dataset seed")
@click.option("--out", type=click.Path(path_type=Path), help="Output directory (default: data/synthetic)")
@click.pass_context
@_guarded
def gen_data_cmd(
    ctx: click.Context,
    classes: Optional[int],
    clips_per_class: Optional[int],
    test_per_class: Optional[int],
    frames: Optional[int],
    frame_size: Optional[int],
    glyph_size: Optional[int],
    clutter: Optional[float],
    noise_sigma: Optional[float],
    seed: Optional[int],
    out: Optional[Path],
) -> None:
    """Generate the synthetic motion-pattern dataset."""
    base = _get_config(ctx)
    out = out or (base.data.manifest if base.data.manifest is not None else Path("data") / "synthetic")
    if out.suffix == ".json":
        out = out.parent
    cfg = base.with_overrides(
        {
            "data.synthetic.classes": classes,
            "data.synthetic.clips_per_class": clips_per_class,
            "data.synthetic.test_per_class": test_per_class,
            "data.synthetic.frames": frames,
            "data.synthetic.frame_size": frame_size,
            "data.synthetic.glyph_size": glyph_size,
            "data.synthetic.clutter": clutter,
            "data.synthetic.noise_sigma": noise_sigma,
            "data.synthetic.seed": seed,
            "data.manifest": str(out),
        }
    )
    manifest = build_dataset(cfg.data.synthetic, out)
    cfg.write_resolved(out)
    rows = [
        {"class": name, **{split: manifest.class_counts(split)[label] for split in SPLITS}}
        for label, name in enumerate(manifest.classes)
    ]
    click.echo(format_table(pd.DataFrame(rows), ["class", *SPLITS]))
    click.echo(f"Wrote {len(manifest.clips)} clips to {out}")


@cli.command("train")
@click.option("--variant", type=click.Choice([v.value for v in CellVariant]), help="Recurrent architecture")
@click.option("--stream", type=click.Choice([s.value for s in Stream]), help="Input stream")
@click.option("--snippet-len", type=int, help="Frames per training snippet")
@click.option("--batch-size", type=int, help="Snippets per iteration")
@click.option("--lr", type=float, help="RMSProp learning rate")
@click.option("--decay", type=float, help="RMSProp decay")
@click.option("--epochs", type=int, help="Epochs when --max-iterations is not given")
@click.option("--max-iterations", type=int, help="Stop after this many iterations")
@click.option("--dropout", type=float, help="Head dropout probability")
@click.option("--seed", type=int, help="Initialisation and sampling seed")
@click.option("--workers", type=int, help=f"Gradient threads (overrides {THREADS_ENV})")
@click.option("--data", type=click.Path(path_type=Path), help="Dataset manifest or its directory")
@click.option("--out", type=click.Path(path_type=Path), help="Run directory")
@click.option("--resume", type=click.Path(path_type=Path), help="Continue from a checkpoint directory")
@click.option("--init", type=click.Path(path_type=Path), help="Initialise matching parameters from a checkpoint")
@click.pass_context
@_guarded
def train_cmd(
    ctx: click.Context,
    variant: Optional[str],
    stream: Optional[str],
    snippet_len: Optional[int],
    batch_size: Optional[int],
    lr: Optional[float],
    decay: Optional[float],
    epochs: Optional[int],
    max_iterations: Optional[int],
    dropout: Optional[float],
    seed: Optional[int],
    workers: Optional[int],
    data: Optional[Path],
    out: Optional[Path],
    resume: Optional[Path],
    init: Optional[Path],
) -> None:
    """Train one variant on one stream and write a checkpoint and loss trace."""
    if resume is not None and init is not None:
        raise click.UsageError("--resume and --init are mutually exclusive")
    overrides: Dict[str, Any] = {
        "model.variant": variant,
        "stream": stream,
        "model.dropout_rate": dropout,
        "train.snippet_length": snippet_len,
        "train.batch_size": batch_size,
        "train.learning_rate": lr,
        "train.decay": decay,
        "train.max_epochs": epochs,
        "train.max_iterations": max_iterations,
        "train.seed": seed,
        "train.workers": workers,
        **_data_overrides(data),
    }
    cfg = _resolve(ctx, overrides)
    if resume is not None:
        restored = load_checkpoint(resume).model
        cfg = cfg.model_copy(update={"model": restored.config, "stream": restored.stream})
    out_dir = out or cfg.output_dir / f"{cfg.model.variant.value}_{cfg.stream.value}_s{cfg.train.seed}"
    cfg.write_resolved(out_dir)
    dataset = _load_split(cfg, "train")
    _check_fit(cfg.model, dataset)
    result = _train_run(cfg, dataset.clips, out_dir, resume=resume, init=init)
    final = result.trace.iloc[-1] if not result.trace.empty else None
    if final is not None:
        click.echo(f"iteration {int(final['iteration'])}: loss {final['loss']:.4f}, train accuracy {final['train_acc']:.3f}")
    click.echo(f"Checkpoint written to {out_dir / 'checkpoint'}")


@cli.command("eval")
@click.argument("checkpoint", required=False, type=click.Path(path_type=Path))
@click.option("--fuse", nargs=2, type=click.Path(path_type=Path), help="Product-fuse two checkpoints (RGB, flow)")
@click.option("--split", type=click.Choice(list(SPLITS)), default="test", show_default=True)
@click.option("--segments", type=int, help="Equally spaced test segments per clip")
@click.option("--segment-len", type=int, help="Frames per test segment (default: training snippet length)")
@click.option("--data", type=click.Path(path_type=Path), help="Dataset manifest or its directory")
@click.option("--out", type=click.Path(path_type=Path), help="Report directory")
@click.option("--json", "json_output", is_flag=True, help="Emit JSON instead of text")
@click.pass_context
@_guarded
def eval_cmd(
    ctx: click.Context,
    checkpoint: Optional[Path],
    fuse: Optional[Tuple[Path, Path]],
    split: str,
    segments: Optional[int],
    segment_len: Optional[int],
    data: Optional[Path],
    out: Optional[Path],
    json_output: bool,
) -> None:
    """Classification accuracy under the segment-averaged test protocol."""
    paths = list(fuse) if fuse else ([checkpoint] if checkpoint is not None else [])
    if not paths:
        raise click.UsageError("Give a CHECKPOINT or --fuse RGB_CKPT FLOW_CKPT")
    overrides = {"evaluation.segments": segments, "evaluation.segment_length": segment_len, **_data_overrides(data)}
    cfg = _resolve(ctx, overrides)
    models = [load_checkpoint(path).model for path in paths]
    if len({model.num_classes for model in models}) > 1:
        raise ConfigurationError(
            f"Checkpoints predict different class counts: {[model.num_classes for model in models]}"
        )
    out_dir = out or cfg.output_dir / "eval"
    cfg.write_resolved(out_dir)
    dataset = _load_split(cfg, split)
    for model in models:
        _check_fit(model.config, dataset)
    labels = [clip.label for clip in dataset.clips]
    length = _segment_length(cfg)
    probs = [predict_clips(dataset.clips, model, cfg.evaluation.segments, length) for model in models]

    details: Dict[str, Any] = {
        "split": dataset.split,
        "segments": cfg.evaluation.segments,
        "segment_length": length,
        "checkpoints": [str(path) for path in paths],
        "streams": [model.stream.value for model in models],
        "variants": [model.variant.value for model in models],
    }
    final = probs[0]
    if fuse:
        details["stream_accuracy"] = [accuracy(p, labels) for p in probs]
        final = fuse_streams(probs[0], probs[1])
    report = EvalReport(accuracy=accuracy(final, labels), num_videos=len(labels), details=details)
    report.write(out_dir)
    predictions = pd.DataFrame(
        {
            "video_id": [clip.clip_id for clip in dataset.clips],
            "label": labels,
            "predicted": np.argmax(final, axis=1),
            "confidence": np.max(final, axis=1),
        }
    )
    predictions.to_csv(out_dir / "predictions.csv", index=False)
    _emit(report, json_output)


@cli.command("localize")
@click.argument("checkpoint", type=click.Path(path_type=Path))
@click.option("--split", type=click.Choice(list(SPLITS)), default="test", show_default=True)
@click.option("--theta", type=float, help="Saliency threshold in [0, 255] units (default 100)")
@click.option("--sigma", type=float, help="Gaussian std in pixels (default frame_height/14)")
@click.option("--span", type=float, help="Fraction of frames per local regression")
@click.option("--smooth/--no-smooth", default=None, help="Temporal smoothing of the emitted tubes")
@click.option("--export-saliency", "export_maps", is_flag=True, help="Write one PGM saliency map per frame")
@click.option("--plot", is_flag=True, help="Save a figure per video (needs the viz extra)")
@click.option("--data", type=click.Path(path_type=Path), help="Dataset manifest or its directory")
@click.option("--out", type=click.Path(path_type=Path), help="Output directory")
@click.option("--json", "json_output", is_flag=True, help="Emit JSON instead of text")
@click.pass_context
@_guarded
def localize_cmd(
    ctx: click.Context,
    checkpoint: Path,
    split: str,
    theta: Optional[float],
    sigma: Optional[float],
    span: Optional[float],
    smooth: Optional[bool],
    export_maps: bool,
    plot: bool,
    data: Optional[Path],
    out: Optional[Path],
    json_output: bool,
) -> None:
    """One attention tube per video, evaluated against ground-truth boxes."""
    cfg = _resolve(
        ctx,
        {
            "localization.threshold": theta,
            "localization.sigma": sigma,
            "localization.span": span,
            "localization.smooth": smooth,
            **_data_overrides(data),
        },
    )
    model = load_checkpoint(checkpoint).model
    _require_attention(model)
    out_dir = out or cfg.output_dir / "localize"
    cfg.write_resolved(out_dir)
    dataset = _load_split(cfg, split)
    _check_fit(model.config, dataset)
    loc_cfg = cfg.localization

    def _run(clip: VideoClip) -> Tuple[VideoClip, Optional[Localization], Optional[str]]:
        attention, frame_probs = _clip_attention(model, clip)
        try:
            return clip, localize_video(attention, frame_probs, loc_cfg, (clip.height, clip.width), clip.clip_id), None
        except EmptyTubeError as exc:
            _LOGGER.warning("%s", exc)
            return clip, None, str(exc)

    results = _map_workers(_run, dataset.clips, cfg.train.workers)
    found = [(clip, loc) for clip, loc, _ in results if loc is not None]
    failures = [{"video_id": clip.clip_id, "error": error} for clip, _, error in results if error is not None]

    tubes = [loc.tube for _, loc in found]
    write_tubes(out_dir / "tubes.json", tubes, failures)
    if export_maps:
        for clip, loc in found:
            export_saliency(out_dir / "saliency", clip.clip_id, loc.saliency)
    if plot:
        for clip, loc in found:
            plot_localization(clip, loc.saliency, loc.tube, out_dir / "figures" / f"{clip.clip_id}.png")

    gts = [GroundTruth(clip.clip_id, clip.label, list(clip.boxes)) for clip in dataset.clips if clip.has_boxes]
    detections = [DetectionResult.from_tube(loc.tube) for _, loc in found]
    raw = [DetectionResult.from_tube(loc.raw_tube) for _, loc in found]
    smoothed = [
        DetectionResult.from_tube(loc.tube) if loc.tube.smoothed else _smoothed_detection(loc, loc_cfg.span)
        for _, loc in found
    ]
    recall = pd.concat(
        [
            recall_at_iou(smoothed, gts, cfg.evaluation.recall_thresholds).assign(tube="smoothed"),
            recall_at_iou(raw, gts, cfg.evaluation.recall_thresholds).assign(tube="unsmoothed"),
        ],
        ignore_index=True,
    )[["tube", "iou_threshold", "recall"]]
    labels = [clip.label for clip in dataset.clips]
    scores = {tube.video_id: tube.class_scores for tube in tubes}
    classified = [clip for clip in dataset.clips if clip.clip_id in scores]
    report = EvalReport(
        accuracy=(
            accuracy(np.stack([scores[clip.clip_id] for clip in classified]), [clip.label for clip in classified])
            if classified
            else None
        ),
        num_videos=len(labels),
        mean_iou={"smoothed": mean_tube_iou(smoothed, gts), "unsmoothed": mean_tube_iou(raw, gts)},
        map=map_table(detections, gts, cfg.evaluation.map_thresholds, model.num_classes),
        recall=recall,
        failures=failures,
        details={
            "split": dataset.split,
            "variant": model.variant.value,
            "stream": model.stream.value,
            "threshold": loc_cfg.threshold,
            "sigma": loc_cfg.resolved_sigma(model.config.frame_size),
            "smooth": loc_cfg.smooth,
            "videos_with_ground_truth": len(gts),
        },
    )
    report.write(out_dir)
    if failures:
        click.echo(f"warning: {len(failures)} videos produced no tube", err=True)
    _emit(report, json_output)


def _smoothed_detection(loc: Localization, span: float) -> DetectionResult:
    height, width = loc.saliency.shape[1:]
    boxes = smooth_tube(loc.raw_tube.boxes, span, bounds=(width, height))
    return DetectionResult(video_id=loc.raw_tube.video_id, boxes=boxes, class_scores=loc.raw_tube.class_scores)


@cli.command("export-attention")
@click.argument("checkpoint", type=click.Path(path_type=Path))
@click.option("--split", type=click.Choice(list(SPLITS)), default="test", show_default=True)
@click.option("--data", type=click.Path(path_type=Path), help="Dataset manifest or its directory")
@click.option("--out", type=click.Path(path_type=Path), help="Output directory")
@click.pass_context
@_guarded
def export_attention_cmd(
    ctx: click.Context,
    checkpoint: Path,
    split: str,
    data: Optional[Path],
    out: Optional[Path],
) -> None:
    """Dump the T×N×N attention maps of every clip as TNSR files."""
    cfg = _resolve(ctx, _data_overrides(data))
    model = load_checkpoint(checkpoint).model
    _require_attention(model)
    out_dir = out or cfg.output_dir / "attention"
    cfg.write_resolved(out_dir)
    dataset = _load_split(cfg, split)
    _check_fit(model.config, dataset)
    index = []
    for clip in dataset.clips:
        attention, _ = _clip_attention(model, clip)
        name = f"{clip.clip_id}.tnsr"
        write_tensor(out_dir / name, attention)
        index.append({"video_id": clip.clip_id, "label": clip.label, "path": name, "shape": list(attention.shape)})
    (out_dir / "index.json").write_text(json.dumps({"attention": index}, indent=2))
    click.echo(f"Wrote attention maps of {len(index)} clips to {out_dir}")


@cli.command("compare")
@click.option("--variants", default=TABLE_VARIANTS, show_default=True, help="Comma-separated variants")
@click.option("--streams", default="rgb,flow", show_default=True, help="Comma-separated streams")
@click.option("--seeds", default="0", show_default=True, help="Comma-separated training seeds")
@click.option("--max-iterations", type=int, help="Iterations per training run")
@click.option("--workers", type=int, help=f"Gradient threads (overrides {THREADS_ENV})")
@click.option("--data", type=click.Path(path_type=Path), help="Dataset manifest or its directory")
@click.option("--out", type=click.Path(path_type=Path), help="Output directory")
@click.option("--json", "json_output", is_flag=True, help="Emit JSON instead of a table")
@click.pass_context
@_guarded
def compare_cmd(
    ctx: click.Context,
    variants: str,
    streams: str,
    seeds: str,
    max_iterations: Optional[int],
    workers: Optional[int],
    data: Optional[Path],
    out: Optional[Path],
    json_output: bool,
) -> None:
    """Train and evaluate every variant on every stream; emit an accuracy grid."""
    variant_list = _split_list(variants, [v.value for v in CellVariant], "variant")
    stream_list = _split_list(streams, [s.value for s in Stream], "stream")
    try:
        seed_list = [int(seed) for seed in seeds.split(",") if seed.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"seeds must be integers, got '{seeds}'") from exc
    if not seed_list:
        raise click.BadParameter("at least one seed is required")

    base = _resolve(ctx, {"train.max_iterations": max_iterations, "train.workers": workers, **_data_overrides(data)})
    out_dir = out or base.output_dir / "compare"
    base.write_resolved(out_dir)
    train_set = _load_split(base, "train")
    test_set = _load_split(base, "test", fallback=True)
    _check_fit(base.model, train_set)
    labels = [clip.label for clip in test_set.clips]

    runs = []
    for stream in stream_list:
        for variant in variant_list:
            for seed in seed_list:
                cfg = base.with_overrides({"model.variant": variant, "stream": stream, "train.seed": seed})
                run_dir = out_dir / "runs" / f"{stream}_{variant}_s{seed}"
                cfg.write_resolved(run_dir)
                click.echo(f"training {variant} on {stream} (seed {seed})", err=True)
                result = _train_run(cfg, train_set.clips, run_dir)
                probs = predict_clips(test_set.clips, result.model, cfg.evaluation.segments, _segment_length(cfg))
                runs.append(
                    {
                        "stream": stream,
                        "variant": variant,
                        "seed": seed,
                        "accuracy": accuracy(probs, labels),
                        "final_loss": float(result.trace["loss"].iloc[-1]) if not result.trace.empty else None,
                    }
                )

    runs_df = pd.DataFrame(runs, columns=["stream", "variant", "seed", "accuracy", "final_loss"])
    grid = (
        runs_df.groupby(["stream", "variant"], sort=False)["accuracy"]
        .mean()
        .unstack("variant")
        .reindex(index=stream_list, columns=variant_list)
        .reset_index()
    )
    grid.columns.name = None
    runs_df.to_csv(out_dir / "runs.csv", index=False)
    grid.to_csv(out_dir / "grid.csv", index=False)
    payload = {
        "split": test_set.split,
        "seeds": seed_list,
        "grid": grid.to_dict(orient="records"),
        "runs": runs_df.to_dict(orient="records"),
    }
    (out_dir / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    if json_output:
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
    else:
        click.echo(format_table(grid))


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
