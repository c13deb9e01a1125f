"""Back-propagation-through-time training loop and the segment-averaged test protocol."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..autodiff import backward
from ..config import TrainConfig
from ..data.clip import VideoClip
from ..errors import DivergenceError, UsageError
from ..model.network import VideoModel
from ..model.predictions import dropout_mask
from ..preprocessing.streams import StreamBatch, prepare_batch
from .optimizer import RMSProp, clip_gradients
from .sampling import sample_snippet, segment_starts

_LOGGER = logging.getLogger(__name__)

TRACE_COLUMNS = ["iteration", "loss", "train_acc"]

CheckpointHook = Callable[[VideoModel, RMSProp, int], None]


@dataclass
class TrainResult:
    """Trained model, optimizer state and per-iteration trace."""

    model: VideoModel
    optimizer: RMSProp
    trace: pd.DataFrame
    iterations: int


@dataclass
class _ChunkResult:
    loss_sum: float
    grads: Dict[str, np.ndarray]
    correct: int


def total_iterations(cfg: TrainConfig, dataset_size: int) -> int:
    if cfg.max_iterations is not None:
        return cfg.max_iterations
    return cfg.max_epochs * max(1, math.ceil(dataset_size / cfg.batch_size))


def _chunk_gradients(
    model: VideoModel,
    batch: StreamBatch,
    masks: Optional[np.ndarray],
    rows: np.ndarray,
) -> _ChunkResult:
    flow = batch.flow[rows] if batch.flow is not None else None
    mask = masks[rows] if masks is not None else None
    labels = batch.labels[rows]
    loss, video_prob = model.loss(batch.inputs[rows], flow, labels, dropout=mask)
    by_tensor = backward(loss)
    count = len(rows)
    grads = {
        key: by_tensor[tensor] * count if tensor in by_tensor else np.zeros_like(tensor.data)
        for key, tensor in model.named_parameters().items()
    }
    correct = int(np.sum(np.argmax(video_prob.data, axis=-1) == labels))
    return _ChunkResult(loss_sum=loss.item() * count, grads=grads, correct=correct)


def compute_batch_gradients(
    model: VideoModel,
    batch: StreamBatch,
    masks: Optional[np.ndarray] = None,
    workers: int = 1,
) -> Tuple[float, Dict[str, np.ndarray], float]:
    """Mean loss, mean gradients and accuracy of ``batch``.

    With several workers the batch is split into contiguous chunks whose
    gradients are computed on parameter replicas and summed in chunk order.
    """
    size = batch.size
    chunks = [rows for rows in np.array_split(np.arange(size), min(workers, size)) if len(rows)]
    if len(chunks) == 1:
        results = [_chunk_gradients(model, batch, masks, chunks[0])]
    else:
        replicas = [model.replicate() for _ in chunks]
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            results = list(pool.map(lambda pair: _chunk_gradients(pair[0], batch, masks, pair[1]), zip(replicas, chunks)))

    grads = {key: np.zeros_like(value) for key, value in results[0].grads.items()}
    loss_sum = 0.0
    correct = 0
    for result in results:
        loss_sum += result.loss_sum
        correct += result.correct
        for key, value in result.grads.items():
            grads[key] += value
    grads = {key: value / size for key, value in grads.items()}
    return loss_sum / size, grads, correct / size


def train(
    clips: Sequence[VideoClip],
    model: VideoModel,
    cfg: TrainConfig,
    *,
    optimizer: Optional[RMSProp] = None,
    start_iteration: int = 0,
    on_checkpoint: Optional[CheckpointHook] = None,
) -> TrainResult:
    """Train ``model`` in place on random snippets of ``clips``.

    Runs until the configured iteration count is reached, so a resumed run
    (``start_iteration > 0``) only performs the remaining iterations.
    """
    if not clips:
        raise UsageError("Cannot train on an empty dataset")
    optimizer = optimizer or RMSProp(cfg)
    rng = np.random.default_rng([cfg.seed, start_iteration])
    total = total_iterations(cfg, len(clips))
    params = model.named_parameters()
    rate = model.config.dropout_rate
    records: List[dict] = []
    size = len(clips)

    _LOGGER.info(
        "Training %s/%s for %d iterations on %d clips (batch %d, snippet %d)",
        model.variant.value,
        model.stream.value,
        max(total - start_iteration, 0),
        size,
        cfg.batch_size,
        cfg.snippet_length,
    )
    for iteration in range(start_iteration + 1, total + 1):
        picks = rng.choice(size, size=cfg.batch_size, replace=size < cfg.batch_size)
        snippets = [sample_snippet(clips[i], cfg.snippet_length, rng) for i in picks]
        batch = prepare_batch(snippets, model.stream, with_flow=model.needs_flow_input)
        masks = None
        if rate > 0.0:
            masks = dropout_mask(rng, (batch.size, cfg.snippet_length, model.head.width), rate)

        try:
            loss, grads, acc = compute_batch_gradients(model, batch, masks, cfg.workers)
        except FloatingPointError as exc:
            raise DivergenceError(
                f"Numerical failure in forward/backward: {exc}",
                iteration=iteration,
                diagnostics={"error": str(exc)},
                last_good=model.state_arrays(),
            ) from exc
        if not math.isfinite(loss):
            raise DivergenceError(
                f"Non-finite loss {loss} at iteration {iteration}",
                iteration=iteration,
                diagnostics={"loss": loss},
                last_good=model.state_arrays(),
            )
        grads, norm = clip_gradients(grads, cfg.grad_clip_norm)
        try:
            optimizer.step(params, grads)
        except DivergenceError as exc:
            exc.iteration = iteration
            exc.diagnostics.setdefault("grad_norm", norm)
            exc.last_good = model.state_arrays()
            raise

        records.append({"iteration": iteration, "loss": loss, "train_acc": acc})
        if iteration % cfg.log_every == 0:
            _LOGGER.info("iteration %d loss %.4f acc %.3f grad-norm %.3f", iteration, loss, acc, norm)
        else:
            _LOGGER.debug("iteration %d loss %.6f", iteration, loss)
        if on_checkpoint is not None and cfg.checkpoint_every and iteration % cfg.checkpoint_every == 0:
            on_checkpoint(model, optimizer, iteration)

    trace = pd.DataFrame.from_records(records, columns=TRACE_COLUMNS)
    return TrainResult(model=model, optimizer=optimizer, trace=trace, iterations=max(total, start_iteration))


def test_protocol(
    clip: VideoClip,
    model: VideoModel,
    segments: int = 25,
    length: int = 16,
) -> np.ndarray:
    """Average of the video predictions of ``segments`` equally spaced windows of ``length`` frames."""
    starts = segment_starts(clip.length, segments, length)
    unique = sorted(set(starts))
    windows = [clip.window(start, length) for start in unique]
    batch = prepare_batch(windows, model.stream, with_flow=model.needs_flow_input)
    probs = model.predict(batch.inputs, batch.flow)
    weights = np.array([starts.count(start) for start in unique], dtype=np.float64)
    averaged = (weights[:, None] * probs).sum(axis=0) / len(starts)
    return averaged / averaged.sum()


# pytest would otherwise collect the protocol as a test when imported into a test module
test_protocol.__test__ = False


def predict_clips(
    clips: Sequence[VideoClip],
    model: VideoModel,
    segments: int = 25,
    length: int = 16,
) -> np.ndarray:
    """``(len(clips), classes)`` segment-averaged distributions."""
    if not clips:
        return np.zeros((0, model.num_classes))
    return np.stack([test_protocol(clip, model, segments, length) for clip in clips])
