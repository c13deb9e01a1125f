"""Frame, saliency and tube figures (requires the ``viz`` extra)."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .data.clip import Box, VideoClip
from .errors import UsageError
from .localization.tubes import Tube

_LOGGER = logging.getLogger(__name__)


def _pyplot():
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:  # pragma: no cover - depends on the optional extra
        raise UsageError("Plotting needs matplotlib; install the 'viz' extra") from exc
    return plt


def _draw_box(ax, box: Optional[Box], color: str, label: Optional[str] = None) -> None:
    if box is None:
        return
    from matplotlib.patches import Rectangle

    ax.add_patch(
        Rectangle(
            (box.x0 - 0.5, box.y0 - 0.5),
            box.width,
            box.height,
            fill=False,
            edgecolor=color,
            linewidth=1.2,
            label=label,
        )
    )


def plot_localization(
    clip: VideoClip,
    saliency: np.ndarray,
    tube: Tube,
    outfile: Path,
    frames: Optional[Sequence[int]] = None,
) -> Path:
    """Save a two-row figure: frames with predicted and ground-truth boxes, saliency below."""
    plt = _pyplot()
    if frames is None:
        frames = sorted(set(np.linspace(0, clip.length - 1, min(clip.length, 6)).round().astype(int).tolist()))
    fig, axes = plt.subplots(2, len(frames), figsize=(2.2 * len(frames), 4.6), squeeze=False)
    for column, t in enumerate(frames):
        top, bottom = axes[0, column], axes[1, column]
        image = clip.frames[t]
        top.imshow(image[..., 0] if image.shape[-1] == 1 else image, cmap="gray", vmin=0.0, vmax=1.0)
        _draw_box(top, tube.boxes[t] if t < tube.length else None, "tab:red", "tube" if column == 0 else None)
        _draw_box(top, clip.boxes[t], "tab:green", "ground truth" if column == 0 else None)
        top.set_title(f"t={t}", fontsize=8)
        bottom.imshow(saliency[t], cmap="inferno", vmin=0.0, vmax=255.0)
        for ax in (top, bottom):
            ax.set_xticks([])
            ax.set_yticks([])
    axes[0, 0].legend(loc="lower left", fontsize=6)
    fig.suptitle(f"{clip.clip_id or tube.video_id}: class {tube.label}", fontsize=9)
    outfile = Path(outfile)
    outfile.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(outfile, bbox_inches="tight", dpi=120)
    plt.close(fig)
    _LOGGER.debug("Saved figure to %s", outfile)
    return outfile


def plot_trace(trace, outfile: Path) -> Path:
    """Loss and training accuracy against iteration."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(trace["iteration"], trace["loss"], label="loss", color="tab:blue")
    ax.set_xlabel("iteration")
    ax.set_ylabel("cross-entropy")
    ax.grid(True, linestyle="--", alpha=0.3)
    twin = ax.twinx()
    twin.plot(trace["iteration"], trace["train_acc"], label="train accuracy", color="tab:orange", alpha=0.7)
    twin.set_ylim(0.0, 1.05)
    fig.legend(loc="upper right")
    outfile = Path(outfile)
    outfile.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(outfile, bbox_inches="tight")
    plt.close(fig)
    return outfile
