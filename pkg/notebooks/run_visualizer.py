"""Quick plotting helper for training runs and attention tubes."""
from __future__ import annotations

from pathlib import Path
from typing import Optional

import pandas as pd

from videolstm.config import RunConfig
from videolstm.data import create_clip_source
from videolstm.localization import localize_video
from videolstm.model import load_checkpoint
from videolstm.plotting import plot_localization, plot_trace
from videolstm.preprocessing import prepare_batch


def plot_run(
    run_dir: str,
    clip_id: Optional[str] = None,
    split: str = "test",
    outdir: Optional[str] = None,
) -> None:
    run = Path(run_dir)
    target = Path(outdir) if outdir else run / "figures"
    trace = pd.read_csv(run / "trace.csv")
    print(f"Saved figure to {plot_trace(trace, target / 'trace.png')}")

    if clip_id is None:
        return
    cfg = RunConfig.from_file(run / "resolved_config.json")
    model = load_checkpoint(run / "checkpoint").model
    clips = {clip.clip_id: clip for clip in create_clip_source(cfg.data).load(split)}
    if clip_id not in clips:
        raise SystemExit(f"Clip '{clip_id}' not in the {split} split")
    clip = clips[clip_id]

    batch = prepare_batch([clip], model.stream, with_flow=model.needs_flow_input)
    output = model.forward_sequence(batch.inputs, batch.flow)
    loc = localize_video(
        output.attention_weights()[0],
        output.frame_probs()[0],
        cfg.localization,
        (clip.height, clip.width),
        clip.clip_id,
    )
    print(f"Saved figure to {plot_localization(clip, loc.saliency, loc.tube, target / f'{clip_id}.png')}")


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description="Plot a run's loss trace and, optionally, one clip's tube")
    parser.add_argument("--run", required=True, help="Directory written by 'videolstm train'")
    parser.add_argument("--clip", help="Clip id to localize with the run's checkpoint")
    parser.add_argument("--split", default="test")
    parser.add_argument("--output")
    args = parser.parse_args()

    plot_run(run_dir=args.run, clip_id=args.clip, split=args.split, outdir=args.output)
