"""Evaluation reports: JSON, aligned plain-text tables and CSV curves."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

REPORT_NAME = "report.json"
RECALL_NAME = "recall.csv"
MAP_NAME = "map.csv"


def _cell(value, digits: int) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def format_table(df: pd.DataFrame, columns: Optional[Sequence[str]] = None, digits: int = 4) -> str:
    """Left-aligned columns, a header and a dashed rule."""
    if df.empty:
        return "No rows."
    columns = list(columns or df.columns)
    cells = df[columns].apply(lambda column: column.map(lambda value: _cell(value, digits)))
    widths = {col: max(len(str(col)), cells[col].map(len).max()) for col in columns}
    lines = [
        " ".join(f"{str(col):<{widths[col]}}" for col in columns),
        " ".join("-" * widths[col] for col in columns),
    ]
    for _, row in cells.iterrows():
        lines.append(" ".join(f"{row[col]:<{widths[col]}}" for col in columns))
    return "\n".join(lines)


def _records(df: pd.DataFrame) -> List[dict]:
    return [
        {key: (None if isinstance(value, float) and math.isnan(value) else value) for key, value in row.items()}
        for row in df.to_dict(orient="records")
    ]


@dataclass
class EvalReport:
    """Accuracy and localization metrics of one evaluation run."""

    accuracy: Optional[float] = None
    num_videos: int = 0
    mean_iou: Dict[str, float] = field(default_factory=dict)
    map: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=["iou_threshold", "mAP", "classes"]))
    recall: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=["tube", "iou_threshold", "recall"]))
    failures: List[dict] = field(default_factory=list)
    details: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = [self.accuracy, *self.mean_iou.values()]
        values += [v for v in self.map.get("mAP", pd.Series(dtype=float)).tolist()]
        values += self.recall.get("recall", pd.Series(dtype=float)).tolist()
        for value in values:
            if value is None or (isinstance(value, float) and math.isnan(value)):
                continue
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"Metric value {value} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "num_videos": self.num_videos,
            "mean_iou": dict(self.mean_iou),
            "map": _records(self.map),
            "recall": _records(self.recall),
            "failures": list(self.failures),
            "details": dict(self.details),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=str)

    def format_text(self) -> str:
        lines = []
        if self.accuracy is not None:
            lines.append(f"accuracy: {self.accuracy:.4f} ({self.num_videos} videos)")
        for name, value in self.mean_iou.items():
            lines.append(f"mean tube IoU ({name}): {value:.4f}")
        if self.failures:
            lines.append(f"videos without a tube: {len(self.failures)}")
        if not self.map.empty:
            lines.extend(["", format_table(self.map)])
        if not self.recall.empty:
            lines.extend(["", format_table(self.recall)])
        return "\n".join(lines)

    def write(self, out_dir: Path) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / REPORT_NAME
        path.write_text(self.to_json())
        if not self.recall.empty:
            self.recall.to_csv(out_dir / RECALL_NAME, index=False)
        if not self.map.empty:
            self.map.to_csv(out_dir / MAP_NAME, index=False)
        return path
