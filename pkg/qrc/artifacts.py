"""
Versioned CSV artifacts.

Every file starts with ``# qrc-csv v1 <kind>`` followed by a fixed header.
Floats are written with full round-trip precision and missing values as
``n/a`` so that identical runs produce byte-identical files.
"""
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import pandas as pd

from .exceptions import SchemaError

logger = logging.getLogger(__name__)

CSV_VERSION = 1
MISSING = "n/a"

COLUMNS = {
    "traces": ["k", "l", "m", "t_seconds", "signal"],
    "metrics": ["task", "M", "mse", "digitized_errors"],
    "predictions": ["task", "M", "instance", "input", "target", "prediction"],
    "plot": ["source", "task", "x", "y"],
    "surface": ["task", "s1", "s2", "target", "prediction"],
}
# never let pandas guess these; "0101" must stay a bit string
_TEXT_COLUMNS = {"task": str, "input": str, "source": str}

_VERSION_LINE = re.compile(r"^# qrc-csv v(\d+) (\w+)$")


@dataclass
class RunArtifacts:
    output_dir: Path
    config: Optional[Path] = None
    traces: Optional[Path] = None
    metrics: Optional[Path] = None
    predictions: Optional[Path] = None
    plot: Optional[Path] = None
    surface: Optional[Path] = None
    summary: Optional[Path] = None

    def written(self):
        return [p for p in (self.config, self.traces, self.metrics, self.predictions,
                            self.plot, self.surface, self.summary) if p is not None]


def version_line(kind: str) -> str:
    return f"# qrc-csv v{CSV_VERSION} {kind}"


def write_csv(path, kind: str, frame: pd.DataFrame) -> Path:
    if kind not in COLUMNS:
        raise SchemaError(f"unknown artifact kind {kind!r}")
    missing = [c for c in COLUMNS[kind] if c not in frame.columns]
    if missing:
        raise SchemaError(f"{kind} frame lacks columns {missing}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(version_line(kind) + "\n")
        frame[COLUMNS[kind]].to_csv(fh, index=False, na_rep=MISSING, lineterminator="\n")
    logger.info("wrote %s (%d rows) to %s", kind, len(frame), path)
    return path


def read_csv(path, kind: Optional[str] = None) -> pd.DataFrame:
    """Read an artifact, checking its version line and header."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\r\n")
        match = _VERSION_LINE.match(first)
        if not match:
            raise SchemaError(f"{path}: missing '# qrc-csv v<N> <kind>' version line")
        version, found = int(match.group(1)), match.group(2)
        if version != CSV_VERSION:
            raise SchemaError(f"{path}: unsupported qrc-csv version v{version} (expected v{CSV_VERSION})")
        if found not in COLUMNS:
            raise SchemaError(f"{path}: unknown artifact kind {found!r}")
        if kind is not None and found != kind:
            raise SchemaError(f"{path}: expected a {kind} file, found {found}")
        frame = pd.read_csv(fh, dtype=_TEXT_COLUMNS, na_values=[MISSING], keep_default_na=False)
    if list(frame.columns) != COLUMNS[found]:
        raise SchemaError(f"{path}: header {list(frame.columns)} does not match {COLUMNS[found]}")
    frame.attrs["kind"] = found
    return frame


def traces_frame(traces) -> pd.DataFrame:
    rows = []
    for k, trace in enumerate(traces, start=1):
        times = trace.sample_times()
        L, M = trace.signals.shape
        for l in range(L):
            for m in range(M):
                rows.append((k, l + 1, m + 1, float(times[l, m]), float(trace.signals[l, m])))
    return pd.DataFrame(rows, columns=COLUMNS["traces"])


def metrics_frame(reports) -> pd.DataFrame:
    rows = [
        (r.task.name, r.m_used, r.mse, pd.NA if r.digitized_errors is None else r.digitized_errors)
        for r in reports
    ]
    frame = pd.DataFrame(rows, columns=COLUMNS["metrics"])
    frame["digitized_errors"] = frame["digitized_errors"].astype("Int64")
    return frame


def predictions_frame(reports) -> pd.DataFrame:
    rows = [
        (r.task.name, r.m_used, i, inst.input, inst.target, inst.prediction)
        for r in reports
        for i, inst in enumerate(r.per_instance, start=1)
    ]
    return pd.DataFrame(rows, columns=COLUMNS["predictions"])


def plot_frame(metrics: dict) -> pd.DataFrame:
    """Long-format MSE-vs-M data from {source name: metrics frame}."""
    parts = []
    for source, frame in metrics.items():
        part = frame.rename(columns={"M": "x", "mse": "y"})[["task", "x", "y"]].copy()
        part.insert(0, "source", source)
        parts.append(part)
    if not parts:
        return pd.DataFrame(columns=COLUMNS["plot"])
    return pd.concat(parts, ignore_index=True).sort_values(["source", "task", "x"], kind="stable")


def surface_frame(predictions: pd.DataFrame) -> pd.DataFrame:
    """Function-task predictions over the (s1, s2) grid at the largest M per task."""
    functional = predictions[predictions["input"].str.contains(":", regex=False)]
    if functional.empty:
        return pd.DataFrame(columns=COLUMNS["surface"])
    best_m = functional.groupby("task")["M"].transform("max")
    functional = functional[functional["M"] == best_m]
    pairs = functional["input"].str.split(":", expand=True).astype(float)
    return pd.DataFrame({
        "task": functional["task"].to_numpy(),
        "s1": pairs[0].to_numpy(),
        "s2": pairs[1].to_numpy(),
        "target": functional["target"].to_numpy(),
        "prediction": functional["prediction"].to_numpy(),
    })


def summary_table(metrics: pd.DataFrame) -> str:
    """Plain-text table: one row per task, one column per M."""
    table = metrics.pivot_table(index="task", columns="M", values="mse", aggfunc="first", sort=False)
    table.columns = [f"M={m}" for m in table.columns]
    errors = metrics.groupby("task", sort=False)["digitized_errors"].last()
    table["errors"] = errors.map(lambda e: MISSING if pd.isna(e) else str(int(e)))
    return table.to_string(float_format=lambda v: f"{v:.3e}")
