"""Result rows and their on-disk form: results.csv, summary.json, timings.json."""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from cotrain.errors import ConfigError, CorruptManifest

logger = logging.getLogger(__name__)

RESULTS_CSV = "results.csv"
SUMMARY_JSON = "summary.json"
TIMINGS_JSON = "timings.json"

CSV_FIELDS = ("protocol", "condition", "seed", "score", "checkpoint_used", "checkpoint_scores", "diverged")


@dataclass
class ResultRow:
    protocol: str
    condition: str
    seed: int
    score: float  # best mean success level over checkpoints
    checkpoint_used: int  # training step of the chosen checkpoint, -1 if none
    wallclock: float = 0.0
    checkpoint_scores: Tuple[float, ...] = ()
    diverged: bool = False
    error: str = ""

    def __post_init__(self) -> None:
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score must be in [0, 1], got {self.score}")

    @property
    def sort_key(self) -> Tuple[str, str, int]:
        return (self.protocol, self.condition, self.seed)

    def csv_record(self) -> List[str]:
        return [
            self.protocol,
            self.condition,
            str(self.seed),
            _fmt(self.score),
            str(self.checkpoint_used),
            ";".join(_fmt(s) for s in self.checkpoint_scores),
            "1" if self.diverged else "0",
        ]


def _fmt(value: float) -> str:
    return format(float(value), ".6f")


def sorted_rows(rows: Sequence[ResultRow]) -> List[ResultRow]:
    return sorted(rows, key=lambda r: r.sort_key)


def results_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in sorted_rows(rows):
        writer.writerow(row.csv_record())
    return buf.getvalue()


def summarize_rows(rows: Sequence[ResultRow]) -> Dict[str, Dict[str, Dict[str, Any]]]:
    """protocol -> condition -> mean/std/n over seeds."""
    grouped: Dict[Tuple[str, str], List[ResultRow]] = {}
    for row in sorted_rows(rows):
        grouped.setdefault((row.protocol, row.condition), []).append(row)
    out: Dict[str, Dict[str, Dict[str, Any]]] = {}
    for (protocol, condition), group in grouped.items():
        scores = np.array([r.score for r in group], dtype=np.float64)
        out.setdefault(protocol, {})[condition] = {
            "mean": round(float(scores.mean()), 6),
            "std": round(float(scores.std()), 6),
            "n": len(group),
            "seeds": [r.seed for r in group],
            "diverged": sum(r.diverged for r in group),
        }
    return out


def emit_results(rows: Sequence[ResultRow], path: str | Path) -> Dict[str, Path]:
    """Write the CSV, the per-condition summary and the wallclock sidecar into directory `path`."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    written = {
        RESULTS_CSV: root / RESULTS_CSV,
        SUMMARY_JSON: root / SUMMARY_JSON,
        TIMINGS_JSON: root / TIMINGS_JSON,
    }
    written[RESULTS_CSV].write_text(results_csv(rows), encoding="utf-8")
    written[SUMMARY_JSON].write_text(json.dumps(summarize_rows(rows), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    timings = [
        {"protocol": r.protocol, "condition": r.condition, "seed": r.seed, "wallclock_s": round(r.wallclock, 3), "error": r.error}
        for r in sorted_rows(rows)
    ]
    written[TIMINGS_JSON].write_text(json.dumps(timings, indent=2) + "\n", encoding="utf-8")
    logger.info("wrote %d result rows to %s", len(rows), root)
    return written


def read_results(path: str | Path) -> List[ResultRow]:
    """Rows back from a results directory (or a CSV file); wallclock is not stored there."""
    target = Path(path)
    if target.is_dir():
        target = target / RESULTS_CSV
    if not target.is_file():
        raise ConfigError(f"no results at {target}")
    rows: List[ResultRow] = []
    with target.open("r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise CorruptManifest(f"{target}: unexpected header {reader.fieldnames}")
        for record in reader:
            scores = record["checkpoint_scores"]
            rows.append(
                ResultRow(
                    protocol=record["protocol"],
                    condition=record["condition"],
                    seed=int(record["seed"]),
                    score=float(record["score"]),
                    checkpoint_used=int(record["checkpoint_used"]),
                    checkpoint_scores=tuple(float(s) for s in scores.split(";")) if scores else (),
                    diverged=record["diverged"] == "1",
                )
            )
    return rows
