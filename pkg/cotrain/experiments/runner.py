"""Top level of `exp run` / `exp report`: plan, run, write results, read them back, check them."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import yaml

from cotrain.experiments.acceptance import CheckResult, check_results
from cotrain.experiments.config import DEFAULT_ACCEPTANCE, ExperimentConfig, config_summary
from cotrain.experiments.protocols import run_protocol
from cotrain.experiments.results import ResultRow, emit_results, read_results, summarize_rows

logger = logging.getLogger(__name__)

CONFIG_COPY = "config.yaml"


@dataclass
class ExperimentRun:
    rows: List[ResultRow]
    seconds: float

    @property
    def diverged(self) -> bool:
        return any(r.diverged for r in self.rows)

    @property
    def exit_code(self) -> int:
        return 1 if self.diverged else 0


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path, threads: Optional[int] = None) -> ExperimentRun:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for line in config_summary(cfg):
        logger.info(line)
    (out / CONFIG_COPY).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True), encoding="utf-8")
    start = time.perf_counter()
    rows = run_protocol(cfg, threads=threads)
    emit_results(rows, out)
    run = ExperimentRun(rows=rows, seconds=time.perf_counter() - start)
    if run.diverged:
        logger.error("%s: %d cells diverged", cfg.name, sum(r.diverged for r in rows))
    logger.info("%s finished in %.1fs", cfg.name, run.seconds)
    return run


def stored_margins(out_dir: str | Path) -> Dict[str, float]:
    path = Path(out_dir) / CONFIG_COPY
    margins = dict(DEFAULT_ACCEPTANCE)
    if path.is_file():
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        margins.update(data.get("acceptance") or {})
    else:
        logger.warning("%s not found, using default acceptance margins", path)
    return margins


def summary_table(rows: List[ResultRow]) -> str:
    lines = []
    for protocol, conditions in summarize_rows(rows).items():
        lines.append(protocol)
        width = max(len(c) for c in conditions)
        for condition, stats in conditions.items():
            lines.append(f"  {condition.ljust(width)}  {stats['mean']:.3f} +/- {stats['std']:.3f}  (n={stats['n']})")
    return "\n".join(lines)


def report(out_dir: str | Path) -> List[CheckResult]:
    rows = read_results(out_dir)
    return check_results(rows, stored_margins(out_dir))
