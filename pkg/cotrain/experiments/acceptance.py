"""Ordering checks over seed-averaged results, with margins from the config's acceptance block."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Sequence

import numpy as np

from cotrain.experiments.config import DEFAULT_ACCEPTANCE, Protocol
from cotrain.experiments import protocols as P
from cotrain.experiments.results import ResultRow

logger = logging.getLogger(__name__)

Means = Dict[str, float]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def condition_means(rows: Sequence[ResultRow], protocol: str) -> Means:
    grouped: Dict[str, List[float]] = {}
    for row in rows:
        if row.protocol == protocol:
            grouped.setdefault(row.condition, []).append(row.score)
    return {cond: float(np.mean(scores)) for cond, scores in sorted(grouped.items())}


def inversions(values: Sequence[float]) -> int:
    """Adjacent decreases in a sequence that should not decrease."""
    return sum(1 for a, b in zip(values, values[1:]) if b < a)


def _missing(name: str, means: Means, needed: Sequence[str]) -> List[CheckResult]:
    absent = [c for c in needed if c not in means]
    if absent:
        return [CheckResult(name, False, f"missing conditions {absent}")]
    return []


def check_mix_table(means: Means, margins: Mapping[str, float]) -> List[CheckResult]:
    gate = _missing("mix table", means, (P.REAL, P.REAL_DC, P.REAL_DC_PRIOR))
    if gate:
        return gate
    margin = margins["cotrain_margin"]
    gain = means[P.REAL_DC] - means[P.REAL]
    return [
        CheckResult("Real+DC beats Real", gain >= margin, f"gain {gain:+.3f} (margin {margin:+.3f})"),
        CheckResult(
            "Real+DC+Prior not below Real",
            means[P.REAL_DC_PRIOR] >= means[P.REAL],
            f"{means[P.REAL_DC_PRIOR]:.3f} vs {means[P.REAL]:.3f}",
        ),
    ]


def check_ratio_sweep(means: Means, margins: Mapping[str, float]) -> List[CheckResult]:
    interior = [P.alpha_label(a) for a in (0.9, 0.99)]
    low, high = P.alpha_label(0.5), P.alpha_label(0.999)
    gate = _missing("ratio sweep", means, interior + [low, high])
    if gate:
        return gate
    best = max(means[c] for c in interior)
    return [
        CheckResult("interior ratio beats 0.5", best > means[low], f"{best:.3f} vs {means[low]:.3f}"),
        CheckResult("interior ratio beats 0.999", best > means[high], f"{best:.3f} vs {means[high]:.3f}"),
    ]


def _counts(means: Means, prefix: str) -> List[int]:
    pattern = re.compile(re.escape(prefix) + r"@(\d+)$")
    return sorted(int(m.group(1)) for m in (pattern.match(c) for c in means) if m)


def check_real_scaling(means: Means, margins: Mapping[str, float]) -> List[CheckResult]:
    counts = _counts(means, P.REAL_ONLY)
    if not counts:
        return [CheckResult("real scaling", False, "no real-only rows")]
    margin = margins["real_scaling_margin"]
    allowed = int(margins["inversions_allowed"])
    results = []
    for count in counts:
        real, co = means[P.count_label(P.REAL_ONLY, count)], means.get(P.count_label(P.COTRAINED, count))
        if co is None:
            results.append(CheckResult(f"co-trained at {count}", False, "missing co-trained row"))
            continue
        results.append(CheckResult(f"co-trained >= real-only at {count}", co - real >= margin, f"{co:.3f} vs {real:.3f}"))
    curve = [means[P.count_label(P.REAL_ONLY, c)] for c in counts]
    n_inv = inversions(curve)
    results.append(CheckResult("real-only grows with demos", n_inv <= allowed, f"{n_inv} inversions over {counts}"))
    return results


def check_sim_quantity(means: Means, margins: Mapping[str, float]) -> List[CheckResult]:
    counts = _counts(means, "sim")
    if not counts:
        return [CheckResult("sim quantity", False, "no rows")]
    curve = [means[P.count_label("sim", c)] for c in counts]
    n_inv = inversions(curve)
    allowed = int(margins["inversions_allowed"])
    return [CheckResult("more sim demos do not hurt", n_inv <= allowed, f"{n_inv} inversions over {counts}")]


def check_camera_ablation(means: Means, margins: Mapping[str, float]) -> List[CheckResult]:
    gate = _missing("camera ablation", means, (P.ALIGNED, P.MISALIGNED))
    if gate:
        return gate
    results = [
        CheckResult(
            "aligned >= misaligned",
            means[P.ALIGNED] >= means[P.MISALIGNED],
            f"{means[P.ALIGNED]:.3f} vs {means[P.MISALIGNED]:.3f}",
        )
    ]
    if P.REAL_ONLY in means:
        results.append(
            CheckResult(
                "misaligned >= real-only",
                means[P.MISALIGNED] >= means[P.REAL_ONLY],
                f"{means[P.MISALIGNED]:.3f} vs {means[P.REAL_ONLY]:.3f}",
            )
        )
    return results


def _generalization(name: str, means: Means, suffix: str, margin: float) -> List[CheckResult]:
    real, co = f"{P.REAL_ONLY}@{suffix}", f"{P.COTRAINED}@{suffix}"
    gate = _missing(name, means, (real, co))
    if gate:
        return gate
    gain = means[co] - means[real]
    return [CheckResult(name, gain >= margin, f"gain {gain:+.3f} (margin {margin:+.3f})")]


def check_unseen_positions(means: Means, margins: Mapping[str, float]) -> List[CheckResult]:
    return _generalization("co-trained beats real-only at center", means, "center", margins["unseen_position_margin"])


def check_unseen_objects(means: Means, margins: Mapping[str, float]) -> List[CheckResult]:
    # strict improvement, no calibrated margin
    real, co = f"{P.REAL_ONLY}@unseen", f"{P.COTRAINED}@unseen"
    gate = _missing("unseen objects", means, (real, co))
    if gate:
        return gate
    return [CheckResult("co-trained beats real-only on unseen objects", means[co] > means[real], f"{means[co]:.3f} vs {means[real]:.3f}")]


CHECKS: Dict[str, Callable[[Means, Mapping[str, float]], List[CheckResult]]] = {
    Protocol.MIX_TABLE.value: check_mix_table,
    Protocol.RATIO_SWEEP.value: check_ratio_sweep,
    Protocol.REAL_SCALING.value: check_real_scaling,
    Protocol.SIM_QUANTITY.value: check_sim_quantity,
    Protocol.CAMERA_ABLATION.value: check_camera_ablation,
    Protocol.UNSEEN_POSITIONS.value: check_unseen_positions,
    Protocol.UNSEEN_OBJECTS.value: check_unseen_objects,
}


def check_results(rows: Sequence[ResultRow], margins: Mapping[str, float] | None = None) -> List[CheckResult]:
    """Run the checks for every protocol present in `rows`."""
    merged = dict(DEFAULT_ACCEPTANCE)
    merged.update(margins or {})
    out: List[CheckResult] = []
    for protocol in sorted({r.protocol for r in rows}):
        check = CHECKS.get(protocol)
        if check is None:
            logger.warning("no acceptance checks for protocol %r", protocol)
            continue
        out += check(condition_means(rows, protocol), merged)
    diverged = sum(r.diverged for r in rows)
    out.append(CheckResult("no diverged cells", diverged == 0, f"{diverged} diverged"))
    return out
