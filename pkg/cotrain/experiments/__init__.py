from cotrain.experiments.acceptance import CheckResult, check_results
from cotrain.experiments.bank import DataBank
from cotrain.experiments.config import ExperimentConfig, Protocol, load_experiment
from cotrain.experiments.protocols import (
    PROTOCOLS,
    run_camera_ablation,
    run_mix_table,
    run_protocol,
    run_ratio_sweep,
    run_real_scaling,
    run_sim_quantity,
    run_unseen_objects,
    run_unseen_positions,
)
from cotrain.experiments.results import ResultRow, emit_results, read_results
from cotrain.experiments.runner import ExperimentRun, report, run_experiment

__all__ = [
    "CheckResult",
    "DataBank",
    "ExperimentConfig",
    "ExperimentRun",
    "PROTOCOLS",
    "Protocol",
    "ResultRow",
    "check_results",
    "emit_results",
    "load_experiment",
    "read_results",
    "report",
    "run_camera_ablation",
    "run_experiment",
    "run_mix_table",
    "run_protocol",
    "run_ratio_sweep",
    "run_real_scaling",
    "run_sim_quantity",
    "run_unseen_objects",
    "run_unseen_positions",
]
