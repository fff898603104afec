"""Experiment orchestration: config, metrics, checkpoints, CLI, export."""

from .config import RunConfig, load_config, save_config
from .metrics import MetricsRecord, MetricsWriter, read_metrics
from .runners import (evaluate_policy, make_env, run_baseline, run_eval,
                      run_export, run_oracle, run_train)

__all__ = [
    "RunConfig", "load_config", "save_config",
    "MetricsRecord", "MetricsWriter", "read_metrics",
    "evaluate_policy", "make_env", "run_baseline", "run_eval",
    "run_export", "run_oracle", "run_train",
]
