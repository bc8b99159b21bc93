"""Seeded experiments, reports and the command line interface."""
from .config import ConfigError, ExperimentConfig, load_config
from .experiments import (RUNNERS, run_convergence, run_experiment, run_fdd, run_limit_equivalence, run_littles_law,
                          run_lln, run_oracle_suite)
from .report import ExperimentReport, Row

__all__ = [
    "ConfigError", "ExperimentConfig", "load_config", "RUNNERS", "run_convergence", "run_experiment", "run_fdd",
    "run_limit_equivalence", "run_littles_law", "run_lln", "run_oracle_suite", "ExperimentReport", "Row",
]
