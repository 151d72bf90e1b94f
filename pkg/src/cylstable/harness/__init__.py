"""Experiment harness: configuration, gate, checks, reports and the command line."""

from .acceptance import CRITERIA, RUNTIME_LIMITS, run_acceptance
from .config import (DEFAULT_TOLERANCES, ExperimentConfig, check_gate, load_config,
                     parse_config)
from .experiments import gate, run
from .report import Report, Verdict, write_report

__all__ = [
    "CRITERIA",
    "RUNTIME_LIMITS",
    "DEFAULT_TOLERANCES",
    "ExperimentConfig",
    "Report",
    "Verdict",
    "check_gate",
    "gate",
    "load_config",
    "parse_config",
    "run",
    "run_acceptance",
    "write_report",
]
