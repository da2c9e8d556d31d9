"""Restart CMA-ES with repelling tabu regions and redundant-restart analysis."""
from .benchmarks import PROBLEMS, Problem, make_problem
from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    EvaluationError,
    IoError,
    NumericalError,
    ReportError,
    RRCMAError,
)
from .hill_valley import HvConfig, hv_test
from .redundancy import RestartRecord, RunLedger, classify, is_redundant, rrf
from .repelling import RepellingConfig, run_restart_cmaes, run_rr_cmaes

__version__ = "0.1.0"

__all__ = [
    "PROBLEMS",
    "Problem",
    "make_problem",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "EvaluationError",
    "IoError",
    "NumericalError",
    "ReportError",
    "RRCMAError",
    "HvConfig",
    "hv_test",
    "RestartRecord",
    "RunLedger",
    "classify",
    "is_redundant",
    "rrf",
    "RepellingConfig",
    "run_restart_cmaes",
    "run_rr_cmaes",
]
