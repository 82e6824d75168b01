"""Reactive, proactive and prediction-based proactive HARQ under latency budgets."""
from .errors import (
    ConfigurationError,
    ConstraintError,
    DomainError,
    HarqError,
    InfeasibleError,
    ValidationError,
)
from .model import (
    ErrorProfile,
    Evaluation,
    OperatingPoint,
    Scenario,
    eeg,
    energy_efficiency,
    evaluate_early_predictive,
    evaluate_predictive,
    evaluate_proactive,
    evaluate_reactive,
)
from .optimize import OptimizationResult, optimize_operating_point, optimize_reactive_schedule
from .roc import RocCurve, RocSet, binormal_curve, fn_at, load_roc_set, save_roc_set
from .simulate import SimStats, TrialOutcome, enumerate_exact, simulate

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "ConstraintError",
    "DomainError",
    "ErrorProfile",
    "Evaluation",
    "HarqError",
    "InfeasibleError",
    "OperatingPoint",
    "OptimizationResult",
    "RocCurve",
    "RocSet",
    "Scenario",
    "SimStats",
    "TrialOutcome",
    "ValidationError",
    "binormal_curve",
    "eeg",
    "energy_efficiency",
    "enumerate_exact",
    "evaluate_early_predictive",
    "evaluate_predictive",
    "evaluate_proactive",
    "evaluate_reactive",
    "fn_at",
    "load_roc_set",
    "optimize_operating_point",
    "optimize_reactive_schedule",
    "save_roc_set",
    "simulate",
]
