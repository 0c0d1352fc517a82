"""Simulation tools: distribution families, rate studies and tail checks."""

from .families import FAMILIES, GaussianShift, UniformShift, get_family
from .harness import RateSchedule, SimConfig, TrialResult, rate_fit, run_study, run_trial

__all__ = [
    "FAMILIES",
    "GaussianShift",
    "UniformShift",
    "get_family",
    "RateSchedule",
    "SimConfig",
    "TrialResult",
    "rate_fit",
    "run_study",
    "run_trial",
]
