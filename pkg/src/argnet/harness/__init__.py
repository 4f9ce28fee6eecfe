"""CLI, sweeps, case studies and run classification."""

from .casestudies import CASE_STUDIES, CaseStudyDefinition, case_study
from .classify import classify_runs, run_labels
from .experiment import ExperimentSpec, SpecError, SweepResult, read_aggregate, run_sweep

__all__ = [
    "CASE_STUDIES",
    "CaseStudyDefinition",
    "ExperimentSpec",
    "SpecError",
    "SweepResult",
    "case_study",
    "classify_runs",
    "read_aggregate",
    "run_labels",
    "run_sweep",
]
