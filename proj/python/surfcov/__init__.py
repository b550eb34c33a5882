"""Continuous surface-coverage estimation for robot arms."""

from ._surfcov import (
    ContractViolation,
    InitializationError,
    ParseError,
    ProjectionFailure,
    Scenario,
    SingularityError,
    SurfcovError,
    UndefinedMetricError,
    ValidationError,
    baseline,
    baseline_to_dir,
    coverage_fraction,
    explore,
    explore_to_dir,
    importance,
    report,
)

__all__ = [
    "ContractViolation",
    "InitializationError",
    "ParseError",
    "ProjectionFailure",
    "Scenario",
    "SingularityError",
    "SurfcovError",
    "UndefinedMetricError",
    "ValidationError",
    "baseline",
    "baseline_to_dir",
    "coverage_fraction",
    "explore",
    "explore_to_dir",
    "importance",
    "report",
]
