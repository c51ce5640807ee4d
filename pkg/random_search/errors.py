"""Exception hierarchy. ``exit_code`` is what the CLI returns for each family."""

from __future__ import annotations


class SearchLabError(Exception):
    exit_code = 1


class ConfigError(SearchLabError, ValueError):
    exit_code = 1


class InvalidDimensionError(ConfigError):
    pass


class PlanningError(ConfigError):
    pass


class CapViolationError(ConfigError):
    """A step size exceeds the cap a check or planner requires."""


class DataError(SearchLabError, ValueError):
    exit_code = 2


class InvalidLabelError(DataError):
    pass


class EmptyDatasetError(DataError):
    pass


class NumericalAbortError(SearchLabError, ArithmeticError):
    exit_code = 3


class PilotError(NumericalAbortError):
    pass


class SnapshotError(SearchLabError, RuntimeError):
    pass
