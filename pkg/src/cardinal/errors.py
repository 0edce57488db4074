from __future__ import annotations


class ParamError(ValueError):
    """A parameter falls outside its declared domain.

    ``field`` names the offending attribute so config loading can report the
    full key path (``assessment.certainty_hi`` and so on).
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


class ContractViolation(RuntimeError):
    """An operation was called with inputs its contract rules out."""


class InvariantViolation(AssertionError):
    """A runtime invariant check failed during a strict simulation run."""
