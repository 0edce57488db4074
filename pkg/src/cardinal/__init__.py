"""Simulator for cooperative, immune-inspired worm detection and response.

Each host runs a local detector (dendritic-cell style assessment feeding
naive T cells) and shares effector cells with its topology neighbours, which
use them to decide between strong and weak responses.
"""

from .config import RunConfig, load_config, parse_config
from .errors import ConfigError, ContractViolation, InvariantViolation, ParamError
from .harness import ComparisonReport, compare_runs
from .metrics import RunSummary, StepMetrics, summarize
from .netsim import WorldState, build_world, run, step

__all__ = [
    "ComparisonReport",
    "ConfigError",
    "ContractViolation",
    "InvariantViolation",
    "ParamError",
    "RunConfig",
    "RunSummary",
    "StepMetrics",
    "WorldState",
    "build_world",
    "compare_runs",
    "load_config",
    "parse_config",
    "run",
    "step",
    "summarize",
]
__version__ = "0.1.0"
