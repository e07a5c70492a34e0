"""Multigrid for hybridized finite element trace systems."""

from ._core import (
    Config,
    ConfigError,
    Instance,
    NumericalError,
    ParseError,
    SolveResult,
    TopologyError,
    converge,
    run,
    snapped_split,
)

__all__ = [
    "Config",
    "ConfigError",
    "Instance",
    "NumericalError",
    "ParseError",
    "SolveResult",
    "TopologyError",
    "converge",
    "run",
    "snapped_split",
]
