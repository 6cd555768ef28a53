"""
Covert secrecy rate analysis for a wiretap link watched by a detector.

Alice talks to Bob while Willie tries to detect the transmission and Eve
tries to decode it; the two attackers either act independently or pool
their signals. Alice hides either by lowering her power (PC) or by
mixing artificial noise into a fixed power budget (AN).
"""

from .exceptions import (
    BracketError,
    ConditioningStarvationError,
    ConfigError,
    ConvergenceError,
    CovertLabError,
    DomainError,
    FeasibilityError,
)
from .link_model import (
    ALL_SCENARIOS,
    FA,
    FP,
    IA,
    IP,
    NoiseProfile,
    ScenarioId,
    SecurityConstraints,
    TransmitConfig,
    db_to_linear,
    linear_to_db,
)
from .solver import CsrSolution, Regime, solve, solve_reference

__version__ = "0.1.0"

__all__ = [
    "ALL_SCENARIOS",
    "IP",
    "IA",
    "FP",
    "FA",
    "NoiseProfile",
    "ScenarioId",
    "SecurityConstraints",
    "TransmitConfig",
    "db_to_linear",
    "linear_to_db",
    "CsrSolution",
    "Regime",
    "solve",
    "solve_reference",
    "CovertLabError",
    "DomainError",
    "ConvergenceError",
    "BracketError",
    "FeasibilityError",
    "ConditioningStarvationError",
    "ConfigError",
]
