"""Exception hierarchy shared by every covert_lab module."""


class CovertLabError(Exception):
    """Base class for all errors raised by covert_lab."""


class DomainError(CovertLabError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class ConvergenceError(CovertLabError, RuntimeError):
    """An iterative routine exhausted its iteration budget."""


class BracketError(CovertLabError, ValueError):
    """A root-finding bracket does not enclose a sign change."""


class FeasibilityError(CovertLabError, ValueError):
    """A quantity is undefined because its conditioning event has probability zero."""


class ConditioningStarvationError(CovertLabError, RuntimeError):
    """Rejection sampling accepted too few draws to estimate a conditional probability."""


class ConfigError(CovertLabError, ValueError):
    """A sweep, recipe or CLI configuration is incomplete or invalid."""
