"""Exception types shared across the package."""


class RetailGameError(Exception):
    """Base class for all package errors."""


class DomainError(RetailGameError, ValueError):
    """Argument outside the mathematical domain of a function."""


class InvalidInputError(RetailGameError, ValueError):
    """Input violates a documented precondition or type invariant."""


class DegeneratePricingError(InvalidInputError):
    """Imbalance prices leave the cost ratio undefined or at 0/1."""


class UnboundedQuantileError(InvalidInputError):
    """Optimal quantity would be infinite (cost ratio of 0 or 1 with spread)."""


class SolverStalledError(RetailGameError, RuntimeError):
    """The simplex iteration cap was hit."""


class ConfigError(RetailGameError):
    """Scenario configuration failed validation."""


class DataError(RetailGameError):
    """Load profile or value-table file failed validation."""
