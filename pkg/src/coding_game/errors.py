"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """A configuration or utility specification violates a required invariant."""


class DegenerateInputError(ValueError):
    """Input data is too degenerate for the requested construction."""
