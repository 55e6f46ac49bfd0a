"""Exception types shared across the package.

The CLI maps these to exit codes: ValidationError -> 2, BudgetExceededError -> 3.
"""


class KnpercError(Exception):
    """Base class for all package errors."""


class ValidationError(KnpercError):
    """Invalid parameters or an operation undefined for the given model."""


class BudgetExceededError(KnpercError):
    """An enumeration would exceed the configured resource budget."""
