"""Shared exception types."""


class NumericalError(RuntimeError):
    """An iteration produced non-finite values or failed to converge."""
