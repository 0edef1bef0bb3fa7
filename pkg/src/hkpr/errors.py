"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An argument is outside the domain an operation is defined on."""


class GraphFormatError(ValueError):
    """Malformed or unusable graph input."""
