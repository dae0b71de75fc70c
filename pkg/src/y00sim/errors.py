"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigError(ValueError):
    """An experiment configuration failed validation.

    ``fields`` lists the offending dotted field names.
    """

    def __init__(self, message, fields=()):
        super().__init__(message)
        self.fields = tuple(fields)


class ResourceLimitError(RuntimeError):
    """A desk-scale enumeration or search budget would be exceeded."""


class QuadratureError(ArithmeticError):
    """Numerical integration failed to reach the requested tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
