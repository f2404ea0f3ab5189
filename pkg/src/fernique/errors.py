"""Exception types.

Parameter and shape problems are ``ValueError`` subclasses (the CLI maps
them to exit code 2); numerical failures derive from ``ArithmeticError``
(exit code 3).
"""


class DomainError(ValueError):
    """A parameter lies outside the domain where the operation is defined."""


class StructuralError(ValueError):
    """Operands have incompatible shapes, grids, dimensions or depths."""


class RefusalError(ValueError):
    """The request is valid but deliberately refused (too expensive, degenerate)."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed to produce a trustworthy result."""


class FactorizationError(NumericalError):
    pass


class FitError(NumericalError):
    pass
