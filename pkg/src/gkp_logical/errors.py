"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the mathematical domain of an operation."""


class ConvergenceError(RuntimeError):
    """A truncated sum or quadrature failed its accuracy check."""


class OracleError(RuntimeError):
    """An oracle cross-check disagreed with the closed-form path."""


class CutoffError(OracleError):
    """A Fock-space truncation is too small for the requested accuracy."""
