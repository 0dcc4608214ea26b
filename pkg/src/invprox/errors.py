"""Exception types shared across the package."""


class InvproxError(Exception):
    """Base class for all package errors."""


class ShapeError(InvproxError, ValueError):
    """Operands have incompatible shapes."""


class DomainError(InvproxError, ValueError):
    """An argument lies outside the domain of an operation."""


class NonFiniteError(DomainError):
    """A NaN or Inf sample reached a module boundary."""


class SizeError(InvproxError, ValueError):
    """Problem too large for dense (desk-scale) evaluation."""


class IllConditionedError(InvproxError, ArithmeticError):
    """Dense system is singular or too badly conditioned to trust."""


class ConvergenceError(InvproxError, RuntimeError):
    """An inner iterative solve did not reach its tolerance."""


class DivergenceError(InvproxError, RuntimeError):
    """Solver iterates blew up; usually the step size is too large."""


class FormatError(InvproxError, ValueError):
    """A file could not be parsed."""
