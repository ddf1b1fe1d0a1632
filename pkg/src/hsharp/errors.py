"""Exception hierarchy shared by all hsharp modules."""


class HSharpError(Exception):
    """Base class for every error raised by hsharp."""


class DimensionError(HSharpError, ValueError):
    """Points, kernels or exponent vectors with incompatible dimensions."""


class DomainError(HSharpError, ValueError):
    """An argument lies outside the domain of the operation."""


class PoleError(DomainError):
    """Evaluation at a pole of a special function."""


class SingularPointError(DomainError):
    """A kernel evaluated at a point where it is undefined."""


class PreconditionError(DomainError):
    """Inputs violate a documented precondition (e.g. 0/0 ratios)."""


class DivergenceError(HSharpError, ArithmeticError):
    """A numerical integral or supremum was detected to diverge."""


class InfiniteConstantError(DivergenceError):
    """A sharp constant is infinite for the given exponents."""


class InternalConsistencyError(HSharpError, RuntimeError):
    """Two computation paths disagree beyond their combined error."""
