"""Exception hierarchy shared by the solver modules and the CLI."""

from __future__ import annotations


class ResolventError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ExprError(ResolventError, ValueError):
    """An expression could not be parsed. ``offset`` is a 1-based column."""

    exit_code = 2
    kind = "syntax error"

    def __init__(self, message: str, offset: int):
        self.message = message
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class ExprSyntaxError(ExprError):
    kind = "syntax error"


class UnknownIdentifierError(ExprError):
    kind = "unknown identifier"


class ArityError(ExprError):
    kind = "wrong arity"


class AsymmetricKernelError(ResolventError, ValueError):
    exit_code = 3

    def __init__(self, asymmetry: float, scale: float):
        self.asymmetry = asymmetry
        self.scale = scale
        super().__init__(
            f"kernel is not symmetric: max |K(x,t) - K(t,x)| = {asymmetry:.3e} "
            f"(max |K| = {scale:.3e})"
        )


class EigenvalueHitError(ResolventError, ArithmeticError):
    """lambda lies on (or within the guard distance of) a characteristic value."""

    exit_code = 4

    def __init__(self, lam: float, k: int, lambda_k: float):
        self.lam = lam
        self.k = k
        self.lambda_k = lambda_k
        super().__init__(
            f"lambda = {lam!r} is (near) an eigenvalue, offending k = {k} "
            f"(lambda_k = {lambda_k!r})"
        )


class TruncationError(ResolventError, ValueError):
    """Requested truncation exceeds the data available (depth or spectrum count)."""


class DomainError(ResolventError, ValueError):
    """Evaluation point outside the kernel's interval."""


class KernelEvaluationError(ResolventError, ValueError):
    """Kernel produced non-finite values on the quadrature grid."""


class AnnihilationError(ResolventError, ArithmeticError):
    """The annihilation factor 1 - alpha*lambda vanishes."""

    exit_code = 4
