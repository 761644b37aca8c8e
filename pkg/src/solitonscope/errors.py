"""Exception hierarchy shared by every module."""


class SolitonscopeError(Exception):
    """Base class for all errors raised by solitonscope."""


class ExprSyntaxError(SolitonscopeError, ValueError):
    """Malformed expression text. ``offset`` is a byte offset into the UTF-8 input."""

    def __init__(self, message, text="", offset=0):
        self.text = text
        self.offset = offset
        super().__init__(f"{message} at byte {offset}")


class EvalError(SolitonscopeError):
    pass


class UnboundVariableError(EvalError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unbound variable {name!r}")


class DomainError(EvalError):
    """Evaluation left the domain of a function (log of a non-positive number, ...)."""

    def __init__(self, message, subexpr=None):
        self.subexpr = subexpr
        if subexpr is not None:
            message = f"{message} in {subexpr}"
        super().__init__(message)


class GeometryError(SolitonscopeError):
    """A sample point where the geometry cannot be evaluated."""


class RankDeficiencyError(GeometryError):
    pass


class SingularMetricError(GeometryError):
    pass


class ExcludedPointError(GeometryError):
    pass


class NotApplicableError(SolitonscopeError):
    """The preconditions of an identity check are not met."""


class ConfigError(SolitonscopeError):
    pass


class NumericalFailure(SolitonscopeError):
    """Too many sample points failed to evaluate."""
