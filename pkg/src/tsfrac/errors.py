"""Exception hierarchy shared by all modules.

Every error carries the name of the module that raised it so that the
command-line front end can report where a failure originated.
"""

from __future__ import annotations


class TsFracError(Exception):
    """Base class for all package errors."""

    module = "tsfrac"

    def __str__(self) -> str:
        return f"[{self.module}] {super().__str__()}"


class ConfigError(TsFracError):
    """Malformed configuration, descriptor or command-line input."""

    module = "config"


class NumericError(TsFracError):
    """Base class for failures of a numerical procedure."""


# timescale


class EmptyTimeScale(ConfigError):
    module = "timescale"


class PointNotInScale(NumericError):
    module = "timescale"

    def __init__(self, t: float, detail: str = "") -> None:
        self.t = t
        msg = f"point {t!r} does not belong to the time scale"
        super().__init__(msg + (f" ({detail})" if detail else ""))


class UnboundedScale(ConfigError):
    module = "timescale"


# exprlang


class ExprError(ConfigError):
    module = "exprlang"


class ExprSyntaxError(ExprError):
    def __init__(self, position: int, message: str, source: str = "") -> None:
        self.position = position
        self.message = message
        self.source = source
        super().__init__(f"syntax error at position {position}: {message}"
                         + (f" in {source!r}" if source else ""))


class UnknownIdentifier(ExprError):
    pass


class ArityMismatch(ExprError):
    pass


class UndeclaredVariable(ExprError):
    pass


class DomainError(NumericError):
    module = "exprlang"

    def __init__(self, message: str, node: object = None) -> None:
        self.node = node
        super().__init__(message)


# calculus


class NotInKappa(NumericError):
    module = "calculus"


class NoConvergence(NumericError):
    module = "calculus"


class QuadratureFailure(NumericError):
    module = "calculus"


class NotIncreasing(NumericError):
    module = "calculus"


# fracops


class NonMonotoneWeight(NumericError):
    module = "fracops"


class ZeroWeightDerivative(NumericError):
    module = "fracops"


# solver / oracle


class NonFiniteValue(NumericError):
    module = "solver"


class ScaleHasContinuousPart(ConfigError):
    module = "oracle"
