"""Exception types raised by the channel model."""


class M2IError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(M2IError, ValueError):
    """An argument lies outside the domain of a function."""


class UnknownPreset(M2IError, KeyError):
    pass


class SingularSystem(M2IError, ArithmeticError):
    """A boundary system is numerically singular."""


class LayerMismatch(M2IError, ValueError):
    pass


class MethodMismatch(M2IError, ValueError):
    pass


class NoResonance(M2IError, ValueError):
    pass


class NoSignChange(M2IError, ValueError):
    pass


class QuadratureFailure(M2IError, RuntimeError):
    pass


class DegenerateTuning(M2IError, ValueError):
    pass


class NoCrossing(M2IError, ValueError):
    """The response never falls 3 dB below its peak inside the span."""


class SchemaError(M2IError, ValueError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class UnitError(SchemaError):
    pass
