"""Exception hierarchy shared by every qdiode module."""


class DiodeError(Exception):
    """Base class for all errors raised by qdiode."""


class ConfigError(DiodeError, ValueError):
    """A physical parameter set violates a model invariant."""


class NonPositiveTemperature(ConfigError):
    pass


class NonPositiveRate(ConfigError):
    pass


class LengthMismatch(ConfigError):
    pass


class NonPositiveBohrFrequency(ConfigError):
    pass


class AuxBathUnsupported(ConfigError):
    pass


class DomainError(DiodeError, ValueError):
    """Argument outside the domain where a formula is defined."""


class IndexOutOfRange(DiodeError, IndexError):
    pass


class KernelDimensionMismatch(DiodeError):
    """Supplied subspace weights do not match the generator's kernel."""


class NonConvergence(DiodeError):
    pass


class StepSizeUnderflow(DiodeError):
    pass


class InvariantViolation(DiodeError):
    pass


class RateMismatch(DiodeError):
    """The four net rates around a subspace cycle disagree."""


class BothCurrentsZero(DiodeError):
    """Rectification is 0/0 because neither direction carries heat."""


class ParseError(DiodeError):
    pass


class ValidationError(DiodeError, ValueError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class UnknownFigure(DiodeError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnsupportedFormat(DiodeError, ValueError):
    pass


class EmptyTable(DiodeError, ValueError):
    pass
