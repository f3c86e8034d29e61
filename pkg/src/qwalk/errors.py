"""Exception hierarchy shared by all qwalk modules."""


class QWalkError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(QWalkError, ValueError):
    """An argument is outside the documented domain."""


class DimensionError(ValidationError):
    """Operands have non-conformable shapes."""


class SizeError(QWalkError):
    """A requested object exceeds a dimension or budget cap."""


class ErgodicityError(QWalkError):
    """The chain is reducible or periodic."""


class UnsupportedChainError(QWalkError):
    """The operation needs a reversible (or symmetric) chain."""


class SingularityError(QWalkError):
    """A stationary distribution has zero mass where positivity is required."""


class NoSolutionError(QWalkError):
    """Every TTS entry is infinite."""


class LandscapeFormatError(ValidationError):
    """A landscape file does not follow the text format.

    ``line`` is the 1-based line number of the offending line, or ``None``
    when the problem is global (e.g. a wrong line count).
    """

    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
