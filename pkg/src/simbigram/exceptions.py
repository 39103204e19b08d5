"""Exception hierarchy shared by all modules."""


class SimBigramError(Exception):
    """Base class for errors raised by this package."""


class CorpusError(SimBigramError, ValueError):
    pass


class EmptyCorpusError(CorpusError):
    pass


class IngestionError(CorpusError):
    """Raised when input bytes cannot be decoded; carries the byte offset."""

    def __init__(self, offset, reason="invalid UTF-8"):
        self.offset = offset
        super().__init__(f"{reason} at byte offset {offset}")


class CountsParseError(CorpusError):
    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class CountsValidationError(CorpusError):
    pass


class NotSeenError(SimBigramError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "not a seen bigram"


class DomainError(SimBigramError, ValueError):
    pass


class DegenerateDistributionError(SimBigramError, ArithmeticError):
    pass


class NoNeighborsError(SimBigramError, ValueError):
    pass


class ZeroProbabilityError(SimBigramError, ArithmeticError):
    def __init__(self, w1, w2):
        self.bigram = (w1, w2)
        super().__init__(f"model assigned zero probability to bigram ({w1!r}, {w2!r})")


class ConfigError(SimBigramError, ValueError):
    pass


class LatticeError(SimBigramError, ValueError):
    pass


class CycleError(LatticeError):
    pass
