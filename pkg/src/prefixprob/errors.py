"""Exception hierarchy shared by every module of the package."""


class PrefixProbError(Exception):
    """Base class for all errors raised by prefixprob."""


class ClosureError(PrefixProbError):
    """A Kleene star or matrix closure could not be computed."""


class NonConvergent(ClosureError):
    """The geometric series behind a star diverges (grammar not tight/trim)."""


class Singular(ClosureError):
    """``I - M`` is not invertible."""


class NegativeEntry(ClosureError):
    """``(I - M)^-1`` has a negative entry, so the series does not converge."""


class DimensionMismatch(PrefixProbError, ValueError):
    pass


class GrammarError(PrefixProbError):
    pass


class GrammarSyntaxError(GrammarError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class DuplicateRule(GrammarError):
    def __init__(self, line, rule):
        self.line = line
        self.rule = rule
        super().__init__(f"line {line}: duplicate rule {rule}")


class UnknownStartSymbol(GrammarError):
    pass


class UnknownToken(PrefixProbError, KeyError):
    def __init__(self, position, token):
        self.position = position
        self.token = token
        super().__init__(position, token)

    def __str__(self):
        return f"unknown token {self.token!r} at position {self.position}"


class YieldTooLong(PrefixProbError, ValueError):
    pass


class GenerationFailed(PrefixProbError):
    pass


class InsufficientData(PrefixProbError, ValueError):
    pass
