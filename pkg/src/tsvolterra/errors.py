"""Exception hierarchy for tsvolterra."""


class TSVolterraError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(TSVolterraError):
    """Invalid user input: literals, scenarios, numeric settings."""


class MathError(TSVolterraError):
    """A well-posed request whose mathematics failed (divergence, violations)."""


# time scales

class PointNotInTimeScale(ConfigError):
    pass


class InvalidStep(ConfigError):
    pass


class TimeScaleSyntaxError(ConfigError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


# calculus

class NodeNotOnGrid(ConfigError):
    pass


class ReversedBounds(ConfigError):
    pass


class AtRightEndpoint(ConfigError):
    pass


class NotRegressive(MathError):
    pass


class NotPositivelyRegressive(MathError):
    pass


class NotNondecreasing(MathError):
    pass


class GridMismatch(ConfigError):
    pass


# expressions

class ExprSyntaxError(ConfigError):
    """Malformed expression text.

    ``offset`` is the UTF-8 byte offset of the offending token and
    ``expected`` the set of token kinds that would have been accepted there.
    """

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at byte {offset}"
        if self.expected:
            detail += "; expected one of: " + ", ".join(sorted(self.expected))
        super().__init__(detail)


class UnknownIdentifier(ExprSyntaxError):
    pass


class DomainError(ConfigError):
    """Expression evaluated outside its real domain."""


class EvaluationOverflow(DomainError):
    """Expression result overflowed to a non-finite value."""


# solver / bracketing

class NonFiniteIterate(MathError):
    def __init__(self, iteration, node):
        super().__init__(f"iterate {iteration} is not finite at t={node!r}")
        self.iteration = iteration
        self.node = node


class InvalidBracket(MathError):
    pass


class SectorEscape(MathError):
    pass


class NotMonotone(MathError):
    pass
