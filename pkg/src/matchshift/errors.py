"""Exception hierarchy shared by every module."""


class MatchshiftError(Exception):
    """Base class for all library errors."""


class ParseError(MatchshiftError, ValueError):
    pass


class DuplicateEntry(MatchshiftError, ValueError):
    def __init__(self, agent, partner):
        super().__init__(f"{agent} lists {partner} more than once")
        self.agent = agent
        self.partner = partner


class IndexOutOfRange(MatchshiftError, IndexError):
    pass


class ZeroCapacity(MatchshiftError, ValueError):
    pass


class InvalidPair(MatchshiftError, ValueError):
    pass


class UnstableInitialMatching(MatchshiftError, ValueError):
    pass


class ZeroDenominator(MatchshiftError, ZeroDivisionError):
    pass


class TiesUnsupported(MatchshiftError, ValueError):
    pass


class BudgetExceeded(MatchshiftError, RuntimeError):
    """An exponential search hit its node budget before finishing."""


class BudgetTooLarge(BudgetExceeded):
    """The enumeration would exceed the node budget before it starts."""


class NoSolutionWithinK(MatchshiftError, RuntimeError):
    pass


class TooManyTypes(MatchshiftError, ValueError):
    pass


class NoStableMatching(MatchshiftError, RuntimeError):
    pass


class WrongChangeType(MatchshiftError, ValueError):
    pass


class InstanceTooLarge(MatchshiftError, ValueError):
    pass


# the reduction verifier reports the same condition under this name
OracleTooLarge = InstanceTooLarge


class DistanceOutOfRange(MatchshiftError, ValueError):
    pass


class FractionOutOfRange(MatchshiftError, ValueError):
    pass


class ScriptMismatch(MatchshiftError, ValueError):
    pass


class DegenerateInput(MatchshiftError, ValueError):
    pass


class EmptyInput(MatchshiftError, ValueError):
    pass
