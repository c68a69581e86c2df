"""Exception hierarchy shared by all modules."""


class BPError(Exception):
    """Base class for every error raised by bpdyn."""


class NonFiniteInput(BPError, ValueError):
    pass


class InfeasibleOnSupport(BPError):
    """b is not in the image of A restricted to the positive-weight columns."""


class RankDeficient(BPError, ValueError):
    pass


class DisconnectedInstance(BPError, ValueError):
    pass


class ZeroWeightNonzeroFlow(BPError, ValueError):
    pass


class NonPositiveWeight(BPError, ValueError):
    pass


class TooLargeForExactAlpha(BPError):
    pass


class TooLargeForOracle(BPError):
    pass


class BadEpsilon(BPError, ValueError):
    pass


class StepSizeHypothesisViolated(BPError):
    pass


class FormatError(BPError, ValueError):
    """Malformed instance, graph or trace file."""
