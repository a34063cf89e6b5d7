"""Exception types shared across the package."""


class IrregularStrengthError(Exception):
    """Base class for every error raised here."""


class ParseError(IrregularStrengthError):
    pass


class SelfLoop(IrregularStrengthError):
    pass


class DuplicateEdge(IrregularStrengthError):
    pass


class InfeasibleDegreeSequence(IrregularStrengthError):
    pass


class PreconditionError(IrregularStrengthError, ValueError):
    pass


class DomainMismatch(IrregularStrengthError):
    pass


class InfiniteStrength(IrregularStrengthError):
    """Graph has an isolated edge or two isolated vertices."""


class InvalidParameters(IrregularStrengthError, ValueError):
    pass


class RecoverableFailure(IrregularStrengthError):
    """A randomized stage failed; the engine may reseed and retry."""


class PartitionDegenerate(RecoverableFailure):
    pass


class CapacityExceeded(RecoverableFailure):
    pass


class GreedyInfeasible(RecoverableFailure):
    pass


class ThresholdFailure(RecoverableFailure):
    pass


class OrderingInvariantViolation(RecoverableFailure):
    pass


class NoAssignmentFound(IrregularStrengthError):
    pass
