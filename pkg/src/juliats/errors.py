"""Exception hierarchy.

Every numerical failure derives from :class:`NumericalError` so the CLI can
map them to a single exit code.
"""


class NumericalError(Exception):
    """Base class for failures of a numerical pipeline."""


class ZeroLambda(NumericalError, ValueError):
    pass


class IncompatibleIndex(NumericalError, ValueError):
    pass


class OutOfDomain(NumericalError, ValueError):
    pass


class DomainError(NumericalError, ValueError):
    pass


class DegenerateBranch(NumericalError):
    pass


class NewtonDiverged(NumericalError):
    pass


class NotRepelling(NumericalError):
    pass


class DedupFailure(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class ResonanceFailure(NumericalError):
    pass


class OutsideInversionRadius(NumericalError):
    pass


class BranchAmbiguity(NumericalError):
    pass


class InvariantViolation(NumericalError):
    def __init__(self, name, residual, tolerance):
        self.name = name
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(f"{name}: residual {residual:.3e} exceeds {tolerance:.1e}")


class BranchSelectionFailure(NumericalError):
    pass


class EmptyComplement(NumericalError):
    pass


class DerivativeVanishes(NumericalError):
    pass


class NoBracket(NumericalError):
    pass
