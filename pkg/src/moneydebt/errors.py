"""Exception hierarchy shared by every module."""


class ModelError(Exception):
    """Base class for all errors raised by moneydebt."""


class NumericalError(ModelError):
    """Runtime numerical failure (CLI exit code 2)."""


# fock
class DimensionTooLarge(ModelError, ValueError):
    pass


class EmptySector(ModelError, ValueError):
    pass


class NotInBasis(ModelError, KeyError):
    pass


class IndexOutOfRange(ModelError, IndexError):
    pass


# ops
class SectorMismatch(ModelError, ValueError):
    pass


class SameMode(ModelError, ValueError):
    pass


class UnknownLabel(ModelError, KeyError):
    pass


class BasisMismatch(ModelError, ValueError):
    pass


# hamiltonian
class DimensionMismatch(ModelError, ValueError):
    pass


class ScheduleViolatesInitialCondition(ModelError, ValueError):
    pass


# states
class VacuumNotInSector(ModelError, ValueError):
    pass


class NotNormalized(ModelError, ValueError):
    pass


class IncompleteProjectors(ModelError, ValueError):
    pass


class ZeroProbabilityCollapse(NumericalError):
    pass


# evolve
class NonHermitian(ModelError, ValueError):
    pass


class DimensionTooLargeForDense(ModelError, ValueError):
    pass


class StepNormDrift(NumericalError):
    pass


# observe
class InvalidPartition(ModelError, ValueError):
    pass


class InvalidDensityMatrix(NumericalError):
    pass


class WrongBasisKind(ModelError, TypeError):
    pass


# exciton1d
class TooManyStates(ModelError, ValueError):
    pass


class NonFinitePotential(ModelError, ValueError):
    pass


# scenario
class ParseError(ModelError):
    pass


class ValidationError(ModelError):
    """Config failed schema validation.

    ``errors`` holds every problem found as ``(path, message)`` pairs, e.g.
    ``("terms[1].viol.delta_pr", "must be >= 0")``.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(f"{p}: {m}" if p else m for p, m in self.errors))


class UnsupportedFormat(ModelError, ValueError):
    pass
