"""Shared error types for the verifier pipeline.

Every stage raises a subclass of VerifierError so the command line driver
can distinguish usage problems (bad input files, malformed programs) from
internal faults and map them onto exit codes.
"""

from __future__ import annotations


class VerifierError(Exception):
    """Base class for all errors raised by the verifier."""


class SourceError(VerifierError):
    """An error tied to a position in an input file."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col if col is not None else 0}: {message}"
        super().__init__(message)


# --- program front end ---

class SilqSyntaxError(SourceError):
    pass


class UseBeforeDefine(SourceError):
    pass


class UnsupportedFeature(SourceError):
    pass


class SilqTypeError(SourceError):
    pass


class MixedConditionError(SilqTypeError):
    """A condition mixes classical and quantum operands."""


# --- specification front end ---

class SpeqSyntaxError(SourceError):
    pass


class ScopeError(SourceError):
    pass


class FlagError(SourceError):
    pass


class ArityError(SourceError):
    pass


class EncodeError(VerifierError):
    """A well-formed specification construct has no finite encoding."""


class UnboundedQuantifier(EncodeError):
    """Quantification over the unbounded natural type cannot be expanded."""


class NonFiniteFunction(EncodeError):
    """Function types must have a fixed-width bit-vector domain."""


class NoSuchFunction(VerifierError):
    """The named function does not exist in the parsed program."""


class NoClassicalReturn(VerifierError):
    """Skeleton generation needs a function returning a classical value."""


# --- program model and lowering ---

class MemoryOpError(VerifierError):
    pass


class AbsentVariable(MemoryOpError):
    pass


class DuplicateVariable(MemoryOpError):
    pass


class LoweringError(SourceError):
    pass


class NonBooleanCondition(LoweringError):
    """A conditional guard is not a boolean-valued expression."""


# --- gate algebra ---

class AlgebraError(VerifierError):
    pass


class UnsupportedAngle(AlgebraError):
    """Angles must be integer multiples of one quarter pi."""


class WireOutOfRange(AlgebraError):
    pass


class DimensionMismatch(AlgebraError):
    pass


class NonBooleanPredicate(AlgebraError):
    """A control predicate did not evaluate to a 0/1 result."""


# --- obligation generation ---

class ObligationError(VerifierError):
    pass


class ControlOnTarget(ObligationError):
    """A quantum control references the wires the gate acts on."""


class LayoutMismatch(ObligationError):
    pass


class SymbolClash(ObligationError):
    """Two distinct entities would share one solver symbol name."""


# --- solver back end ---

class SolverError(VerifierError):
    pass


class SolverSpawnError(SolverError):
    """The external solver executable could not be started."""


class SolverProtocolError(SolverError):
    """The solver produced output the driver cannot parse."""


class UndeclaredSymbol(SolverError):
    """An obligation references a symbol missing from the table."""


# --- simulation oracle ---

class SimulationError(VerifierError):
    pass


class UnboundOracle(SimulationError):
    """Simulation needs a concrete table for every oracle parameter."""


class DomainTooLarge(SimulationError):
    """Brute-force enumeration was asked for an oracle domain above the cap."""
