"""Exception hierarchy for spinwigner.

Every error also derives from a builtin category so callers can catch
either ``SpinWignerError`` or e.g. ``ValueError``. The CLI maps the
categories onto exit codes.
"""


class SpinWignerError(Exception):
    """Base class for all spinwigner errors."""


class InvalidDimensionError(SpinWignerError, ValueError):
    """Hilbert-space or group dimension out of range."""


class InvalidSpinError(SpinWignerError, ValueError):
    """Spin quantum number is not a non-negative half-integer."""


class ArgumentError(SpinWignerError, ValueError):
    """Arguments of an operation do not fit together (shapes, lengths, names)."""


class ContractViolationError(SpinWignerError, ValueError):
    """Input violates an operator precondition (Hermitian, unitary, ...)."""


class DomainError(SpinWignerError, ValueError):
    """Phase-space point lies outside the fundamental domain of a measure."""


class InvalidStateError(SpinWignerError, ValueError):
    """A state specification or state file does not describe a density operator."""


class ResourceLimitError(SpinWignerError, RuntimeError):
    """A configured size cap (dimension, grid, frame) would be exceeded."""


class NumericContractError(SpinWignerError, ArithmeticError):
    """A computed quantity violates its numeric contract (e.g. imaginary residue)."""


class NotInformationallyCompleteError(SpinWignerError, ArithmeticError):
    """The frame operator is singular: the kernel cannot reconstruct states."""
