"""Exception hierarchy with stable CLI exit codes."""


class OvericaError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InputError(OvericaError):
    """Invalid arguments, shapes, or parameter combinations."""

    exit_code = 2


class FormatError(OvericaError):
    """Malformed or truncated data files."""

    exit_code = 3


class NumericalError(OvericaError):
    """Numerical failure (non-finite values, failed decompositions)."""

    exit_code = 4


class AssumptionError(OvericaError):
    """A model assumption is violated (e.g. dependent atoms)."""

    exit_code = 5


class SamplingError(OvericaError):
    """A rejection-sampling budget was exhausted."""

    exit_code = 6


class DeflationError(OvericaError):
    """Deflation bookkeeping became inconsistent (atom outside the subspace)."""

    exit_code = 4
