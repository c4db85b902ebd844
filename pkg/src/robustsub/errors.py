"""Exception hierarchy shared by every module."""


class RobustSubError(Exception):
    """Base class for all library errors."""


class InputError(RobustSubError, ValueError):
    """Malformed or out-of-domain input (bad coordinates, duplicate ids, ...)."""


class PreconditionError(RobustSubError, ValueError):
    """A call violated a documented precondition, e.g. ``e in S`` for a gain."""


class CapacityError(RobustSubError):
    """An exhaustive computation would exceed its enumeration guard."""


class NumericIntegrityError(RobustSubError, ArithmeticError):
    """An oracle produced a value that a monotone submodular function cannot."""


class SchemaError(InputError):
    """A dataset or predicate referenced a column that does not exist."""


class FormatError(RobustSubError):
    """A persisted file is truncated, corrupt, or of an unsupported version."""
