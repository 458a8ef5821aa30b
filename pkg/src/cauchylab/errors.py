"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class CauchylabError(Exception):
    """Base class for all library errors."""


class CurveFormatError(CauchylabError, ValueError):
    """A curve specification file could not be parsed."""


class PreconditionError(CauchylabError, ValueError):
    """An operation was called with inputs violating its contract."""


class GridTooNarrowError(PreconditionError):
    """The grid cannot host the requested construction; the caller must widen it."""


class NumericalCheckError(CauchylabError, ArithmeticError):
    """A quantitative invariant that should hold by construction was violated."""
