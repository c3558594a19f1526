"""Error types raised across the pipeline.

Each class derives from the builtin that callers would catch for the same
situation, so ``except ValueError`` keeps working around library calls.
"""

__all__ = [
    "CStarError",
    "StructuralError",
    "UnknownMorphismError",
    "PreconditionError",
    "DomainError",
    "NotBisectionError",
    "IncompatibleJoinError",
    "UnboundedCategoryError",
    "NotSinglyAlignedError",
    "DegreeError",
    "NotHullElementError",
    "SubgroupoidError",
    "InputError",
    "InputSyntaxError",
    "ResourceCapError",
    "ToleranceError",
    "ConsistencyError",
]


class CStarError(Exception):
    """Base class for every error raised by combinatorial_cstar."""


class StructuralError(CStarError, ValueError):
    """A table references unknown IDs or has the wrong shape."""


class UnknownMorphismError(CStarError, ValueError):
    pass


class PreconditionError(CStarError, ValueError):
    pass


class DomainError(PreconditionError):
    """θ_s applied to a filter outside D_{s*s}."""


class NotBisectionError(PreconditionError):
    pass


class IncompatibleJoinError(PreconditionError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class UnboundedCategoryError(CStarError, ValueError):
    """Finite-only operation requested on a depth-bounded category."""


class NotSinglyAlignedError(CStarError, ValueError):
    pass


class DegreeError(CStarError, ValueError):
    pass


class NotHullElementError(CStarError, ValueError):
    pass


class SubgroupoidError(CStarError, ValueError):
    pass


class InputError(CStarError, ValueError):
    pass


class InputSyntaxError(InputError):
    def __init__(self, message, line=None, column=None):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ResourceCapError(CStarError, RuntimeError):
    pass


class ToleranceError(CStarError, RuntimeError):
    pass


class ConsistencyError(CStarError, RuntimeError):
    """Two independent computations of the same object disagree."""
