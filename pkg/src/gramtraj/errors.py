"""Exception hierarchy shared by all gramtraj modules.

Every error raised on a user-facing path derives from :class:`GramtrajError`
so callers (and the CLI) can map failures to a small set of exit codes.
"""


class GramtrajError(Exception):
    """Base class for all gramtraj errors."""


class DegenerateConfig(GramtrajError):
    """Landmark configuration has numerical rank below the ambient dimension."""


class DimensionMismatch(GramtrajError):
    """Operands disagree on landmark count or ambient dimension."""


class NotSPD(GramtrajError):
    """A matrix required to be symmetric positive definite is not."""


class PartTooSmall(GramtrajError):
    """A body-part index set is invalid or has fewer than d+1 landmarks."""


class MissingPart(GramtrajError):
    """A fusion ensemble was queried without inputs for one of its parts."""


class SingleClass(GramtrajError):
    """Classifier training requires at least two distinct labels."""


class ParseError(GramtrajError):
    """A sequence, schema, or config file could not be parsed."""


class ShapeError(GramtrajError):
    """Frames within one sequence disagree on landmark count or dimension."""


class NaNError(GramtrajError):
    """A sequence file contains non-finite coordinates."""


class ProtocolInfeasible(GramtrajError):
    """The requested cross-validation protocol cannot be built for this dataset."""


class UnreachableLength(GramtrajError):
    """Threshold bisection could not hit the requested trajectory length."""


class ConfigError(GramtrajError):
    """A run configuration is missing a required key or holds an invalid value."""
