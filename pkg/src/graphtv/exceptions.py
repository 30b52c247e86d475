"""Exception hierarchy for graphtv.

All library errors derive from :class:`GraphTVError` so callers can catch
one base class at API boundaries (the CLI maps subclasses to exit codes).
"""


class GraphTVError(Exception):
    """Base class for all graphtv errors."""


class DimensionMismatch(GraphTVError):
    """Point sets do not share a common coordinate dimension."""


class EmptySample(GraphTVError):
    """A sample with zero points was supplied where one or more is required."""


class KTooLarge(GraphTVError):
    """Requested neighbor count k exceeds n - 1."""


class OutOfDomain(GraphTVError):
    """A point lies outside the open unit cube required for binning."""


class BinningMismatch(GraphTVError):
    """A binning was combined with a sample it was not derived from."""


class GraphDisconnected(GraphTVError):
    """The neighborhood graph is disconnected, so the statistic is degenerate."""


class TooLarge(GraphTVError):
    """Instance exceeds the size limit of an exhaustive-enumeration routine."""
