"""Two-sample data model.

A :class:`TwoSample` stores the pooled points of two samples in canonical
order (all of X, then all of Y) together with the signed per-point weight
vector ``a`` that drives the graph total-variation statistic:

    a_i = 1/n1 for points of X,   a_i = -1/n2 for points of Y.

The weights always sum to zero.  ``a_int`` is the same vector on the common
integer scale n1*n2 (entries n2 and -n1), which downstream solvers use for
exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exceptions import DimensionMismatch, EmptySample

__all__ = ["TwoSample", "build_two_sample"]


@dataclass(frozen=True, eq=False)
class TwoSample:
    """Pooled two-sample point set with signed weights.

    Attributes
    ----------
    points : ndarray of shape (n1 + n2, d)
        Pooled coordinates, X block first, then Y block.  Read-only.
    n1, n2 : int
        Sample sizes of X and Y.
    """

    points: np.ndarray
    n1: int
    n2: int
    _a_int: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.n1 <= 0 or self.n2 <= 0:
            raise EmptySample("both samples must contain at least one point")
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise DimensionMismatch("points must be a 2-d array of shape (n, d)")
        if pts.shape[0] != self.n1 + self.n2:
            raise DimensionMismatch(
                f"points has {pts.shape[0]} rows, expected n1 + n2 = {self.n1 + self.n2}"
            )
        if not np.isfinite(pts).all():
            raise ValueError("points must be finite")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        a_int = np.concatenate(
            [
                np.full(self.n1, self.n2, dtype=np.int64),
                np.full(self.n2, -self.n1, dtype=np.int64),
            ]
        )
        a_int.flags.writeable = False
        object.__setattr__(self, "_a_int", a_int)

    @property
    def n(self) -> int:
        """Total number of pooled points."""
        return self.n1 + self.n2

    @property
    def dim(self) -> int:
        """Coordinate dimension d."""
        return int(self.points.shape[1])

    @property
    def a_int(self) -> np.ndarray:
        """Weight vector scaled by n1*n2: entries n2 on X, -n1 on Y."""
        return self._a_int

    @property
    def a(self) -> tuple[Fraction, ...]:
        """Exact weight vector (1/n1 on X, -1/n2 on Y)."""
        scale = self.n1 * self.n2
        return tuple(Fraction(int(v), scale) for v in self._a_int)

    def is_x(self, i: int) -> bool:
        """True when pooled index ``i`` belongs to the X block."""
        return i < self.n1


def build_two_sample(x_points, y_points) -> TwoSample:
    """Validate and pool two samples into a :class:`TwoSample`.

    Parameters
    ----------
    x_points : array-like of shape (n1, d)
    y_points : array-like of shape (n2, d)

    Raises
    ------
    EmptySample
        If either sample is empty.
    DimensionMismatch
        If the samples do not share the same coordinate dimension.
    """
    x = np.atleast_2d(np.asarray(x_points, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y_points, dtype=np.float64))
    if x.size == 0 or y.size == 0:
        raise EmptySample("both samples must contain at least one point")
    if x.ndim != 2 or y.ndim != 2:
        raise DimensionMismatch("samples must be 2-d arrays of shape (n, d)")
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch(
            f"x has dimension {x.shape[1]} but y has dimension {y.shape[1]}"
        )
    return TwoSample(points=np.vstack([x, y]), n1=x.shape[0], n2=y.shape[0])
