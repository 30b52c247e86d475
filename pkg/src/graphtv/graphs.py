"""Geometric graph and binning constructions over pooled samples.

Provides the epsilon-neighborhood graph, the symmetrized k-nearest-neighbor
graph, the torus grid graph used by binned statistics, and the cube binning
of the unit box.  All constructions are deterministic: edge sets are
canonicalized (i < j, lexicographically sorted) and nearest-neighbor ties
are broken by lower candidate index.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from .data import TwoSample
from .exceptions import BinningMismatch, EmptySample, KTooLarge, OutOfDomain

__all__ = [
    "Graph",
    "Binning",
    "eps_graph",
    "knn_graph",
    "default_radius",
    "is_connected",
    "bin_partition",
    "torus_graph",
    "binned_assignment",
]

_MAX_CELLS = 10**8


def _as_points(data) -> np.ndarray:
    """Coerce a TwoSample or array-like to a validated (n, d) float array."""
    if isinstance(data, TwoSample):
        return data.points
    pts = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if pts.ndim != 2 or pts.size == 0:
        raise EmptySample("at least one point with at least one coordinate is required")
    if not np.isfinite(pts).all():
        raise ValueError("points must be finite")
    return pts


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph with a canonical edge array.

    Attributes
    ----------
    n_vertices : int
    edges : ndarray of shape (m, 2), dtype int64
        Deduplicated undirected edges with edges[k, 0] < edges[k, 1],
        sorted lexicographically.
    """

    n_vertices: int
    edges: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        e.flags.writeable = False
        object.__setattr__(self, "edges", e)

    @classmethod
    def from_edges(cls, n_vertices: int, edges) -> "Graph":
        """Build a graph from an iterable of (i, j) pairs, canonicalizing."""
        if n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= n_vertices:
                raise ValueError("edge endpoint out of range")
            if (e[:, 0] == e[:, 1]).any():
                raise ValueError("self-loops are not allowed")
            e = np.sort(e, axis=1)
            e = np.unique(e, axis=0)
        return cls(n_vertices=n_vertices, edges=e)

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        """Vertex degrees as an int64 array of length n_vertices."""
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        if self.edges.size:
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def adjacency_lists(self) -> list[list[int]]:
        """Neighbor lists indexed by vertex."""
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for i, j in self.edges:
            adj[int(i)].append(int(j))
            adj[int(j)].append(int(i))
        return adj


def eps_graph(data, eps: float) -> Graph:
    """Neighborhood graph joining points within distance eps.

    The boundary is inclusive: an edge {i, j} is present iff
    ||z_i - z_j||_2 <= eps.  A spatial index keeps expected cost near
    linear; the edge set is identical to the O(n^2) definition.

    Parameters
    ----------
    data : TwoSample or array-like of shape (n, d)
        Pooled points (vertex i is row i).
    eps : float
        Positive connection radius.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    pts = _as_points(data)
    tree = cKDTree(pts)
    pairs = tree.query_pairs(r=float(eps), output_type="ndarray")
    return Graph.from_edges(len(pts), pairs)


def _knn_row_exact(pts: np.ndarray, i: int, k: int) -> np.ndarray:
    """k nearest neighbors of row i by full scan, ties to lower index."""
    diff = pts - pts[i]
    d2 = np.einsum("ij,ij->i", diff, diff)
    d2[i] = np.inf
    order = np.lexsort((np.arange(len(pts)), d2))
    return order[:k]


def knn_graph(data, k: int) -> Graph:
    """Symmetrized k-nearest-neighbor graph on the points.

    Each point contributes edges to its k nearest neighbors (squared
    Euclidean distance, ties broken by lower candidate index) and the
    union over directions is taken, so degrees are at least k.

    Parameters
    ----------
    data : TwoSample or array-like of shape (n, d)
        Pooled points (vertex i is row i).
    k : int

    Raises
    ------
    KTooLarge
        If k exceeds n - 1.
    """
    pts = np.ascontiguousarray(_as_points(data))
    n = len(pts)
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > n - 1:
        raise KTooLarge(f"k = {k} exceeds n - 1 = {n - 1}")
    tree = cKDTree(pts)
    # Query extra candidates so a distance tie crossing the k-th slot is
    # detectable; affected rows fall back to an exact full scan.
    kq = min(n, k + 2)
    _, nbr = tree.query(pts, k=kq)
    nbr = np.atleast_2d(nbr)
    edges = []
    for i in range(n):
        cand = nbr[i][nbr[i] != i]
        diff = pts[cand] - pts[i]
        d2 = np.einsum("ij,ij->i", diff, diff)
        order = np.lexsort((cand, d2))
        chosen = cand[order[:k]]
        d2_sorted = d2[order]
        boundary_tie = len(d2_sorted) > k and d2_sorted[k - 1] == d2_sorted[-1]
        if boundary_tie or len(cand) < k:
            chosen = _knn_row_exact(pts, i, k)
        for j in chosen:
            edges.append((i, int(j)))
    return Graph.from_edges(n, edges)


def default_radius(n, d: int, density_bound: float = 2.0) -> float:
    """Connection radius (24 B)^(1/d) * 2 sqrt(d) * (ln n / n)^(1/d).

    Parameters
    ----------
    n : real
        Pooled sample size, n >= 2 (real-valued n is accepted since the
        formula is continuous in n).
    d : int
        Dimension, d >= 1.
    density_bound : float
        Upper bound B on the density, B > 0 (default 2).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if d < 1:
        raise ValueError("d must be at least 1")
    if density_bound <= 0:
        raise ValueError("density bound must be positive")
    return (
        (24.0 * density_bound) ** (1.0 / d)
        * 2.0
        * math.sqrt(d)
        * (math.log(n) / n) ** (1.0 / d)
    )


def is_connected(g: Graph) -> bool:
    """True iff the graph has a single connected component (BFS)."""
    n = g.n_vertices
    if n <= 1:
        return True
    adj = g.adjacency_lists()
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                queue.append(v)
    return count == n


@dataclass(frozen=True, eq=False)
class Binning:
    """Cube binning of pooled points inside the open unit box.

    Cells are the N^d half-open cubes [c/N, (c+1)/N) per axis with
    N = floor(1/eps); linear cell indices are C-order over the d axes.

    Attributes
    ----------
    d : int
    n_cells_per_axis : int
    cell_width : float
        The requested binwidth eps (actual cell side is 1/N).
    cell_index_of : ndarray of shape (n,)
        Linear cell index of each pooled point, in pooled order.
    counts_x, counts_y : ndarray of shape (N^d,)
        Per-cell point counts of each sample.
    n1, n2 : int
        Sample sizes the binning was derived from.
    """

    d: int
    n_cells_per_axis: int
    cell_width: float
    cell_index_of: np.ndarray
    counts_x: np.ndarray
    counts_y: np.ndarray
    n1: int
    n2: int

    def __post_init__(self) -> None:
        for name in ("cell_index_of", "counts_x", "counts_y"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_cells(self) -> int:
        return int(self.n_cells_per_axis**self.d)


def bin_partition(ts: TwoSample, eps: float) -> Binning:
    """Bin pooled points into the N^d cube cells, N = floor(1/eps).

    Raises
    ------
    OutOfDomain
        If any coordinate lies outside the open interval (0, 1).
    """
    if not 0 < eps <= 1:
        raise ValueError("binwidth eps must lie in (0, 1]")
    pts = ts.points
    if pts.min() <= 0.0 or pts.max() >= 1.0:
        raise OutOfDomain("binning requires all coordinates in the open unit box")
    d = ts.dim
    n_axis = int(math.floor(1.0 / eps))
    n_cells = n_axis**d
    if n_cells > _MAX_CELLS:
        raise ValueError(f"binning would create {n_cells} cells")
    # The knife-edge product x*N == N can occur for x just below 1; clip.
    coords = np.minimum(np.floor(pts * n_axis).astype(np.int64), n_axis - 1)
    linear = np.ravel_multi_index(tuple(coords.T), (n_axis,) * d)
    counts_x = np.bincount(linear[: ts.n1], minlength=n_cells)
    counts_y = np.bincount(linear[ts.n1 :], minlength=n_cells)
    return Binning(
        d=d,
        n_cells_per_axis=n_axis,
        cell_width=float(eps),
        cell_index_of=linear,
        counts_x=counts_x,
        counts_y=counts_y,
        n1=ts.n1,
        n2=ts.n2,
    )


def torus_graph(n_axis: int, d: int) -> Graph:
    """Nearest-neighbor grid graph on (Z/N)^d with wrap-around.

    Vertices are linear C-order indices over the d axes.  For N >= 3 the
    graph has d * N^d edges; for N = 2 the two wrap directions coincide
    and duplicates are removed; N = 1 yields a single isolated vertex.
    """
    if n_axis < 1 or d < 1:
        raise ValueError("torus requires N >= 1 and d >= 1")
    n_cells = n_axis**d
    if n_cells > _MAX_CELLS:
        raise ValueError(f"torus would create {n_cells} vertices")
    if n_axis == 1:
        return Graph.from_edges(1, [])
    idx = np.arange(n_cells)
    multi = np.array(np.unravel_index(idx, (n_axis,) * d))
    pairs = []
    for axis in range(d):
        shifted = multi.copy()
        shifted[axis] = (shifted[axis] + 1) % n_axis
        nb = np.ravel_multi_index(tuple(shifted), (n_axis,) * d)
        pairs.append(np.column_stack([idx, nb]))
    return Graph.from_edges(n_cells, np.vstack(pairs))


def binned_assignment(
    binning: Binning, ts: TwoSample
) -> tuple[list[Fraction], list[Fraction]]:
    """Averaged per-cell weights and raw per-cell masses.

    For each cell with n(cell) = counts_x + counts_y > 0 the averaged
    weight is (counts_x/n1 - counts_y/n2) / n(cell); empty cells get 0.
    The raw mass counts_x/n1 - counts_y/n2 is returned alongside.

    Raises
    ------
    BinningMismatch
        If the binning was not derived from ``ts``.
    """
    if (
        binning.n1 != ts.n1
        or binning.n2 != ts.n2
        or len(binning.cell_index_of) != ts.n
    ):
        raise BinningMismatch("binning was not derived from this sample")
    averaged: list[Fraction] = []
    masses: list[Fraction] = []
    n1, n2 = ts.n1, ts.n2
    for cx, cy in zip(binning.counts_x.tolist(), binning.counts_y.tolist()):
        mass = Fraction(cx, n1) - Fraction(cy, n2)
        total = cx + cy
        masses.append(mass)
        averaged.append(mass / total if total else Fraction(0))
    return averaged, masses
