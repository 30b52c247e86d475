"""Exact integer max-flow / min-cut and the parametric cut objective.

``max_flow`` solves a directed network with integer capacities exactly
(arbitrary-precision fallback guarantees no overflow) and reports the
canonical minimal source-side cut.  ``lambda_cut`` evaluates

    M(lambda) = max_S  a(S) - lambda * 2 * cut_G(S)

for a two-sample weight vector by one s/t min-cut reduction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._dinic import ArcStructure
from .data import TwoSample
from .graphs import Graph

__all__ = ["FlowNetwork", "CutResult", "max_flow", "lambda_cut"]


@dataclass(frozen=True)
class FlowNetwork:
    """Directed flow network with exact integer capacities.

    Attributes
    ----------
    n_nodes : int
    arcs : tuple of (tail, head, capacity)
        Directed arcs; parallel arcs are allowed, self-loops are not.
    source, sink : int
    """

    n_nodes: int
    arcs: tuple[tuple[int, int, int], ...]
    source: int
    sink: int

    def __post_init__(self) -> None:
        if self.n_nodes < 2:
            raise ValueError("network needs at least source and sink")
        if not (0 <= self.source < self.n_nodes and 0 <= self.sink < self.n_nodes):
            raise ValueError("source/sink out of range")
        if self.source == self.sink:
            raise ValueError("source and sink must differ")
        canon = []
        for u, v, c in self.arcs:
            u, v = int(u), int(v)
            if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise ValueError("arc endpoint out of range")
            if u == v:
                raise ValueError("self-loops are not allowed")
            if isinstance(c, bool) or not isinstance(c, (int, np.integer)):
                raise ValueError("capacities must be exact integers")
            c = int(c)
            if c < 0:
                raise ValueError("capacities must be nonnegative")
            canon.append((u, v, c))
        object.__setattr__(self, "arcs", tuple(canon))


@dataclass(frozen=True)
class CutResult:
    """Max-flow value with the canonical minimal source-side cut.

    Attributes
    ----------
    flow_value : int
    source_side : frozenset of int
        Non-terminal nodes reachable from the source in the residual
        network; this minimal source-side cut is unique across all
        maximum flows.
    saturated : bool
        True iff every arc leaving the source is saturated, i.e. the
        flow equals the total source capacity.
    """

    flow_value: int
    source_side: frozenset[int]
    saturated: bool


def max_flow(net: FlowNetwork) -> CutResult:
    """Solve ``net`` exactly and return flow value plus minimal cut."""
    k = len(net.arcs)
    tails = np.empty(2 * k, dtype=np.int64)
    heads = np.empty(2 * k, dtype=np.int64)
    caps: list[int] = [0] * (2 * k)
    for i, (u, v, c) in enumerate(net.arcs):
        tails[2 * i], heads[2 * i], caps[2 * i] = u, v, c
        tails[2 * i + 1], heads[2 * i + 1] = v, u
    structure = ArcStructure(net.n_nodes, tails, heads, net.source, net.sink)
    source_out = sum(c for u, _, c in net.arcs if u == net.source)
    max_cap = max((c for _, _, c in net.arcs), default=0)
    flow, reach = structure.run(caps, max(2 * max_cap, source_out))
    side = frozenset(
        int(i) for i in np.nonzero(reach)[0] if i != net.source and i != net.sink
    )
    return CutResult(flow_value=flow, source_side=side, saturated=flow == source_out)


def lambda_cut(ts: TwoSample, g: Graph, lam) -> tuple[Fraction, frozenset[int]]:
    """Evaluate M(lambda) = max_S a(S) - lambda * 2 * cut(S) exactly.

    The maximizer returned is the canonical minimal one (residual
    reachability), restricted to graph vertices.

    Parameters
    ----------
    ts : TwoSample
    g : Graph
        Graph over the pooled points (g.n_vertices == ts.n).
    lam : Fraction or int or float
        Nonnegative rational; floats are converted exactly.

    Returns
    -------
    (M_value, maximizer) : (Fraction, frozenset of int)
    """
    lam = Fraction(lam)
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if g.n_vertices != ts.n:
        raise ValueError("graph does not match the pooled sample")
    n = ts.n
    scale = ts.n1 * ts.n2
    p, q = lam.numerator, lam.denominator
    w = ts.a_int.tolist()
    arcs = []
    s, t = n, n + 1
    for i, wi in enumerate(w):
        if wi > 0:
            arcs.append((s, i, q * wi))
        elif wi < 0:
            arcs.append((i, t, q * (-wi)))
    edge_cap = 2 * p * scale
    for u, v in g.edges.tolist():
        arcs.append((u, v, edge_cap))
        arcs.append((v, u, edge_cap))
    net = FlowNetwork(n_nodes=n + 2, arcs=tuple(arcs), source=s, sink=t)
    res = max_flow(net)
    sum_pos = sum(wi for wi in w if wi > 0)
    m_value = Fraction(q * sum_pos - res.flow_value, q * scale)
    maximizer = frozenset(i for i in res.source_side if i < n)
    return m_value, maximizer
