"""Shared brute-force oracles and random instance generators.

Every nontrivial expected value in the suite comes from exhaustive
enumeration over vertex subsets (exact Fractions), from closed forms
cross-checked by quadrature, or directly from a definition.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import pdist, squareform

from graphtv import (
    FlowNetwork,
    Graph,
    TwoSample,
    build_two_sample,
    eps_graph,
    is_connected,
)


def subset_weight(weights, subset) -> Fraction:
    total = Fraction(0)
    for i in subset:
        total += Fraction(weights[i])
    return total


def cut_size(g: Graph, subset) -> int:
    inside = set(int(i) for i in subset)
    return sum(1 for u, v in g.edges.tolist() if (u in inside) != (v in inside))


def oracle_max_ratio(weights, g: Graph) -> tuple[Fraction, frozenset[int]]:
    """max over proper nonempty S of w(S) / (2 cut(S)), by enumeration."""
    n = g.n_vertices
    best = Fraction(0)
    best_set: frozenset[int] = frozenset()
    for size in range(1, n):
        for subset in combinations(range(n), size):
            c = cut_size(g, subset)
            if c == 0:
                continue
            r = subset_weight(weights, subset) / (2 * c)
            if r > best:
                best = r
                best_set = frozenset(subset)
    return best, best_set


def oracle_m_lambda(weights, g: Graph, lam) -> tuple[Fraction, frozenset[int]]:
    """max over every S (empty and full included) of w(S) - 2 lam cut(S).

    Returns the maximum and the intersection of all maximizers, which is
    the canonical minimal maximizer.
    """
    n = g.n_vertices
    lam = Fraction(lam)
    best = None
    arg_sets: list[frozenset[int]] = []
    for size in range(0, n + 1):
        for subset in combinations(range(n), size):
            v = subset_weight(weights, subset) - 2 * lam * cut_size(g, subset)
            if best is None or v > best:
                best = v
                arg_sets = [frozenset(subset)]
            elif v == best:
                arg_sets.append(frozenset(subset))
    minimal = frozenset.intersection(*arg_sets)
    return best, minimal


def oracle_min_cut(net: FlowNetwork) -> tuple[int, frozenset[int]]:
    """Min s-t cut by enumerating source sides over non-terminal nodes.

    Returns the cut value and the intersection of all minimizing sides
    (the canonical minimal source-side set).
    """
    others = [i for i in range(net.n_nodes) if i not in (net.source, net.sink)]
    best = None
    arg_sets: list[frozenset[int]] = []
    for size in range(0, len(others) + 1):
        for side in combinations(others, size):
            s_side = set(side) | {net.source}
            cap = sum(c for u, v, c in net.arcs if u in s_side and v not in s_side)
            if best is None or cap < best:
                best = cap
                arg_sets = [frozenset(side)]
            elif cap == best:
                arg_sets.append(frozenset(side))
    return best, frozenset.intersection(*arg_sets)


def subset_table(weights, g: Graph) -> list[tuple[frozenset, Fraction, int]]:
    """(subset, weight, cut) for every vertex subset; lets one scan
    serve many lambda values."""
    n = g.n_vertices
    fr = [Fraction(w) for w in weights]
    edges = g.edges.tolist()
    out = []
    for bits in range(1 << n):
        members = [i for i in range(n) if bits >> i & 1]
        inside = set(members)
        w = sum((fr[i] for i in members), Fraction(0))
        c = sum(1 for u, v in edges if (u in inside) != (v in inside))
        out.append((frozenset(members), w, c))
    return out


def connectivity_radius(pts: np.ndarray) -> float:
    """Smallest radius whose eps-graph is connected (max MST edge)."""
    dm = squareform(pdist(pts))
    mst = minimum_spanning_tree(dm)
    return float(mst.data.max())


def random_graph(rng: np.random.Generator, n: int) -> Graph:
    p = min(1.0, 2.0 * np.log(max(n, 2)) / n)
    while True:
        mask = rng.random((n, n)) < p
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if mask[i, j]]
        g = Graph.from_edges(n, edges)
        if is_connected(g) and g.n_edges:
            return g


def random_instance(
    rng: np.random.Generator, n_min: int = 4, n_max: int = 14, d: int = 2
) -> tuple[TwoSample, Graph]:
    """Random connected instance: geometric or random-edge graph over a
    random two-sample split."""
    n = int(rng.integers(n_min, n_max + 1))
    n1 = int(rng.integers(1, n))
    pts = rng.random((n, d))
    ts = build_two_sample(pts[:n1], pts[n1:])
    if rng.random() < 0.5:
        eps = connectivity_radius(pts) * float(1.0 + rng.random())
        g = eps_graph(ts, eps)
    else:
        g = random_graph(rng, n)
    return ts, g


def random_zero_sum_ints(rng: np.random.Generator, n: int, span: int = 5) -> list[int]:
    w = rng.integers(-span, span + 1, size=n).astype(object).tolist()
    w = [int(v) for v in w]
    w[-1] -= sum(w)
    return w
