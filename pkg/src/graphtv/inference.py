"""Permutation-calibrated hypothesis tests.

All tests share one calibration rule: the observed statistic is ranked
against B label permutations, the p-value uses the add-one convention
p = (1 + #{permuted >= observed}) / (B + 1) with exact rational
comparisons, and the test rejects iff p <= alpha.  Per-replicate random
streams are derived from the plan seed by substream spawning, so
results are independent of thread count and replicate order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .data import TwoSample, build_two_sample
from .exceptions import EmptySample
from .graphs import (
    Binning,
    Graph,
    _as_points,
    bin_partition,
    default_radius,
    eps_graph,
    knn_graph,
    torus_graph,
)
from .solver import WeightedSolver, _scale_to_integers

__all__ = [
    "PermutationPlan",
    "TestReport",
    "GraphSpec",
    "permutation_p_value",
    "permutation_test",
    "chi_squared_stat",
    "chi_squared_test",
    "binned_graph_tv_stat",
    "binned_graph_tv_test",
    "gof_test",
    "regression_test",
]


def _substream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic substream independent of draw order elsewhere."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


@dataclass(frozen=True)
class PermutationPlan:
    """Calibration plan: permutation count and seed.

    ``rng(r)`` yields the dedicated substream of replicate r; replicate
    draws never depend on scheduling, so any thread count reproduces
    identical results.
    """

    n_permutations: int = 199
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_permutations < 1:
            raise ValueError("at least one permutation is required")

    def rng(self, replicate: int) -> np.random.Generator:
        return _substream(self.seed, 0, replicate)


@dataclass(frozen=True)
class TestReport:
    """Outcome of a calibrated test.

    ``statistic_exact`` carries the exact rational statistic when the
    method provides one; ``witness`` is the optimal vertex (or cell)
    set for graph TV methods and None otherwise.
    """

    method: str
    statistic: float
    statistic_exact: Optional[Fraction]
    p_value: float
    critical_value: float
    alpha: float
    n_permutations: int
    reject: bool
    witness: Optional[tuple[int, ...]]
    seed: int
    graph_meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "statistic": self.statistic,
            "statistic_exact": (
                str(self.statistic_exact) if self.statistic_exact is not None else None
            ),
            "p_value": self.p_value,
            "critical_value": self.critical_value,
            "alpha": self.alpha,
            "n_permutations": self.n_permutations,
            "reject": self.reject,
            "witness": list(self.witness) if self.witness is not None else None,
            "seed": self.seed,
            "graph_meta": self.graph_meta,
        }


@dataclass(frozen=True)
class GraphSpec:
    """Recipe for building the pooled-sample graph.

    kind "knn" uses the symmetrized k-nearest-neighbor graph; kind
    "eps" the radius graph, with eps=None meaning the default radius
    (24 B)^(1/d) 2 sqrt(d) (ln n / n)^(1/d).
    """

    kind: str = "knn"
    k: int = 10
    eps: Optional[float] = None
    density_bound: float = 2.0

    def build(self, data) -> tuple[Graph, dict]:
        """Build the graph for a TwoSample or a plain (n, d) point array."""
        pts = _as_points(data)
        if self.kind == "knn":
            g = knn_graph(pts, self.k)
            meta = {"type": "knn", "k": self.k}
        elif self.kind == "eps":
            radius = (
                float(self.eps)
                if self.eps is not None
                else default_radius(len(pts), pts.shape[1], self.density_bound)
            )
            g = eps_graph(pts, radius)
            meta = {"type": "eps", "radius": radius, "auto_radius": self.eps is None}
        else:
            raise ValueError(f"unknown graph kind {self.kind!r}")
        meta["n_vertices"] = g.n_vertices
        meta["n_edges"] = g.n_edges
        return g, meta


def permutation_p_value(observed, permuted: Sequence) -> Fraction:
    """Add-one permutation p-value; exact and rank-based, hence
    invariant under strictly monotone transformations of the statistic."""
    count = sum(1 for s in permuted if s >= observed)
    return Fraction(1 + count, len(permuted) + 1)


def _critical_value(observed, permuted: Sequence, alpha: float):
    pool = sorted(list(permuted) + [observed])
    n_pool = len(pool)
    k = math.ceil(n_pool * (1 - Fraction(alpha)))
    k = min(max(k, 1), n_pool)
    return pool[k - 1]


def _map_replicates(fn: Callable[[int], object], count: int, n_threads: int) -> list:
    if n_threads <= 1:
        return [fn(r) for r in range(count)]
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        return list(pool.map(fn, range(count)))


def _calibrated_report(
    method: str,
    observed,
    permuted: Sequence,
    alpha: float,
    plan: PermutationPlan,
    witness: Optional[tuple[int, ...]],
    graph_meta: dict,
    exact: Optional[Fraction],
) -> TestReport:
    p_exact = permutation_p_value(observed, permuted)
    crit = _critical_value(observed, permuted, alpha)
    return TestReport(
        method=method,
        statistic=float(observed),
        statistic_exact=exact,
        p_value=float(p_exact),
        critical_value=float(crit),
        alpha=float(alpha),
        n_permutations=plan.n_permutations,
        reject=p_exact <= Fraction(alpha),
        witness=witness,
        seed=plan.seed,
        graph_meta=dict(graph_meta),
    )


def _label_mask(rng: np.random.Generator, n: int, n1: int) -> np.ndarray:
    perm = rng.permutation(n)
    mask = np.zeros(n, dtype=bool)
    mask[perm[:n1]] = True
    return mask


def permutation_test(
    ts: TwoSample,
    g: Graph,
    plan: PermutationPlan = PermutationPlan(),
    alpha: float = 0.05,
    n_threads: int = 1,
    graph_meta: Optional[dict] = None,
) -> TestReport:
    """Graph TV IPM two-sample test calibrated by label permutation.

    The pooled points and the graph stay fixed; only the weight vector
    a is permuted.  Statistics are exact rationals, so ties in the
    permutation distribution are resolved exactly.

    Raises
    ------
    GraphDisconnected
        If g is disconnected.
    """
    if g.n_vertices != ts.n:
        raise ValueError("graph does not match the pooled sample")
    solver = WeightedSolver(g)
    unit = Fraction(1, ts.n1 * ts.n2)
    observed = solver.solve_scaled(ts.a_int.tolist(), unit)

    def one(r: int) -> Fraction:
        mask = _label_mask(plan.rng(r), ts.n, ts.n1)
        w = np.where(mask, ts.n2, -ts.n1).astype(np.int64)
        return solver.solve_scaled(w.tolist(), unit).value

    permuted = _map_replicates(one, plan.n_permutations, n_threads)
    meta = dict(graph_meta or {"type": "custom"})
    meta.setdefault("n_vertices", g.n_vertices)
    meta.setdefault("n_edges", g.n_edges)
    return _calibrated_report(
        "graph_tv",
        observed.value,
        permuted,
        alpha,
        plan,
        tuple(sorted(observed.witness)),
        meta,
        observed.value,
    )


def chi_squared_stat(binning: Binning) -> int:
    """Binned count discrepancy sum_cells (counts_x - counts_y)^2."""
    diff = binning.counts_x - binning.counts_y
    return int(np.dot(diff, diff))


def chi_squared_test(
    ts: TwoSample,
    binwidth: float,
    plan: PermutationPlan = PermutationPlan(),
    alpha: float = 0.05,
    n_threads: int = 1,
) -> TestReport:
    """Binned chi-squared-type two-sample test, permutation calibrated.

    Points keep their cells; each permutation reassigns labels and the
    per-cell counts are recomputed.
    """
    binning = bin_partition(ts, binwidth)
    cells = binning.cell_index_of
    totals = binning.counts_x + binning.counts_y
    observed = chi_squared_stat(binning)

    def one(r: int) -> int:
        mask = _label_mask(plan.rng(r), ts.n, ts.n1)
        cx = np.bincount(cells[mask], minlength=binning.n_cells)
        diff = 2 * cx - totals
        return int(np.dot(diff, diff))

    permuted = _map_replicates(one, plan.n_permutations, n_threads)
    meta = {
        "type": "binning",
        "binwidth": binning.cell_width,
        "cells_per_axis": binning.n_cells_per_axis,
        "n_cells": binning.n_cells,
    }
    return _calibrated_report(
        "chi_squared", observed, permuted, alpha, plan, None, meta, Fraction(observed)
    )


class _BinnedSetup:
    """Shared pieces of the binned graph TV statistic."""

    def __init__(self, ts: TwoSample, binwidth: float):
        self.binning = bin_partition(ts, binwidth)
        self.cells = self.binning.cell_index_of
        self.totals = self.binning.counts_x + self.binning.counts_y
        n_axis = self.binning.n_cells_per_axis
        self.graph = (
            torus_graph(n_axis, ts.dim) if n_axis >= 2 else Graph.from_edges(1, [])
        )
        self.solver = WeightedSolver(self.graph)
        self.unit = Fraction(1, ts.n1 * ts.n2)
        self.ts = ts

    def stat(self, cx: np.ndarray):
        # Cell weight = mass cx/n1 - cy/n2 on the integer scale n1*n2;
        # masses sum to zero exactly, no centering needed.
        cy = self.totals - cx
        w_int = (cx.astype(np.int64) * self.ts.n2 - cy.astype(np.int64) * self.ts.n1)
        return self.solver.solve_scaled(w_int.tolist(), self.unit)

    def meta(self) -> dict:
        return {
            "type": "torus",
            "binwidth": self.binning.cell_width,
            "cells_per_axis": self.binning.n_cells_per_axis,
            "n_vertices": self.graph.n_vertices,
            "n_edges": self.graph.n_edges,
        }


def binned_graph_tv_stat(ts: TwoSample, binwidth: float):
    """Observed binned graph TV statistic and its witness cells.

    The statistic restricts the admissible functions to cell-piecewise
    constants penalized by torus-graph TV, so each cell's weight is the
    summed assignment mass counts_x/n1 - counts_y/n2 (0 on empty cells)
    and the exact solver runs on the torus grid graph.
    """
    setup = _BinnedSetup(ts, binwidth)
    result = setup.stat(setup.binning.counts_x)
    return result, setup


def binned_graph_tv_test(
    ts: TwoSample,
    binwidth: float,
    plan: PermutationPlan = PermutationPlan(),
    alpha: float = 0.05,
    n_threads: int = 1,
) -> TestReport:
    """Binned graph TV IPM test on the torus grid, permutation calibrated.

    Each permutation reassigns labels, recomputes per-cell counts, and
    re-derives the summed-mass cell weights; cell totals (hence the
    exact weight scale) are permutation invariant.
    """
    observed, setup = binned_graph_tv_stat(ts, binwidth)
    cells = setup.cells

    def one(r: int) -> Fraction:
        mask = _label_mask(plan.rng(r), ts.n, ts.n1)
        cx = np.bincount(cells[mask], minlength=setup.binning.n_cells)
        return setup.stat(cx).value

    permuted = _map_replicates(one, plan.n_permutations, n_threads)
    return _calibrated_report(
        "binned_graph_tv",
        observed.value,
        permuted,
        alpha,
        plan,
        tuple(sorted(observed.witness)),
        setup.meta(),
        observed.value,
    )


ReferenceSampler = Callable[[int, np.random.Generator], np.ndarray]


def gof_test(
    x,
    reference: Union[np.ndarray, ReferenceSampler],
    n0: Optional[int] = None,
    graph: GraphSpec = GraphSpec(),
    plan: PermutationPlan = PermutationPlan(),
    alpha: float = 0.05,
    n_threads: int = 1,
) -> TestReport:
    """Goodness-of-fit test: x against a reference sample or sampler.

    A callable reference draws n0 points (default n0 = len(x)) from the
    null model using a dedicated substream; the two-sample graph TV
    test then runs on (x, reference draw).
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.size == 0:
        raise EmptySample("x must contain at least one point")
    if callable(reference):
        n_ref = int(n0) if n0 is not None else x.shape[0]
        if n_ref < 1:
            raise ValueError("n0 must be positive")
        ref = np.atleast_2d(np.asarray(reference(n_ref, _substream(plan.seed, 1, 0))))
    else:
        ref = np.atleast_2d(np.asarray(reference, dtype=np.float64))
        if n0 is not None and n0 != ref.shape[0]:
            raise ValueError("n0 disagrees with the reference sample size")
    ts = build_two_sample(x, ref)
    g, meta = graph.build(ts)
    meta["mode"] = "goodness_of_fit"
    return permutation_test(ts, g, plan, alpha, n_threads, graph_meta=meta)


def regression_test(
    z,
    residuals,
    g: Graph,
    plan: PermutationPlan = PermutationPlan(),
    alpha: float = 0.05,
    n_threads: int = 1,
    graph_meta: Optional[dict] = None,
) -> TestReport:
    """Residual-structure test over a covariate graph.

    Residuals are centered (mean subtracted, exactly) and used as
    generalized vertex weights; calibration permutes residuals over the
    vertices.  Rejects when residuals concentrate on a low-cut region,
    evidence against the posited regression function.
    """
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    res = list(residuals)
    if len(res) != z.shape[0]:
        raise ValueError("one residual per covariate point is required")
    if g.n_vertices != len(res):
        raise ValueError("graph does not match the covariate points")
    fracs = [Fraction(r) for r in res]
    mean = sum(fracs, Fraction(0)) / len(fracs)
    centered = [f - mean for f in fracs]
    ints, unit = _scale_to_integers(centered)
    solver = WeightedSolver(g)
    observed = solver.solve_scaled(ints, unit)

    def one(r: int) -> Fraction:
        perm = plan.rng(r).permutation(len(fracs))
        w = [ints[int(i)] for i in perm]
        return solver.solve_scaled(w, unit).value

    permuted = _map_replicates(one, plan.n_permutations, n_threads)
    meta = dict(graph_meta or {"type": "custom"})
    meta.setdefault("n_vertices", g.n_vertices)
    meta.setdefault("n_edges", g.n_edges)
    meta["mode"] = "regression_residuals"
    return _calibrated_report(
        "graph_tv",
        observed.value,
        permuted,
        alpha,
        plan,
        tuple(sorted(observed.witness)),
        meta,
        observed.value,
    )
