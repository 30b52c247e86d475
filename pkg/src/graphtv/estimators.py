"""Estimator-style wrappers around the calibrated tests.

Each test is exposed as a scikit-learn compatible estimator: constructor
arguments are plain hyperparameters (``get_params`` / ``set_params``
work), ``fit`` validates inputs, runs the permutation-calibrated test,
and stores the outcome in trailing-underscore attributes
(``statistic_``, ``p_value_``, ``reject_``, ``witness_``, ``report_``).

Two-sample estimators take ``fit(X, y)`` with X the stacked points and
y a label vector with exactly two distinct values; rows labeled
``x_label`` form the first sample (default: the label of the first
row).  The regression estimator takes ``fit(X, y)`` with numeric
residuals y; the goodness-of-fit estimator takes ``fit(X)`` alone.
"""

from __future__ import annotations

from typing import Callable, Optional, Union

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_consistent_length, column_or_1d

from .data import TwoSample, build_two_sample
from .inference import (
    GraphSpec,
    PermutationPlan,
    TestReport,
    binned_graph_tv_test,
    chi_squared_test,
    gof_test,
    permutation_test,
    regression_test,
)

__all__ = [
    "GraphTVTest",
    "BinnedGraphTVTest",
    "BinnedChiSquaredTest",
    "GoodnessOfFitTest",
    "RegressionResidualTest",
]


def _split_two_sample(X: np.ndarray, y, x_label) -> tuple[TwoSample, np.ndarray, tuple]:
    """Split labeled rows into a TwoSample; returns (ts, order, labels)
    with order mapping pooled index -> original row."""
    y = column_or_1d(np.asarray(y), warn=False)
    check_consistent_length(X, y)
    seen = list(dict.fromkeys(y.tolist()))
    if len(seen) != 2:
        raise ValueError(
            f"y must contain exactly two distinct labels, got {len(seen)}"
        )
    if x_label is None:
        x_lab = seen[0]
    else:
        x_lab = x_label
        if x_lab not in seen:
            raise ValueError(f"x_label {x_label!r} does not occur in y")
    y_lab = seen[1] if x_lab == seen[0] else seen[0]
    mask = np.asarray([v == x_lab for v in y.tolist()], dtype=bool)
    order = np.concatenate([np.flatnonzero(mask), np.flatnonzero(~mask)])
    ts = build_two_sample(X[mask], X[~mask])
    return ts, order, (x_lab, y_lab)


def _assign(est, report: TestReport, witness) -> None:
    est.report_ = report
    est.statistic_ = report.statistic
    est.statistic_exact_ = report.statistic_exact
    est.p_value_ = report.p_value
    est.critical_value_ = report.critical_value
    est.reject_ = report.reject
    est.witness_ = witness


class GraphTVTest(BaseEstimator):
    """Two-sample graph TV IPM test over a geometric graph.

    Parameters
    ----------
    graph : {"knn", "eps"}
        Neighborhood graph family over the pooled points.
    k : int
        Neighbor count for graph="knn".
    eps : float or None
        Radius for graph="eps"; None selects the default radius.
    density_bound : float
        Density bound used by the default radius.
    n_permutations : int
        Label permutations B; p-values live on the grid i/(B+1).
    alpha : float
        Rejection level.
    seed : int
        Permutation stream seed.
    n_threads : int
        Worker threads for the permutation replicates.
    x_label : object or None
        Label in y marking the first sample (None: label of row 0).

    Attributes
    ----------
    statistic_ : float
    statistic_exact_ : Fraction
    p_value_, critical_value_ : float
    reject_ : bool
    witness_ : tuple of int
        Optimal vertex set as original row indices of X.
    labels_ : tuple
        (first-sample label, second-sample label).
    report_ : TestReport
    n_features_in_ : int
    """

    def __init__(
        self,
        graph: str = "knn",
        k: int = 10,
        eps: Optional[float] = None,
        density_bound: float = 2.0,
        n_permutations: int = 199,
        alpha: float = 0.05,
        seed: int = 0,
        n_threads: int = 1,
        x_label=None,
    ):
        self.graph = graph
        self.k = k
        self.eps = eps
        self.density_bound = density_bound
        self.n_permutations = n_permutations
        self.alpha = alpha
        self.seed = seed
        self.n_threads = n_threads
        self.x_label = x_label

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64)
        ts, order, labels = _split_two_sample(X, y, self.x_label)
        spec = GraphSpec(
            kind=self.graph, k=self.k, eps=self.eps, density_bound=self.density_bound
        )
        g, meta = spec.build(ts)
        report = permutation_test(
            ts,
            g,
            PermutationPlan(self.n_permutations, self.seed),
            alpha=self.alpha,
            n_threads=self.n_threads,
            graph_meta=meta,
        )
        self.n_features_in_ = X.shape[1]
        self.labels_ = labels
        rows = tuple(sorted(int(order[i]) for i in report.witness))
        _assign(self, report, rows)
        return self


class BinnedGraphTVTest(BaseEstimator):
    """Binned graph TV IPM test on the torus grid over unit-box data.

    Parameters as GraphTVTest, minus the graph family, plus ``binwidth``
    (cube cells of side 1/floor(1/binwidth)).  ``witness_`` holds
    optimal torus cell indices (C-order), not sample rows.
    """

    def __init__(
        self,
        binwidth: float = 0.1,
        n_permutations: int = 199,
        alpha: float = 0.05,
        seed: int = 0,
        n_threads: int = 1,
        x_label=None,
    ):
        self.binwidth = binwidth
        self.n_permutations = n_permutations
        self.alpha = alpha
        self.seed = seed
        self.n_threads = n_threads
        self.x_label = x_label

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64)
        ts, _, labels = _split_two_sample(X, y, self.x_label)
        report = binned_graph_tv_test(
            ts,
            self.binwidth,
            PermutationPlan(self.n_permutations, self.seed),
            alpha=self.alpha,
            n_threads=self.n_threads,
        )
        self.n_features_in_ = X.shape[1]
        self.labels_ = labels
        _assign(self, report, report.witness)
        return self


class BinnedChiSquaredTest(BaseEstimator):
    """Binned count-discrepancy test sum_cells (n_x - n_y)^2.

    Permutation calibrated like the graph TV tests; no witness set.
    """

    def __init__(
        self,
        binwidth: float = 0.5,
        n_permutations: int = 199,
        alpha: float = 0.05,
        seed: int = 0,
        n_threads: int = 1,
        x_label=None,
    ):
        self.binwidth = binwidth
        self.n_permutations = n_permutations
        self.alpha = alpha
        self.seed = seed
        self.n_threads = n_threads
        self.x_label = x_label

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64)
        ts, _, labels = _split_two_sample(X, y, self.x_label)
        report = chi_squared_test(
            ts,
            self.binwidth,
            PermutationPlan(self.n_permutations, self.seed),
            alpha=self.alpha,
            n_threads=self.n_threads,
        )
        self.n_features_in_ = X.shape[1]
        self.labels_ = labels
        _assign(self, report, None)
        return self


class GoodnessOfFitTest(BaseEstimator):
    """Goodness-of-fit test of X against a reference model.

    ``reference`` is either a fixed (m, d) array of null-model draws or
    a callable ``(n, rng) -> array`` sampling n points from the null
    model (``n_reference`` draws, default len(X)).  ``fit(X)`` runs the
    two-sample graph TV test on (X, reference draw); ``witness_`` holds
    pooled indices, X rows first, then reference rows.
    """

    def __init__(
        self,
        reference: Union[np.ndarray, Callable, None] = None,
        n_reference: Optional[int] = None,
        graph: str = "knn",
        k: int = 10,
        eps: Optional[float] = None,
        density_bound: float = 2.0,
        n_permutations: int = 199,
        alpha: float = 0.05,
        seed: int = 0,
        n_threads: int = 1,
    ):
        self.reference = reference
        self.n_reference = n_reference
        self.graph = graph
        self.k = k
        self.eps = eps
        self.density_bound = density_bound
        self.n_permutations = n_permutations
        self.alpha = alpha
        self.seed = seed
        self.n_threads = n_threads

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if self.reference is None:
            raise ValueError("a reference sample or sampler is required")
        report = gof_test(
            X,
            self.reference,
            n0=self.n_reference,
            graph=GraphSpec(
                kind=self.graph,
                k=self.k,
                eps=self.eps,
                density_bound=self.density_bound,
            ),
            plan=PermutationPlan(self.n_permutations, self.seed),
            alpha=self.alpha,
            n_threads=self.n_threads,
        )
        self.n_features_in_ = X.shape[1]
        _assign(self, report, report.witness)
        return self


class RegressionResidualTest(BaseEstimator):
    """Residual-structure test over a covariate neighborhood graph.

    ``fit(X, y)`` takes covariate points X and numeric residuals y;
    rejection indicates residuals concentrate on a low-cut vertex set,
    evidence against the fitted regression function.  ``witness_``
    holds row indices of X.
    """

    def __init__(
        self,
        graph: str = "knn",
        k: int = 10,
        eps: Optional[float] = None,
        density_bound: float = 2.0,
        n_permutations: int = 199,
        alpha: float = 0.05,
        seed: int = 0,
        n_threads: int = 1,
    ):
        self.graph = graph
        self.k = k
        self.eps = eps
        self.density_bound = density_bound
        self.n_permutations = n_permutations
        self.alpha = alpha
        self.seed = seed
        self.n_threads = n_threads

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64)
        y = column_or_1d(np.asarray(y, dtype=np.float64), warn=False)
        check_consistent_length(X, y)
        spec = GraphSpec(
            kind=self.graph, k=self.k, eps=self.eps, density_bound=self.density_bound
        )
        g, meta = spec.build(X)
        report = regression_test(
            X,
            y.tolist(),
            g,
            PermutationPlan(self.n_permutations, self.seed),
            alpha=self.alpha,
            n_threads=self.n_threads,
            graph_meta=meta,
        )
        self.n_features_in_ = X.shape[1]
        _assign(self, report, report.witness)
        return self
