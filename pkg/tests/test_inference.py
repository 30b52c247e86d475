"""Permutation calibration and the calibrated test family."""

from fractions import Fraction

import numpy as np
import pytest

from graphtv import (
    Graph,
    GraphSpec,
    PermutationPlan,
    binned_assignment,
    bin_partition,
    binned_graph_tv_stat,
    binned_graph_tv_test,
    brute_force_weighted,
    build_two_sample,
    chi_squared_stat,
    chi_squared_test,
    default_radius,
    gof_test,
    permutation_p_value,
    permutation_test,
    regression_test,
    solve_gtv_ipm,
    solve_weighted,
    torus_graph,
)

from helpers import random_instance


class TestPValue:
    def test_add_one_rule(self):
        perms = [0] * 190 + [5] * 9
        assert permutation_p_value(3, perms) == Fraction(10, 200)

    def test_all_below_observed(self):
        assert permutation_p_value(10, [1] * 199) == Fraction(1, 200)

    def test_ties_count_against_rejection(self):
        assert permutation_p_value(4, [4, 4, 1]) == Fraction(3, 4)

    def test_lattice(self):
        rng = np.random.default_rng(41)
        perms = rng.integers(0, 50, size=99).tolist()
        for obs in (0, 7, 49, 50):
            p = permutation_p_value(obs, perms)
            assert p.denominator in (1, 2, 4, 5, 10, 20, 25, 50, 100)
            assert Fraction(1, 100) <= p <= 1

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(42)
        perms = [Fraction(int(v), 7) for v in rng.integers(-10, 10, size=37)]
        obs = Fraction(3, 7)
        base = permutation_p_value(obs, perms)
        assert permutation_p_value(2 * obs, [2 * v for v in perms]) == base
        assert permutation_p_value(obs**3, [v**3 for v in perms]) == base


class TestPermutationTest:
    def small_instance(self, seed=43, n1=12, n2=9):
        rng = np.random.default_rng(seed)
        ts = build_two_sample(rng.random((n1, 2)), rng.random((n2, 2)))
        g, meta = GraphSpec(kind="knn", k=4).build(ts)
        return ts, g, meta

    def test_report_consistency(self):
        ts, g, meta = self.small_instance()
        plan = PermutationPlan(39, seed=7)
        rep = permutation_test(ts, g, plan, alpha=0.1, graph_meta=meta)
        assert rep.method == "graph_tv"
        assert rep.statistic == float(rep.statistic_exact)
        assert rep.statistic_exact == solve_gtv_ipm(ts, g).value
        assert rep.n_permutations == 39
        num = round(rep.p_value * 40)
        assert abs(rep.p_value - num / 40) < 1e-12 and 1 <= num <= 40
        assert rep.reject == (Fraction(num, 40) <= Fraction(0.1))
        assert rep.witness is not None and len(rep.witness) >= 1

    def test_identical_points_give_p_one(self):
        pts = np.full((6, 2), 0.5)
        ts = build_two_sample(pts[:3], pts[3:])
        g, _ = GraphSpec(kind="eps", eps=0.1).build(ts)
        rep = permutation_test(ts, g, PermutationPlan(59, seed=1))
        assert rep.p_value == 1.0
        assert not rep.reject

    def test_thread_count_does_not_change_results(self):
        ts, g, meta = self.small_instance(seed=44)
        plan = PermutationPlan(30, seed=5)
        reps = [
            permutation_test(ts, g, plan, n_threads=t, graph_meta=meta)
            for t in (1, 2, 5)
        ]
        for rep in reps[1:]:
            assert rep == reps[0]

    def test_graph_mismatch(self):
        ts, _, _ = self.small_instance()
        with pytest.raises(ValueError):
            permutation_test(ts, Graph.from_edges(3, [(0, 1), (1, 2)]))

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            PermutationPlan(0)


class TestChiSquared:
    def test_stat_zero_when_counts_match(self):
        ts = build_two_sample([[0.2], [0.7]], [[0.3], [0.8]])
        assert chi_squared_stat(bin_partition(ts, 0.5)) == 0

    def test_stat_single_cell(self):
        ts = build_two_sample([[0.2], [0.3]], [[0.4]])
        assert chi_squared_stat(bin_partition(ts, 1.0)) == 1

    def test_stat_two_cells(self):
        ts = build_two_sample([[0.1], [0.2], [0.3]], [[0.6], [0.7], [0.8]])
        assert chi_squared_stat(bin_partition(ts, 0.5)) == 9 + 9

    def test_single_cell_is_permutation_invariant(self):
        rng = np.random.default_rng(45)
        ts = build_two_sample(rng.random((8, 2)), rng.random((5, 2)))
        rep = chi_squared_test(ts, 1.0, PermutationPlan(25, seed=2))
        assert rep.p_value == 1.0

    def test_separated_samples_reject(self):
        rng = np.random.default_rng(46)
        x = 0.25 + 0.1 * rng.random((50, 1))
        y = 0.75 + 0.1 * rng.random((50, 1))
        ts = build_two_sample(x, y)
        rep = chi_squared_test(ts, 0.5, PermutationPlan(99, seed=3))
        assert rep.statistic == 5000.0
        assert rep.p_value == 0.01
        assert rep.reject

    def test_report_meta(self):
        ts = build_two_sample([[0.2, 0.3]], [[0.6, 0.7]])
        rep = chi_squared_test(ts, 0.5, PermutationPlan(9))
        assert rep.method == "chi_squared"
        assert rep.graph_meta["type"] == "binning"
        assert rep.graph_meta["n_cells"] == 4
        assert rep.witness is None


class TestBinnedGraphTV:
    def test_matches_brute_force_over_cells(self):
        rng = np.random.default_rng(47)
        for binwidth, d in ((0.25, 1), (0.5, 2), (0.25, 2)):
            n1 = int(rng.integers(3, 12))
            n2 = int(rng.integers(3, 12))
            ts = build_two_sample(rng.random((n1, d)), rng.random((n2, d)))
            result, setup = binned_graph_tv_stat(ts, binwidth)
            _, masses = binned_assignment(setup.binning, ts)
            n_axis = setup.binning.n_cells_per_axis
            value, _ = brute_force_weighted(masses, torus_graph(n_axis, d))
            assert result.value == value

    def test_cell_weights_are_masses(self):
        # n1 = n2 = 2, 1-d, four cells: X doubles up in the first cell.
        ts = build_two_sample([[0.1], [0.2]], [[0.4], [0.9]])
        result, setup = binned_graph_tv_stat(ts, 0.25)
        _, masses = binned_assignment(setup.binning, ts)
        assert masses[0] == 1
        direct = solve_weighted(masses, torus_graph(4, 1))
        assert result.value == direct.value
        assert result.witness == direct.witness

    def test_matching_counts_give_zero(self):
        ts = build_two_sample([[0.2], [0.7]], [[0.3], [0.8]])
        result, _ = binned_graph_tv_stat(ts, 0.5)
        assert result.value == 0

    def test_single_cell_statistic_zero(self):
        ts = build_two_sample([[0.2]], [[0.8]])
        rep = binned_graph_tv_test(ts, 1.0, PermutationPlan(9))
        assert rep.statistic == 0.0
        assert rep.p_value == 1.0

    def test_report_shape(self):
        rng = np.random.default_rng(48)
        ts = build_two_sample(rng.random((10, 2)), rng.random((10, 2)))
        rep = binned_graph_tv_test(ts, 0.5, PermutationPlan(19, seed=4))
        assert rep.method == "binned_graph_tv"
        assert rep.graph_meta["type"] == "torus"
        assert rep.graph_meta["cells_per_axis"] == 2
        # Witness entries are torus cell indices.
        assert all(0 <= c < 4 for c in rep.witness)

    def test_thread_determinism(self):
        rng = np.random.default_rng(49)
        ts = build_two_sample(rng.random((12, 2)), rng.random((9, 2)))
        a = binned_graph_tv_test(ts, 0.34, PermutationPlan(16, seed=6), n_threads=1)
        b = binned_graph_tv_test(ts, 0.34, PermutationPlan(16, seed=6), n_threads=4)
        assert a == b


class TestGoodnessOfFit:
    def test_array_reference_matches_two_sample_test(self):
        rng = np.random.default_rng(50)
        x = rng.random((15, 2))
        ref = rng.random((15, 2))
        plan = PermutationPlan(29, seed=8)
        rep = gof_test(x, ref, graph=GraphSpec(kind="knn", k=4), plan=plan)
        ts = build_two_sample(x, ref)
        g, _ = GraphSpec(kind="knn", k=4).build(ts)
        direct = permutation_test(ts, g, plan)
        assert rep.statistic_exact == direct.statistic_exact
        assert rep.p_value == direct.p_value
        assert rep.graph_meta["mode"] == "goodness_of_fit"

    def test_callable_reference_default_size(self):
        rng = np.random.default_rng(51)
        x = rng.random((20, 2))
        rep = gof_test(
            x,
            lambda n, gen: gen.random((n, 2)),
            graph=GraphSpec(kind="knn", k=4),
            plan=PermutationPlan(19, seed=9),
        )
        assert rep.graph_meta["n_vertices"] == 40

    def test_callable_reference_custom_size(self):
        rng = np.random.default_rng(52)
        x = rng.random((10, 2))
        rep = gof_test(
            x,
            lambda n, gen: gen.random((n, 2)),
            n0=30,
            graph=GraphSpec(kind="knn", k=4),
            plan=PermutationPlan(19, seed=10),
        )
        assert rep.graph_meta["n_vertices"] == 40

    def test_callable_reference_is_deterministic(self):
        rng = np.random.default_rng(53)
        x = rng.random((12, 2))
        kw = dict(graph=GraphSpec(kind="knn", k=3), plan=PermutationPlan(11, seed=11))
        a = gof_test(x, lambda n, gen: gen.random((n, 2)), **kw)
        b = gof_test(x, lambda n, gen: gen.random((n, 2)), **kw)
        assert a == b

    def test_reference_size_mismatch(self):
        x = np.random.default_rng(54).random((5, 2))
        with pytest.raises(ValueError):
            gof_test(x, x.copy(), n0=7)


class TestRegression:
    def test_two_vertex_example(self):
        z = np.array([[0.0], [1.0]])
        g = Graph.from_edges(2, [(0, 1)])
        rep = regression_test(z, [1.0, -1.0], g, PermutationPlan(9, seed=12))
        assert rep.statistic_exact == Fraction(1, 2)
        assert rep.witness == (0,)
        assert rep.graph_meta["mode"] == "regression_residuals"

    def test_residuals_are_centered(self):
        z = np.array([[0.0], [1.0]])
        g = Graph.from_edges(2, [(0, 1)])
        shifted = regression_test(z, [2.0, 0.0], g, PermutationPlan(9, seed=12))
        assert shifted.statistic_exact == Fraction(1, 2)

    def test_constant_residuals(self):
        rng = np.random.default_rng(55)
        z = rng.random((8, 2))
        g, _ = GraphSpec(kind="knn", k=3).build(z)
        rep = regression_test(z, [3.25] * 8, g, PermutationPlan(15, seed=13))
        assert rep.statistic == 0.0
        assert rep.p_value == 1.0
        assert not rep.reject

    def test_reduces_to_two_sample_statistic(self):
        rng = np.random.default_rng(56)
        ts, g = random_instance(rng, n_min=6, n_max=10)
        rep = regression_test(
            ts.points, list(ts.a), g, PermutationPlan(9, seed=14)
        )
        assert rep.statistic_exact == solve_gtv_ipm(ts, g).value

    def test_length_mismatch(self):
        z = np.zeros((3, 1))
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        with pytest.raises(ValueError):
            regression_test(z, [1.0, -1.0], g)
        with pytest.raises(ValueError):
            regression_test(z, [1.0, 0.0, -1.0], Graph.from_edges(2, [(0, 1)]))


class TestGraphSpec:
    def test_knn_meta(self):
        rng = np.random.default_rng(57)
        ts = build_two_sample(rng.random((6, 2)), rng.random((6, 2)))
        g, meta = GraphSpec(kind="knn", k=3).build(ts)
        assert meta["type"] == "knn" and meta["k"] == 3
        assert meta["n_vertices"] == 12 and meta["n_edges"] == g.n_edges

    def test_eps_auto_uses_default_radius(self):
        rng = np.random.default_rng(58)
        ts = build_two_sample(rng.random((20, 2)), rng.random((20, 2)))
        g, meta = GraphSpec(kind="eps").build(ts)
        assert meta["auto_radius"]
        assert meta["radius"] == default_radius(40, 2, 2.0)

    def test_array_and_two_sample_agree(self):
        rng = np.random.default_rng(59)
        pts = rng.random((14, 2))
        ts = build_two_sample(pts[:7], pts[7:])
        g1, _ = GraphSpec(kind="eps", eps=0.4).build(ts)
        g2, _ = GraphSpec(kind="eps", eps=0.4).build(pts)
        assert np.array_equal(g1.edges, g2.edges)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            GraphSpec(kind="delaunay").build(np.zeros((3, 2)))


class TestReportSerialization:
    def test_to_dict_round_trips_fields(self):
        rng = np.random.default_rng(60)
        ts = build_two_sample(rng.random((8, 2)), rng.random((8, 2)))
        g, meta = GraphSpec(kind="knn", k=3).build(ts)
        rep = permutation_test(ts, g, PermutationPlan(19, seed=15), graph_meta=meta)
        d = rep.to_dict()
        assert d["method"] == "graph_tv"
        assert d["statistic"] == rep.statistic
        assert d["statistic_exact"] == str(rep.statistic_exact)
        assert d["witness"] == list(rep.witness)
        assert d["graph_meta"]["type"] == "knn"
        assert set(d) == {
            "method",
            "statistic",
            "statistic_exact",
            "p_value",
            "critical_value",
            "alpha",
            "n_permutations",
            "reject",
            "witness",
            "seed",
            "graph_meta",
        }
