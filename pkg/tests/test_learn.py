import itertools
import math

import numpy as np
import pytest

from cryptobn.discretize import DiscreteDataset
from cryptobn.errors import (
    EmptyEffectiveData,
    EmptyStratumData,
    MissingDataError,
    NoObservationsForVariable,
    ZeroRowWithoutSmoothing,
)
from cryptobn.graph import Dag
from cryptobn.learn import (
    BDEU,
    BIC,
    ScoreSpec,
    chi_square_ci_test,
    family_score,
    fit_cpts_em,
    fit_cpts_mle,
    graph_score,
    hill_climb,
    hill_climb_search,
    pc_learn,
    pc_search,
)
from cryptobn.simulate import mask_mcar, network_from_tables, random_network, sample


def dataset(**cols):
    return DiscreteDataset.from_columns({k: np.asarray(v) for k, v in cols.items()})


def all_dags(nodes):
    pairs = [(a, b) for a in nodes for b in nodes if a != b]
    for mask in itertools.product([0, 1], repeat=len(pairs)):
        edges = [e for e, m in zip(pairs, mask) if m]
        try:
            yield Dag.from_edges(nodes, edges)
        except Exception:
            continue


def bdeu_oracle(child_col, parent_cols, r, qs, ess):
    """BDeu from the Dirichlet-multinomial formula with math.lgamma."""
    q = int(np.prod(qs)) if qs else 1
    counts = np.zeros((q, r))
    for i, x in enumerate(child_col):
        j = 0
        for col, card in zip(parent_cols, qs):
            j = j * card + col[i]
        counts[j, x] += 1
    a_j, a_jk = ess / q, ess / (q * r)
    total = 0.0
    for j in range(q):
        total += math.lgamma(a_j) - math.lgamma(a_j + counts[j].sum())
        for k in range(r):
            total += math.lgamma(a_jk + counts[j, k]) - math.lgamma(a_jk)
    return total


class TestScores:
    def test_bic_closed_form(self):
        ds = dataset(X=[0] * 50 + [1] * 50)
        assert family_score(ds, "X", [], BIC) == pytest.approx(100 * math.log(0.5) - 0.5 * math.log(100), abs=1e-12)

    def test_bdeu_single_row(self):
        ds = DiscreteDataset.from_columns({"X": np.array([0])}, cardinalities={"X": 2})
        assert family_score(ds, "X", [], BDEU) == pytest.approx(math.log(0.5), abs=1e-12)

    def test_bdeu_matches_formula(self, rng):
        cols = {"A": rng.integers(0, 3, 200), "B": rng.integers(0, 2, 200), "C": rng.integers(0, 4, 200)}
        ds = dataset(**cols)
        for ess in (0.5, 1.0, 10.0):
            got = family_score(ds, "C", ["A", "B"], ScoreSpec("BDeu", ess))
            want = bdeu_oracle(cols["C"], [cols["A"], cols["B"]], 4, [3, 2], ess)
            assert got == pytest.approx(want, rel=1e-12)

    def test_independent_parent_lowers_bic(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            ds = dataset(C=rng.integers(0, 2, 1000), P=rng.integers(0, 2, 1000))
            assert family_score(ds, "C", ["P"], BIC) < family_score(ds, "C", [], BIC)

    def test_empty_effective_data(self):
        ds = DiscreteDataset.from_columns({"A": np.array([0, -1]), "B": np.array([-1, 1])})
        with pytest.raises(EmptyEffectiveData):
            family_score(ds, "A", ["B"], BIC)

    def test_pairwise_deletion(self):
        full = dataset(A=[0, 1, 1, 0], B=[0, 1, 1, 1])
        holed = DiscreteDataset.from_columns({"A": np.array([0, 1, 1, 0, -1]), "B": np.array([0, 1, 1, 1, 0])})
        assert family_score(holed, "A", ["B"], BIC) == family_score(full, "A", ["B"], BIC)

    @pytest.mark.parametrize("spec", [BIC, BDEU, ScoreSpec("BDeu", 7.0)])
    def test_decomposable(self, spec):
        rng = np.random.default_rng(0)
        for _ in range(100):
            net = random_network(rng, 5, cards=[2, 3, 2, 4, 3])
            ds = sample(net, 150, rng)
            total = sum(family_score(ds, n, net.dag.parents(n), spec) for n in net.nodes)
            assert graph_score(ds, net.dag, spec) == pytest.approx(total, rel=1e-12)

    @pytest.mark.parametrize("spec", [BIC, BDEU])
    def test_two_node_equivalence(self, spec, rng):
        ds = dataset(A=rng.integers(0, 3, 500), B=rng.integers(0, 2, 500))
        ab = graph_score(ds, Dag.from_edges("AB", [("A", "B")]), spec)
        ba = graph_score(ds, Dag.from_edges("AB", [("B", "A")]), spec)
        assert ab == pytest.approx(ba, abs=1e-9)

    def test_invalid_ess(self):
        with pytest.raises(ValueError):
            ScoreSpec("BDeu", 0.0)


class TestHillClimb:
    def test_strong_pair(self, two_node_net):
        ds = sample(two_node_net, 10000, np.random.default_rng(1))
        dag = hill_climb(ds, BDEU, restarts=3, seed=0)
        assert len(dag.edges) == 1
        best = max(all_dags(["A", "B"]), key=lambda d: graph_score(ds, d, BDEU))
        assert graph_score(ds, dag, BDEU) == pytest.approx(graph_score(ds, best, BDEU), abs=1e-9)

    def test_independent_gives_empty(self):
        empty = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            ds = dataset(**{v: rng.integers(0, 2, 5000) for v in "ABC"})
            empty += len(hill_climb(ds, BDEU, restarts=2, seed=seed).edges) == 0
        assert empty >= 19

    def test_collider_matches_exhaustive_oracle(self, collider_net):
        ds = sample(collider_net, 10000, np.random.default_rng(7))
        dags = list(all_dags(["A", "B", "C"]))
        assert len(dags) == 25
        best = max(dags, key=lambda d: graph_score(ds, d, BDEU))
        assert best.edges == {("A", "C"), ("B", "C")}
        assert hill_climb(ds, BDEU, seed=7).edges == best.edges

    def test_trace_monotone_and_bounded(self):
        rng = np.random.default_rng(3)
        net = random_network(rng, 7, cards=3, max_parents=3, edge_prob=0.6, concentration=0.3)
        ds = sample(net, 800, rng)
        res = hill_climb_search(ds, BIC, max_parents=2, restarts=4, seed=3)
        assert all(b > a for a, b in zip(res.trace, res.trace[1:]))
        assert all(res.dag.in_degree(n) <= 2 for n in res.dag.nodes)
        assert res.score == pytest.approx(graph_score(ds, res.dag, BIC), rel=1e-12)

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        ds = sample(random_network(rng, 6, cards=2, concentration=0.3), 600, rng)
        assert hill_climb(ds, seed=11) == hill_climb(ds, seed=11)

    def test_forbidden(self, two_node_net):
        ds = sample(two_node_net, 5000, np.random.default_rng(2))
        dag = hill_climb(ds, BDEU, forbidden=[("A", "B"), ("B", "A")])
        assert not dag.edges


class TestCITest:
    def test_copy_is_dependent(self, rng):
        x = rng.integers(0, 2, 1000)
        res = chi_square_ci_test(dataset(x=x, y=x.copy()), "x", "y")
        assert res.p_value < 1e-6 and not res.independent

    def test_calibration(self):
        accepted = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            ds = dataset(x=rng.integers(0, 2, 10000), y=rng.integers(0, 2, 10000))
            res = chi_square_ci_test(ds, "x", "y", alpha=0.05)
            assert res.dof == 1
            accepted += res.independent
        assert 88 <= accepted <= 100

    def test_common_driver(self, rng):
        n = 10000
        z = rng.integers(0, 2, n)
        x = np.where(rng.random(n) < 0.85, z, 1 - z)
        y = np.where(rng.random(n) < 0.85, z, 1 - z)
        ds = dataset(x=x, y=y, z=z)
        assert not chi_square_ci_test(ds, "x", "y").independent
        assert chi_square_ci_test(ds, "x", "y", ["z"], alpha=0.01).independent

    def test_statistic_hand_value(self):
        # 2x2 table [[30, 10], [10, 30]]: expected 20 everywhere, statistic 20.
        x = [0] * 40 + [1] * 40
        y = [0] * 30 + [1] * 10 + [0] * 10 + [1] * 30
        res = chi_square_ci_test(dataset(x=x, y=y), "x", "y")
        assert res.statistic == pytest.approx(20.0)
        assert res.dof == 1

    def test_low_power_flag(self):
        res = chi_square_ci_test(dataset(x=[0, 1, 0, 1], y=[0, 1, 1, 0]), "x", "y")
        assert res.low_power_strata == 1

    def test_empty_stratum_data(self):
        ds = DiscreteDataset.from_columns({"x": np.array([0, -1]), "y": np.array([-1, 1])})
        with pytest.raises(EmptyStratumData):
            chi_square_ci_test(ds, "x", "y")

    def test_bad_arguments(self, rng):
        ds = dataset(x=rng.integers(0, 2, 10), y=rng.integers(0, 2, 10))
        with pytest.raises(ValueError):
            chi_square_ci_test(ds, "x", "x")
        with pytest.raises(ValueError):
            chi_square_ci_test(ds, "x", "y", ["x"])


class TestPC:
    def test_collider(self, collider_net):
        ds = sample(collider_net, 10000, np.random.default_rng(5))
        res = pc_search(ds, alpha=0.01)
        assert res.skeleton == {frozenset("AC"), frozenset("BC")}
        assert res.dag.edges == {("A", "C"), ("B", "C")}
        assert not res.fallback_oriented

    def test_independent(self, rng):
        ds = dataset(**{v: rng.integers(0, 2, 3000) for v in "ABCD"})
        assert pc_learn(ds, alpha=0.001).edges == frozenset()

    def test_chain_uses_fallback(self):
        dag = Dag.from_edges("ABC", [("A", "B"), ("B", "C")])
        net = network_from_tables(dag, {"A": [[0.5, 0.5]], "B": [[0.9, 0.1], [0.1, 0.9]], "C": [[0.85, 0.15], [0.15, 0.85]]})
        ds = sample(net, 10000, np.random.default_rng(6))
        res = pc_search(ds, alpha=0.01)
        assert res.skeleton == {frozenset("AB"), frozenset("BC")}
        assert res.dag.edges == {("A", "B"), ("B", "C")}
        assert set(res.fallback_oriented) == {("A", "B"), ("B", "C")}
        # Every DAG with this skeleton and no collider scores the same under BDeu.
        equivalents = [d for d in [dag, Dag.from_edges("ABC", [("B", "A"), ("B", "C")]),
                                   Dag.from_edges("ABC", [("C", "B"), ("B", "A")])]]
        scores = [graph_score(ds, d, BDEU) for d in equivalents]
        assert max(scores) - min(scores) < 1e-6

    def test_result_is_dag(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            net = random_network(rng, 6, cards=2, edge_prob=0.5, concentration=0.3)
            dag = pc_learn(sample(net, 2000, rng), alpha=0.05)
            order = dag.topological_order()
            pos = {n: i for i, n in enumerate(order)}
            assert all(pos[p] < pos[c] for p, c in dag.edges)


class TestParams:
    def test_empirical_frequency(self):
        ds = dataset(X=[0] * 75 + [1] * 25)
        net = fit_cpts_mle(ds, Dag.from_edges("X"), alpha_smoothing=0)
        np.testing.assert_allclose(net.cpts["X"].table, [[0.75, 0.25]])

    def test_unobserved_row_uniform(self):
        ds = DiscreteDataset.from_columns({"P": np.array([0, 0, 0]), "C": np.array([0, 1, 1])}, cardinalities={"P": 2, "C": 2})
        net = fit_cpts_mle(ds, Dag.from_edges(["P", "C"], [("P", "C")]), alpha_smoothing=1)
        np.testing.assert_allclose(net.cpts["C"].table, [[2 / 5, 3 / 5], [0.5, 0.5]])

    def test_zero_row_without_smoothing(self):
        ds = DiscreteDataset.from_columns({"P": np.array([0, 0]), "C": np.array([0, 1])}, cardinalities={"P": 2, "C": 2})
        with pytest.raises(ZeroRowWithoutSmoothing):
            fit_cpts_mle(ds, Dag.from_edges(["P", "C"], [("P", "C")]), alpha_smoothing=0)

    def test_mle_requires_complete(self):
        ds = DiscreteDataset.from_columns({"X": np.array([0, -1, 1])})
        with pytest.raises(MissingDataError):
            fit_cpts_mle(ds, Dag.from_edges("X"))

    def test_mle_round_trip(self, collider_net):
        ds = sample(collider_net, 10000, np.random.default_rng(9))
        fit = fit_cpts_mle(ds, collider_net.dag, alpha_smoothing=1)
        for n in collider_net.nodes:
            assert np.max(np.abs(fit.cpts[n].table - collider_net.cpts[n].table)) < 0.02

    def test_em_complete_equals_mle(self, collider_net):
        ds = sample(collider_net, 2000, np.random.default_rng(10))
        em = fit_cpts_em(ds, collider_net.dag, alpha_smoothing=1)
        mle = fit_cpts_mle(ds, collider_net.dag, alpha_smoothing=1)
        assert em.iterations == 1
        for n in collider_net.nodes:
            np.testing.assert_array_equal(em.network.cpts[n].table, mle.cpts[n].table)

    def test_em_mcar(self, collider_net):
        rng = np.random.default_rng(11)
        ds = mask_mcar(sample(collider_net, 10000, rng), 0.2, rng)
        res = fit_cpts_em(ds, collider_net.dag, alpha_smoothing=1)
        assert res.converged
        for n in collider_net.nodes:
            assert np.max(np.abs(res.network.cpts[n].table - collider_net.cpts[n].table)) < 0.05
        assert all(b >= a - 1e-9 for a, b in zip(res.objective, res.objective[1:]))

    def test_em_log_likelihood_monotone_without_prior(self):
        rng = np.random.default_rng(12)
        net = random_network(rng, 5, cards=[2, 3, 2, 2, 3], edge_prob=0.6)
        ds = mask_mcar(sample(net, 1500, rng), 0.3, rng)
        res = fit_cpts_em(ds, net.dag, alpha_smoothing=0, tolerance=1e-10)
        assert res.log_likelihood == res.objective
        assert all(b >= a - 1e-9 for a, b in zip(res.log_likelihood, res.log_likelihood[1:]))

    def test_nearly_latent_variable(self, two_node_net):
        rng = np.random.default_rng(13)
        data = sample(two_node_net, 300, rng).data.copy()
        data[1:, 0] = -1
        ds = DiscreteDataset(("A", "B"), (2, 2), (("Down", "Up"), ("Down", "Up")), data)
        res = fit_cpts_em(ds, two_node_net.dag, alpha_smoothing=1, max_iterations=30)
        assert all(b >= a - 1e-9 for a, b in zip(res.objective, res.objective[1:]))
        assert isinstance(res.non_convergence, bool)

    def test_unobserved_variable(self, two_node_net):
        data = sample(two_node_net, 20, np.random.default_rng(14)).data.copy()
        data[:, 0] = -1
        ds = DiscreteDataset(("A", "B"), (2, 2), (("Down", "Up"), ("Down", "Up")), data)
        with pytest.raises(NoObservationsForVariable):
            fit_cpts_em(ds, two_node_net.dag)
