import hashlib
import itertools
import json
import math

import numpy as np
import pytest
from helpers import fake_report, make_table, null_table, planted_table

from cryptobn.discretize import METHODS, apply
from cryptobn.errors import EmptyInput, LengthMismatch, SingleClass, TooFewRows
from cryptobn.evaluate import (
    ModelConfig,
    accuracy,
    cross_validate,
    derive_seed,
    grid_configs,
    kfold_split,
    multiclass_auc,
    reports_to_json,
    reports_to_markdown,
    roc_auc,
    run_grid,
    select_best,
)
from cryptobn.network import parameter_count
from cryptobn.simulate import random_network


def pairwise_auc(scores, labels):
    """Count positive/negative pairs directly."""
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


class TestKFold:
    def test_even(self):
        assert np.bincount(kfold_split(10, 5, seed=1)).tolist() == [2] * 5

    def test_remainder(self):
        assert sorted(np.bincount(kfold_split(11, 5, seed=1)).tolist()) == [2, 2, 2, 2, 3]

    def test_deterministic(self):
        np.testing.assert_array_equal(kfold_split(100, 5, 7), kfold_split(100, 5, 7))
        assert not np.array_equal(kfold_split(100, 5, 7), kfold_split(100, 5, 8))

    def test_too_few(self):
        with pytest.raises(TooFewRows):
            kfold_split(4, 5)

    @pytest.mark.parametrize("n", [5, 17, 123, 1000])
    def test_sizes_within_one(self, n):
        sizes = np.bincount(kfold_split(n, 5, n))
        assert sizes.max() - sizes.min() <= 1 and sizes.sum() == n


class TestMetrics:
    def test_accuracy(self):
        assert accuracy([0, 1, 1], [0, 1, 1]) == 1.0
        assert accuracy([0, 1], [1, 0]) == 0.0
        assert accuracy([0, 1, 1, 0], [0, 1, 1, 1]) == 0.75
        with pytest.raises(LengthMismatch):
            accuracy([0], [0, 1])
        with pytest.raises(EmptyInput):
            accuracy([], [])

    def test_auc_examples(self):
        assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
        assert roc_auc([0.4] * 6, [0, 1, 0, 1, 0, 1]) == 0.5
        assert roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
        with pytest.raises(SingleClass):
            roc_auc([0.1, 0.2], [1, 1])

    def test_auc_matches_pair_count(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 40))
            scores = np.round(rng.random(n), 1)
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                continue
            assert roc_auc(scores, labels) == pytest.approx(pairwise_auc(scores, labels), abs=1e-12)

    def test_binary_reduction(self, rng):
        p1 = rng.random(100)
        post = np.column_stack([1 - p1, p1])
        labels = rng.integers(0, 2, 100)
        per_state, agg = multiclass_auc(post, labels)
        assert agg == roc_auc(p1, labels)

    def test_perfect_three_state(self):
        labels = np.array([0, 1, 2, 0, 1, 2])
        per_state, agg = multiclass_auc(np.eye(3)[labels], labels)
        assert per_state == [1.0, 1.0, 1.0] and agg == 1.0

    def test_weighted_mean(self):
        labels = np.array([0, 0, 0, 1, 2, 2])
        post = np.random.default_rng(0).dirichlet(np.ones(3), size=6)
        per_state, agg = multiclass_auc(post, labels)
        assert agg == pytest.approx((3 * per_state[0] + per_state[1] + 2 * per_state[2]) / 6)

    def test_shuffled_posteriors(self):
        values = []
        for seed in range(50):
            rng = np.random.default_rng(seed)
            labels = rng.integers(0, 3, 2000)
            post = np.eye(3)[rng.permutation(labels)] * 0.8 + 0.2 / 3
            values.append(multiclass_auc(post, labels)[1])
        assert abs(np.mean(values) - 0.5) <= 0.05
        assert all(abs(v - 0.5) <= 0.05 for v in values)


class TestCrossValidate:
    def test_planted(self):
        report = cross_validate(planted_table(1000, 1), ModelConfig("Target", "EqualQuantile", 2, restarts=3))
        assert report.accuracy >= 0.99
        assert report.n_test == 1000
        assert ("Driver", "Target") in report.learned_dag.edges or ("Target", "Driver") in report.learned_dag.edges

    def test_pooled_accuracy(self):
        report = cross_validate(null_table(203, 2), ModelConfig("Target", "KMeans", 3, restarts=2))
        sizes = np.bincount(kfold_split(203, 5, derive_seed(report.config.seed, "folds")))
        pooled = sum(a * s for a, s in zip(report.fold_accuracies, sizes)) / sizes.sum()
        assert report.accuracy == pytest.approx(pooled, abs=1e-12)
        assert 0.0 <= report.accuracy <= 1.0

    def test_deterministic(self):
        cfg = ModelConfig("Target", "KMeans", 3, restarts=3, seed=5)
        a = cross_validate(planted_table(300, 3), cfg)
        b = cross_validate(planted_table(300, 3), cfg)
        assert json.dumps(a.to_json()) == json.dumps(b.to_json())

    def test_parameter_count(self):
        report = cross_validate(planted_table(200, 4), ModelConfig("Target", "EqualInterval", 3, restarts=2))
        net = report.network
        direct = sum(cpt.table.size - cpt.table.shape[0] for cpt in net.cpts.values())
        assert report.parameter_count == direct

    def test_no_leakage(self):
        cfg = ModelConfig("Target", "KMeans", 2, restarts=2, seed=9)
        table = planted_table(250, 5)
        base = cross_validate(table, cfg, keep_fold_models=True)
        test_rows = np.flatnonzero(kfold_split(250, 5, derive_seed(cfg.seed, "folds")) == 0)
        perturbed = {n: np.array(v) for n, v in table.columns.items()}
        for n in perturbed:
            perturbed[n][test_rows] = perturbed[n][test_rows] * 50 + 7
        other = cross_validate(make_table(perturbed), cfg, keep_fold_models=True)
        (d0, net0), (d1, net1) = base.fold_models[0], other.fold_models[0]
        assert d0 == d1
        assert net0.dag == net1.dag
        for n in net0.nodes:
            np.testing.assert_array_equal(net0.cpts[n].table, net1.cpts[n].table)

    def test_test_values_outside_training_range(self):
        table = planted_table(100, 6)
        report = cross_validate(table, ModelConfig("Target", "EqualInterval", 4, restarts=1))
        assert report.n_test == 100
        d = report.discretizers["Driver"]
        assert apply(d, [-1e9, 1e9]).tolist() == [0, 3]

    def test_too_few_rows(self):
        with pytest.raises(TooFewRows):
            cross_validate(null_table(12, 0), ModelConfig("Target", "KMeans", 3))


@pytest.mark.parametrize("n", [3, 5])
def test_parameter_count_matches_enumeration(n):
    rng = np.random.default_rng(n)
    for _ in range(30):
        net = random_network(rng, n, cards=[int(c) for c in rng.integers(2, 5, n)])
        cards = {v: net.cardinality(v) for v in net.nodes}
        enumerated = sum(len(list(itertools.product(*[range(cards[p]) for p in net.dag.parents(v)]))) * (cards[v] - 1) for v in net.nodes)
        assert parameter_count(net.dag, cards) == enumerated == net.parameter_count()


class TestGrid:
    def test_nine_cells(self):
        table = planted_table(150, 7)
        reports = run_grid(table, ["Target"], base=ModelConfig("Target", restarts=1), master_seed=3)
        assert len(reports) == 9
        assert {(r.config.method, r.config.k) for r in reports} == set(itertools.product(METHODS, (2, 3, 4)))
        assert all(r.ok for r in reports)

    def test_order_independent(self):
        table = planted_table(120, 8)
        base = ModelConfig("Target", restarts=1)
        a = run_grid(table, ["Target", "Driver"], METHODS, (2, 3), base, 11)
        b = run_grid(table, ["Driver", "Target"], tuple(reversed(METHODS)), (3, 2), base, 11)
        assert reports_to_json(a) == reports_to_json(b)

    def test_cell_seeds(self):
        cfgs = grid_configs(["T"], ["KMeans"], [2], master_seed=42)
        assert cfgs[0].seed == derive_seed(42, "T", "KMeans", 2)
        digest = hashlib.sha256(b"42|T|KMeans|2").digest()
        assert derive_seed(42, "T", "KMeans", 2) == int.from_bytes(digest[:4], "big")

    def test_failing_cell_recorded(self):
        rng = np.random.default_rng(9)
        # Heavy ties: quantile cuts collide at k=4.
        table = make_table({"Target": rng.integers(0, 2, 60).astype(float), "X": rng.standard_normal(60)})
        reports = run_grid(table, ["Target"], ["EqualQuantile"], (2, 4), ModelConfig("Target", restarts=1))
        assert [r.ok for r in reports] == [True, False]
        assert "DuplicateCutPoints" in reports[1].error or "TooFewDistinctValues" in reports[1].error

    def test_parallel_matches_serial(self):
        table = planted_table(120, 10)
        base = ModelConfig("Target", restarts=1)
        serial = run_grid(table, ["Target"], METHODS, (2,), base, 1, n_jobs=1)
        parallel = run_grid(table, ["Target"], METHODS, (2,), base, 1, n_jobs=2)
        assert reports_to_json(serial) == reports_to_json(parallel)

    def test_markdown(self):
        reports = [
            fake_report("BNB", "KMeans", 2, 0.9, 0.8, 10),
            fake_report("BNB", "EqualInterval", 2, 0.7, 0.6, 10),
        ]
        md = reports_to_markdown(reports)
        assert "**0.90000 / 0.80000**" in md
        assert md.splitlines()[0].startswith("| Target | EqualInterval k=2 | KMeans k=2")


class TestSelectBest:
    def test_single(self):
        r = fake_report("T", "KMeans", 2, 0.8, 0.7, 5)
        assert select_best([r]) == r.config

    def test_occam(self):
        small = fake_report("T", "KMeans", 2, 0.9, 0.8, 12)
        big = fake_report("T", "EqualQuantile", 3, 0.9, 0.8, 30)
        assert select_best([big, small]) == small.config

    def test_accuracy_first(self):
        hi = fake_report("T", "KMeans", 2, 0.9, 0.6, 50)
        lo = fake_report("T", "EqualQuantile", 2, 0.8, 0.9, 5)
        assert select_best([lo, hi]) == hi.config

    def test_empty(self):
        with pytest.raises(EmptyInput):
            select_best([])

    def test_nan_auc_ranks_last(self):
        a = fake_report("T", "KMeans", 2, 0.9, math.nan, 5)
        b = fake_report("T", "EqualQuantile", 2, 0.9, 0.5, 50)
        assert select_best([a, b]) == b.config
