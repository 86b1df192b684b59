"""Builders shared by the evaluation, CLI and acceptance tests."""

from datetime import date, timedelta

import numpy as np

from cryptobn.data_ingest import TimeSeriesTable
from cryptobn.evaluate import CvReport, ModelConfig


def make_table(columns, start=date(2020, 1, 1)):
    n = len(next(iter(columns.values())))
    return TimeSeriesTable(tuple(start + timedelta(days=i) for i in range(n)), columns)


def planted_table(n, seed):
    rng = np.random.default_rng(seed)
    driver = rng.standard_normal(n)
    return make_table(
        {
            "Target": driver**3 + 2.0,
            "Driver": driver,
            "Noise1": rng.standard_normal(n),
            "Noise2": rng.standard_normal(n),
        }
    )


def null_table(n, seed):
    rng = np.random.default_rng(seed)
    return make_table({name: rng.standard_normal(n) for name in ("Target", "A", "B", "C")})


def fake_report(target, method, k, acc, auc, params):
    return CvReport(
        config=ModelConfig(target=target, method=method, k=k),
        fold_accuracies=[acc] * 5,
        accuracy=acc,
        auc_per_state=[auc] * k,
        auc=auc,
        parameter_count=params,
        learned_dag=None,
    )
