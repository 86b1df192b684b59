"""Cross-validated comparison of discretisation choices and model selection.

Folds are random (seeded), not time-ordered blocks. Neighbouring days can
land in different folds, which is optimistic for autocorrelated series;
reports carry a note saying so.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from . import discretize as disc
from .data_ingest import TimeSeriesTable
from .errors import CryptoBNError, EmptyInput, LengthMismatch, SingleClass, TooFewRows
from .graph import Dag
from .infer import posterior_batch
from .learn import BDEU, ScoreSpec, fit_cpts_em, fit_cpts_mle, hill_climb, pc_learn
from .network import BayesianNetwork

LEAKAGE_NOTE = (
    "random k-fold on daily series: adjacent days may fall in train and test folds"
)


def derive_seed(master: int, *parts) -> int:
    """Stable 32-bit seed from a master seed and a path of names.

    sha256 over "master|part1|part2|..." keeps the value the same across
    machines and Python versions.
    """
    text = "|".join([str(int(master)), *(str(p) for p in parts)])
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:4], "big")


@dataclass(frozen=True)
class ModelConfig:
    target: str
    method: str = "KMeans"
    k: int = 2
    score: ScoreSpec = BDEU
    max_parents: int = 4
    alpha: float = 1.0
    seed: int = 0
    restarts: int = 10
    learner: str = "hill_climb"
    pc_alpha: float = 0.05
    forbidden: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.method not in disc.METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.learner not in ("hill_climb", "pc"):
            raise ValueError(f"unknown learner {self.learner!r}")
        object.__setattr__(self, "forbidden", tuple(tuple(e) for e in self.forbidden))

    def sort_key(self) -> tuple:
        return (self.target, disc.METHODS.index(self.method), self.k, self.learner, self.score.kind, self.seed)

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "method": self.method,
            "k": self.k,
            "score": self.score.to_json(),
            "max_parents": self.max_parents,
            "alpha": self.alpha,
            "seed": self.seed,
            "restarts": self.restarts,
            "learner": self.learner,
            "pc_alpha": self.pc_alpha,
            "forbidden": [list(e) for e in self.forbidden],
        }


@dataclass
class CvReport:
    config: ModelConfig
    fold_accuracies: list[float]
    accuracy: float
    auc_per_state: list[float]
    auc: float
    parameter_count: int
    learned_dag: Dag | None
    n_test: int = 0
    error: str | None = None
    variables: tuple[str, ...] = ()
    network: BayesianNetwork | None = field(default=None, compare=False, repr=False)
    discretizers: dict[str, disc.Discretizer] | None = field(default=None, compare=False, repr=False)
    fold_models: list | None = field(default=None, compare=False, repr=False)

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_json(self) -> dict:
        def num(x):
            return None if x is None or (isinstance(x, float) and math.isnan(x)) else float(x)

        return {
            "config": self.config.to_json(),
            "variables": list(self.variables),
            "fold_accuracies": [num(a) for a in self.fold_accuracies],
            "accuracy": num(self.accuracy),
            "auc_per_state": [num(a) for a in self.auc_per_state],
            "auc": num(self.auc),
            "parameter_count": self.parameter_count,
            "n_test": self.n_test,
            "learned_dag": None if self.learned_dag is None else self.learned_dag.to_json(),
            "discretizers": None
            if self.discretizers is None
            else {n: d.to_json() for n, d in self.discretizers.items()},
            "error": self.error,
            "note": LEAKAGE_NOTE,
        }


def kfold_split(n_rows: int, folds: int = 5, seed: int = 0) -> np.ndarray:
    """Fold id per row: a seeded shuffle dealt round-robin into ``folds`` parts."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if n_rows < folds:
        raise TooFewRows(f"{n_rows} rows cannot fill {folds} folds")
    perm = np.random.default_rng(seed).permutation(n_rows)
    assignment = np.empty(n_rows, dtype=np.int64)
    assignment[perm] = np.arange(n_rows) % folds
    return assignment


def accuracy(predictions: Sequence[int], truths: Sequence[int]) -> float:
    predictions = np.asarray(predictions)
    truths = np.asarray(truths)
    if predictions.shape != truths.shape:
        raise LengthMismatch(f"{predictions.size} predictions vs {truths.size} truths")
    if predictions.size == 0:
        raise EmptyInput("no predictions")
    return float(np.count_nonzero(predictions == truths)) / predictions.size


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """P(random positive outscores random negative), ties counting one half.

    Computed from midranks (Mann-Whitney U).
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    if scores.shape != labels.shape:
        raise LengthMismatch("scores and labels differ in length")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("roc_auc needs both classes")
    ranks = rankdata(scores)
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def multiclass_auc(posteriors: np.ndarray, labels: Sequence[int]) -> tuple[list[float], float]:
    """One-vs-rest AUC per state and their prevalence-weighted mean.

    States absent from ``labels`` get NaN and drop out of the mean. With two
    states the result reduces to ``roc_auc`` on the second state's column.
    """
    posteriors = np.asarray(posteriors, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    n_states = posteriors.shape[1]
    present = np.unique(labels)
    if present.size < 2:
        raise SingleClass("multiclass_auc needs at least two label states")
    if n_states == 2:
        a = roc_auc(posteriors[:, 1], labels == 1)
        return [a, a], a
    per_state = []
    total = 0.0
    weight = 0
    for s in range(n_states):
        if s not in present:
            per_state.append(math.nan)
            continue
        a = roc_auc(posteriors[:, s], labels == s)
        per_state.append(a)
        count = int(np.count_nonzero(labels == s))
        total += a * count
        weight += count
    return per_state, total / weight


def _fit_discretizers(table: TimeSeriesTable, rows: np.ndarray, method: str, k: int) -> dict[str, disc.Discretizer]:
    return {name: disc.fit(method, values[rows], k) for name, values in table.columns.items()}


def _discretize_rows(table: TimeSeriesTable, rows: np.ndarray, discretizers) -> disc.DiscreteDataset:
    return disc.discretize_table({n: v[rows] for n, v in table.columns.items()}, discretizers)


def fit_model(data: disc.DiscreteDataset, config: ModelConfig, seed: int) -> BayesianNetwork:
    """Learn a structure and its CPTs on one discretised data set."""
    if config.learner == "pc":
        dag = pc_learn(data, config.pc_alpha)
    else:
        dag = hill_climb(data, config.score, config.max_parents, config.restarts, seed, config.forbidden)
    if data.has_missing():
        return fit_cpts_em(data, dag, config.alpha).network
    return fit_cpts_mle(data, dag, config.alpha)


def fit_final(table: TimeSeriesTable, config: ModelConfig):
    """Discretizers and network fitted on every row of ``table``."""
    rows = np.arange(table.n_rows)
    discretizers = _fit_discretizers(table, rows, config.method, config.k)
    data = _discretize_rows(table, rows, discretizers)
    net = fit_model(data, config, derive_seed(config.seed, "final"))
    return discretizers, net


def cross_validate(table: TimeSeriesTable, config: ModelConfig, folds: int = 5, keep_fold_models: bool = False) -> CvReport:
    """k-fold CV of one configuration, then a refit on all rows.

    Each fold fits its discretizers, structure and CPTs on its training rows
    only. The target of every test row is predicted with all other variables
    of that row as evidence. Accuracy and AUC are pooled over folds.
    """
    if config.target not in table.columns:
        raise KeyError(f"target {config.target!r} not in table")
    n = table.n_rows
    if n < folds * (config.k + 1):
        raise TooFewRows(f"{n} rows < folds * (k + 1) = {folds * (config.k + 1)}")
    names = table.names
    assignment = kfold_split(n, folds, derive_seed(config.seed, "folds"))
    target_values = table[config.target]

    preds, truths, posts = [], [], []
    fold_acc = []
    fold_models = []
    for f in range(folds):
        train = np.flatnonzero(assignment != f)
        test = np.flatnonzero(assignment == f)
        discretizers = _fit_discretizers(table, train, config.method, config.k)
        train_data = _discretize_rows(table, train, discretizers)
        net = fit_model(train_data, config, derive_seed(config.seed, "fold", f))
        if keep_fold_models:
            fold_models.append((discretizers, net))
        test = test[~np.isnan(target_values[test])]
        if test.size == 0:
            fold_acc.append(math.nan)
            continue
        test_data = _discretize_rows(table, test, discretizers)
        post = posterior_batch(net, test_data.data, names, config.target)
        truth = test_data.column(config.target)
        pred = np.argmax(post, axis=1)
        fold_acc.append(accuracy(pred, truth))
        preds.append(pred)
        truths.append(truth)
        posts.append(post)

    pred = np.concatenate(preds)
    truth = np.concatenate(truths)
    post = np.concatenate(posts)
    acc = accuracy(pred, truth)
    try:
        per_state, auc = multiclass_auc(post, truth)
    except SingleClass:
        per_state, auc = [math.nan] * config.k, math.nan

    discretizers, net = fit_final(table, config)
    return CvReport(
        config=config,
        fold_accuracies=fold_acc,
        accuracy=acc,
        auc_per_state=per_state,
        auc=auc,
        parameter_count=net.parameter_count(),
        learned_dag=net.dag,
        n_test=int(truth.size),
        variables=tuple(names),
        network=net,
        discretizers=discretizers,
        fold_models=fold_models if keep_fold_models else None,
    )


def _error_report(config: ModelConfig, variables, exc: Exception) -> CvReport:
    return CvReport(
        config=config,
        fold_accuracies=[],
        accuracy=math.nan,
        auc_per_state=[],
        auc=math.nan,
        parameter_count=0,
        learned_dag=None,
        error=f"{type(exc).__name__}: {exc}",
        variables=tuple(variables),
    )


def _run_cell(args) -> CvReport:
    table, config, folds = args
    try:
        return cross_validate(table, config, folds)
    except CryptoBNError as exc:
        return _error_report(config, table.names, exc)


def grid_configs(
    targets: Sequence[str],
    methods: Sequence[str] = disc.METHODS,
    bins: Sequence[int] = (2, 3, 4),
    base: ModelConfig | None = None,
    master_seed: int = 0,
) -> list[ModelConfig]:
    """One config per (target, method, k), each with its own derived seed."""
    cells = []
    for target in targets:
        for method in methods:
            for k in bins:
                template = base if base is not None else ModelConfig(target=target)
                cells.append(
                    replace(
                        template,
                        target=target,
                        method=method,
                        k=int(k),
                        seed=derive_seed(master_seed, target, method, int(k)),
                    )
                )
    if not cells:
        raise EmptyInput("empty grid")
    return cells


def run_grid(
    table: TimeSeriesTable,
    targets: Sequence[str],
    methods: Sequence[str] = disc.METHODS,
    bins: Sequence[int] = (2, 3, 4),
    base: ModelConfig | None = None,
    master_seed: int = 0,
    folds: int = 5,
    variables: Mapping[str, Sequence[str]] | None = None,
    n_jobs: int = 1,
) -> list[CvReport]:
    """Cross-validate every (target, method, k) cell.

    ``variables`` optionally restricts each target's network to a column
    subset. A failing cell yields a report with ``error`` set; the grid goes
    on. Reports come back sorted by (target, method, k) whatever the
    execution order.
    """
    configs = grid_configs(targets, methods, bins, base, master_seed)
    jobs = []
    for cfg in configs:
        cols = list(variables[cfg.target]) if variables and cfg.target in variables else table.names
        if cfg.target not in cols:
            cols = [cfg.target, *cols]
        jobs.append((table.select(cols), cfg, folds))
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            reports = list(pool.map(_run_cell, jobs))
    else:
        reports = [_run_cell(job) for job in jobs]
    return sorted(reports, key=lambda r: r.config.sort_key())


def _selection_key(report: CvReport) -> tuple:
    auc = report.auc if not math.isnan(report.auc) else -1.0
    return (-report.accuracy, -auc, report.parameter_count, report.config.sort_key())


def select_best(reports: Iterable[CvReport]) -> ModelConfig:
    """Highest accuracy, then highest AUC, then fewest parameters.

    The parameter count settles cases where the accuracy and AUC leaders
    differ only by ties, preferring the simpler network.
    """
    usable = [r for r in reports if r.ok]
    if not usable:
        raise EmptyInput("no successful reports to select from")
    return min(usable, key=_selection_key).config


def best_report(reports: Iterable[CvReport]) -> CvReport:
    usable = [r for r in reports if r.ok]
    if not usable:
        raise EmptyInput("no successful reports to select from")
    return min(usable, key=_selection_key)


def reports_to_json(reports: Sequence[CvReport]) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2) + "\n"


def reports_to_markdown(reports: Sequence[CvReport]) -> str:
    """Table with one row per target and one column per (method, k).

    Cells read ``accuracy / AUC``; each target's selected model is in bold.
    """
    targets = []
    columns = []
    cells = {}
    for r in reports:
        c = r.config
        if c.target not in targets:
            targets.append(c.target)
        col = (c.method, c.k)
        if col not in columns:
            columns.append(col)
        cells[(c.target, col)] = r
    columns.sort(key=lambda mk: (disc.METHODS.index(mk[0]), mk[1]))
    header = "| Target | " + " | ".join(f"{m} k={k}" for m, k in columns) + " |"
    sep = "|---|" + "---|" * len(columns)
    lines = [header, sep]
    for t in targets:
        mine = [r for r in reports if r.config.target == t]
        try:
            winner = best_report(mine)
        except EmptyInput:
            winner = None
        row = [t]
        for col in columns:
            r = cells.get((t, col))
            if r is None:
                row.append("")
            elif not r.ok:
                row.append("error")
            else:
                auc = "n/a" if math.isnan(r.auc) else f"{r.auc:.5f}"
                text = f"{r.accuracy:.5f} / {auc}"
                row.append(f"**{text}**" if r is winner else text)
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"
