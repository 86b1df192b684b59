"""CPT estimation: smoothed maximum likelihood and EM for missing cells."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..discretize import DiscreteDataset
from ..errors import (
    MissingDataError,
    NoObservationsForVariable,
    StateSpaceTooLarge,
    ZeroRowWithoutSmoothing,
)
from ..graph import Dag
from ..network import BayesianNetwork, Cpt

# Largest joint over one row's missing variables that the E-step enumerates.
EM_ROW_STATE_LIMIT = 2**20


def _family_index(data: DiscreteDataset, dag: Dag, node: str):
    parents = dag.parents(node)
    return data.index(node), [data.index(p) for p in parents], parents


def _normalise_counts(counts: np.ndarray, alpha: float, node: str, previous: np.ndarray | None = None) -> np.ndarray:
    r = counts.shape[1]
    totals = counts.sum(axis=1, keepdims=True)
    if alpha > 0:
        return (counts + alpha) / (totals + alpha * r)
    empty = totals[:, 0] == 0
    if np.any(empty) and previous is None:
        raise ZeroRowWithoutSmoothing(
            f"{node!r}: {int(empty.sum())} parent configuration(s) unobserved and smoothing is 0"
        )
    table = np.divide(counts, totals, out=np.zeros_like(counts, dtype=float), where=totals > 0)
    if np.any(empty):
        table[empty] = previous[empty]
    return table


def fit_cpts_mle(data: DiscreteDataset, dag: Dag, alpha_smoothing: float = 1.0) -> BayesianNetwork:
    """Row = (count + alpha) / (row total + alpha * r) for every CPT row."""
    if alpha_smoothing < 0:
        raise ValueError("alpha_smoothing must be >= 0")
    cols = [data.index(n) for n in dag.nodes]
    if np.any(data.data[:, cols] < 0):
        raise MissingDataError("data has missing cells; use fit_cpts_em")
    cpts = {}
    for node in dag.nodes:
        ci, pis, parents = _family_index(data, dag, node)
        counts, _ = kernels.family_counts(data.data, ci, pis, data.cardinalities)
        table = _normalise_counts(counts.astype(float), alpha_smoothing, node)
        cpts[node] = Cpt(node, tuple(parents), tuple(data.cardinalities[p] for p in pis), table)
    states = {n: data.state_labels[data.index(n)] for n in dag.nodes}
    return BayesianNetwork(dag, cpts, states)


@dataclass
class EMResult:
    network: BayesianNetwork
    log_likelihood: list[float] = field(default_factory=list)
    objective: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = True

    @property
    def non_convergence(self) -> bool:
        return not self.converged


def _log_prior(tables: dict[str, np.ndarray], alpha: float) -> float:
    if alpha <= 0:
        return 0.0
    return alpha * sum(float(np.sum(np.log(t))) for t in tables.values())


class _EStep:
    """Expected sufficient statistics for a fixed data set and DAG."""

    def __init__(self, data: DiscreteDataset, dag: Dag):
        self.nodes = list(dag.nodes)
        self.cols = [data.index(n) for n in self.nodes]
        self.cards = [data.cardinalities[c] for c in self.cols]
        self.parents = {n: dag.parents(n) for n in self.nodes}
        self.scope = {n: [*self.parents[n], n] for n in self.nodes}
        local = {n: i for i, n in enumerate(self.nodes)}
        self.scope_idx = {n: [local[v] for v in self.scope[n]] for n in self.nodes}

        matrix = data.data[:, self.cols]
        observed_any = np.any(matrix >= 0, axis=1)
        matrix = matrix[observed_any]
        for j, n in enumerate(self.nodes):
            if not np.any(matrix[:, j] >= 0):
                raise NoObservationsForVariable(n)
        complete = np.all(matrix >= 0, axis=1)
        self.complete_rows = matrix[complete]
        patterns, weights = np.unique(matrix[~complete], axis=0, return_counts=True)
        self.patterns = patterns
        self.weights = weights.astype(float)
        for row in patterns:
            size = math.prod(c for c, v in zip(self.cards, row) if v < 0)
            if size > EM_ROW_STATE_LIMIT:
                raise StateSpaceTooLarge(f"row with {size} joint missing states")

        # Complete rows contribute fixed counts.
        self.base_counts = {}
        for n in self.nodes:
            idx = self.scope_idx[n]
            shape = tuple(self.cards[i] for i in idx)
            flat = np.ravel_multi_index(tuple(self.complete_rows[:, i] for i in idx), shape) if len(self.complete_rows) else np.zeros(0, dtype=np.int64)
            self.base_counts[n] = np.bincount(flat, minlength=math.prod(shape)).reshape(shape).astype(float)

    @property
    def has_missing(self) -> bool:
        return len(self.patterns) > 0

    def run(self, arrays: dict[str, np.ndarray]):
        """Return (expected counts per node, observed-data log-likelihood)."""
        counts = {n: c.copy() for n, c in self.base_counts.items()}
        ll = 0.0
        if len(self.complete_rows):
            logp = np.zeros(len(self.complete_rows))
            for n in self.nodes:
                idx = self.scope_idx[n]
                logp += np.log(arrays[n][tuple(self.complete_rows[:, i] for i in idx)])
            ll += float(np.sum(logp))
        for row, w in zip(self.patterns, self.weights):
            missing = [self.nodes[j] for j, v in enumerate(row) if v < 0]
            mid = {m: k for k, m in enumerate(missing)}
            operands = []
            const = 1.0
            reduced = {}
            for n in self.nodes:
                idx = self.scope_idx[n]
                index = tuple(int(row[i]) if row[i] >= 0 else slice(None) for i in idx)
                arr = arrays[n][index]
                free = [v for v, i in zip(self.scope[n], idx) if row[i] < 0]
                reduced[n] = (index, free)
                if free:
                    operands.extend([arr, [mid[v] for v in free]])
                else:
                    const *= float(arr)
            joint = np.einsum(*operands, list(range(len(missing)))) * const
            prob = float(joint.sum())
            ll += w * math.log(prob)
            joint = joint * (w / prob)
            for n in self.nodes:
                index, free = reduced[n]
                if free:
                    counts[n][index] += np.einsum(joint, list(range(len(missing))), [mid[v] for v in free])
                else:
                    counts[n][index] += w
        return counts, ll


def fit_cpts_em(
    data: DiscreteDataset,
    dag: Dag,
    alpha_smoothing: float = 1.0,
    tolerance: float = 1e-6,
    max_iterations: int = 200,
) -> EMResult:
    """EM over missing cells with exact per-row inference.

    The M-step uses the same smoothing as ``fit_cpts_mle``, so each iteration
    maximises log-likelihood + alpha * sum(log theta); that penalised value is
    tracked in ``objective`` and is non-decreasing. With ``alpha_smoothing=0``
    it equals the plain log-likelihood. Iteration stops when the objective
    gains less than ``tolerance``. Reaching ``max_iterations`` first sets
    ``converged=False``.
    """
    if alpha_smoothing < 0:
        raise ValueError("alpha_smoothing must be >= 0")
    estep = _EStep(data, dag)
    states = {n: data.state_labels[data.index(n)] for n in dag.nodes}
    parent_cards = {n: tuple(data.cardinalities[data.index(p)] for p in estep.parents[n]) for n in estep.nodes}

    def build(arrays):
        cpts = {
            n: Cpt(n, tuple(estep.parents[n]), parent_cards[n], arrays[n].reshape(-1, arrays[n].shape[-1]))
            for n in estep.nodes
        }
        return BayesianNetwork(dag, cpts, states)

    def m_step(counts, previous):
        arrays = {}
        for n in estep.nodes:
            c = counts[n].reshape(-1, counts[n].shape[-1])
            prev = None if previous is None else previous[n].reshape(c.shape)
            arrays[n] = _normalise_counts(c, alpha_smoothing, n, prev).reshape(counts[n].shape)
        return arrays

    if not estep.has_missing:
        arrays = m_step(estep.base_counts, None)
        _, ll = estep.run(arrays)
        return EMResult(build(arrays), [ll], [ll + _log_prior(arrays, alpha_smoothing)], 1, True)

    # Start from Laplace-smoothed available-case counts whatever alpha is: a
    # zero start could give a partially observed row probability 0.
    arrays = {}
    for n in estep.nodes:
        ci, pis, _ = _family_index(data, dag, n)
        c, _ = kernels.family_counts(data.data, ci, pis, data.cardinalities)
        c = np.asarray(c, dtype=float)
        arrays[n] = _normalise_counts(c, 1.0, n).reshape(estep.base_counts[n].shape)

    lls: list[float] = []
    objective: list[float] = []
    converged = False
    iterations = 0
    counts, ll = estep.run(arrays)
    lls.append(ll)
    objective.append(ll + _log_prior(arrays, alpha_smoothing))
    while iterations < max_iterations:
        arrays = m_step(counts, arrays)
        iterations += 1
        counts, ll = estep.run(arrays)
        lls.append(ll)
        objective.append(ll + _log_prior(arrays, alpha_smoothing))
        if objective[-1] - objective[-2] < tolerance:
            converged = True
            break
    return EMResult(build(arrays), lls, objective, iterations, converged)
