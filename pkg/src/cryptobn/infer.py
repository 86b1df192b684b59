"""Exact inference on discrete Bayesian networks.

``eliminate`` is the production path (variable elimination). ``joint_brute_force``
enumerates the full joint and exists as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    InvalidEvidence,
    StateSpaceTooLarge,
    UnknownVariable,
    ZeroProbabilityEvidence,
)
from .network import BayesianNetwork

BRUTE_FORCE_LIMIT = 2**24


@dataclass(frozen=True)
class Evidence:
    assignments: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "assignments", {k: int(v) for k, v in dict(self.assignments).items()})

    def validate(self, net: BayesianNetwork) -> None:
        for var, state in self.assignments.items():
            if var not in net.states:
                raise UnknownVariable(var)
            if not 0 <= state < net.cardinality(var):
                raise InvalidEvidence(f"state {state} out of range for {var!r}")

    def __contains__(self, var: str) -> bool:
        return var in self.assignments

    def __len__(self) -> int:
        return len(self.assignments)


@dataclass(frozen=True)
class PosteriorDistribution:
    variable: str
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    def argmax(self) -> int:
        # np.argmax returns the first maximum, i.e. the lowest state index.
        return int(np.argmax(self.probabilities))

    def to_json(self, labels: Sequence[str] | None = None) -> dict:
        probs = self.probabilities.tolist()
        if labels is None:
            return {"variable": self.variable, "probabilities": probs}
        return {"variable": self.variable, "probabilities": dict(zip(labels, probs))}


def _as_evidence(evidence) -> Evidence:
    if evidence is None:
        return Evidence()
    if isinstance(evidence, Evidence):
        return evidence
    return Evidence(evidence)


def _check_query(net: BayesianNetwork, ev: Evidence, target: str) -> None:
    if target not in net.states:
        raise UnknownVariable(target)
    ev.validate(net)
    if target in ev:
        raise InvalidEvidence(f"target {target!r} is also in the evidence")


def _ancestral_set(net: BayesianNetwork, seeds: Iterable[str]) -> set[str]:
    keep = set(seeds)
    stack = list(keep)
    while stack:
        node = stack.pop()
        for p in net.cpts[node].parents:
            if p not in keep:
                keep.add(p)
                stack.append(p)
    return keep


def _reduced_factors(net: BayesianNetwork, nodes: Iterable[str], ev: Mapping[str, int]):
    factors = []
    for node in nodes:
        cpt = net.cpts[node]
        scope = [*cpt.parents, node]
        arr = cpt.as_factor_array()
        index = tuple(ev[v] if v in ev else slice(None) for v in scope)
        arr = arr[index]
        scope = [v for v in scope if v not in ev]
        factors.append((tuple(scope), np.asarray(arr, dtype=float)))
    return factors


def min_degree_order(scopes: Sequence[Sequence[str]], eliminate: Sequence[str], declared: Sequence[str]) -> list[str]:
    """Greedy min-degree order on the interaction (moral) graph of ``scopes``.

    Ties go to the variable declared first. Elimination adds fill-in edges.
    """
    pos = {v: i for i, v in enumerate(declared)}
    adj: dict[str, set[str]] = {v: set() for v in eliminate}
    for scope in scopes:
        for v in scope:
            adj.setdefault(v, set()).update(u for u in scope if u != v)
    remaining = set(eliminate)
    order = []
    while remaining:
        var = min(remaining, key=lambda v: (len(adj[v]), pos[v]))
        nbrs = adj.pop(var)
        for u in nbrs:
            adj[u].discard(var)
            adj[u].update(w for w in nbrs if w != u)
        remaining.remove(var)
        order.append(var)
    return order


def _contract(factors, keep: Sequence[str]):
    """Multiply factors and sum out every variable not in ``keep``."""
    ids: dict[str, int] = {}
    operands = []
    for scope, arr in factors:
        for v in scope:
            ids.setdefault(v, len(ids))
        operands.extend([arr, [ids[v] for v in scope]])
    out = [ids[v] for v in keep if v in ids]
    result = np.einsum(*operands, out)
    return tuple(v for v in keep if v in ids), np.asarray(result, dtype=float)


def _sum_out(factors, order):
    for var in order:
        touching = [f for f in factors if var in f[0]]
        if not touching:
            continue
        rest = [f for f in factors if var not in f[0]]
        scope = []
        for s, _ in touching:
            scope.extend(v for v in s if v != var and v not in scope)
        rest.append(_contract(touching, scope))
        factors = rest
    return factors


def _split_joint(net: BayesianNetwork, ev: Evidence, target: str) -> tuple[np.ndarray, float]:
    """(unnormalised target vector, constant) with their product P(target, e).

    Factors not linked to the target through unobserved variables only
    scale the result, so they are reduced to the separate constant.
    """
    _check_query(net, ev, target)
    relevant = _ancestral_set(net, [target, *ev.assignments])
    nodes = [n for n in net.nodes if n in relevant]
    factors = _reduced_factors(net, nodes, ev.assignments)
    linked_vars = {target}
    grew = True
    while grew:
        grew = False
        for scope, _ in factors:
            if linked_vars.intersection(scope) and not linked_vars.issuperset(scope):
                linked_vars.update(scope)
                grew = True
    linked = [f for f in factors if linked_vars.intersection(f[0])]
    detached = [f for f in factors if not linked_vars.intersection(f[0])]
    hidden = [n for n in nodes if n != target and n not in ev]
    order = min_degree_order([s for s, _ in factors], hidden, net.nodes)

    result = np.ones(net.cardinality(target))
    for scope, arr in _sum_out(linked, order):
        if scope == (target,):
            result = result * arr
        else:  # pragma: no cover - every hidden variable was eliminated
            raise AssertionError(f"unexpected residual scope {scope}")
    const = 1.0
    for scope, arr in _sum_out(detached, order):
        const *= float(arr)
    return result, const


def joint_with_evidence(net: BayesianNetwork, evidence, target: str) -> np.ndarray:
    """Vector of P(target = t, evidence) for every state t, by variable elimination."""
    result, const = _split_joint(net, _as_evidence(evidence), target)
    return result * const


def _normalise(joint: np.ndarray, target: str) -> PosteriorDistribution:
    total = float(joint.sum())
    if not total > 0.0:
        raise ZeroProbabilityEvidence(f"evidence has probability zero (query {target!r})")
    return PosteriorDistribution(target, joint / total)


def eliminate(net: BayesianNetwork, evidence, target: str) -> PosteriorDistribution:
    """Exact P(target | evidence) by variable elimination."""
    result, const = _split_joint(net, _as_evidence(evidence), target)
    if not const > 0.0:
        raise ZeroProbabilityEvidence(f"evidence has probability zero (query {target!r})")
    return _normalise(result, target)


def evidence_probability(net: BayesianNetwork, evidence) -> float:
    """P(evidence); 1.0 for empty evidence."""
    ev = _as_evidence(evidence)
    if not ev.assignments:
        return 1.0
    items = sorted(ev.assignments.items(), key=lambda kv: net.nodes.index(kv[0]))
    target, _ = items[-1]
    rest = Evidence(dict(items[:-1]))
    joint = joint_with_evidence(net, rest, target)
    return float(joint[ev.assignments[target]])


def joint_brute_force(net: BayesianNetwork, evidence, target: str) -> PosteriorDistribution:
    """Enumerate the full joint as a product of CPTs, condition and marginalise."""
    ev = _as_evidence(evidence)
    _check_query(net, ev, target)
    nodes = list(net.nodes)
    cards = [net.cardinality(n) for n in nodes]
    size = int(np.prod(cards, dtype=np.float64))
    if size > BRUTE_FORCE_LIMIT:
        raise StateSpaceTooLarge(f"{size} joint configurations exceed {BRUTE_FORCE_LIMIT}")
    axis = {n: i for i, n in enumerate(nodes)}
    joint = np.ones(cards)
    for node in nodes:
        cpt = net.cpts[node]
        shape = [1] * len(nodes)
        arr = cpt.as_factor_array()
        # as_factor_array axes follow (parents..., child); move them into joint axis order.
        scope = [*cpt.parents, node]
        perm = sorted(range(len(scope)), key=lambda i: axis[scope[i]])
        arr = np.transpose(arr, perm)
        for v in scope:
            shape[axis[v]] = cards[axis[v]]
        joint = joint * arr.reshape(shape)
    index = tuple(ev.assignments.get(n, slice(None)) for n in nodes)
    conditioned = joint[index]
    free = [n for n in nodes if n not in ev]
    t_axis = free.index(target)
    other = tuple(i for i in range(len(free)) if i != t_axis)
    return _normalise(conditioned.sum(axis=other), target)


def predict(net: BayesianNetwork, evidence, target: str) -> tuple[int, PosteriorDistribution]:
    """Most probable target state (lowest index on ties) and its posterior."""
    post = eliminate(net, evidence, target)
    return post.argmax(), post


def posterior_batch(net: BayesianNetwork, rows: np.ndarray, columns: Sequence[str], target: str) -> np.ndarray:
    """Posterior over ``target`` for each row of an integer-coded matrix.

    Every other column of a row is used as evidence; -1 cells are left out.
    Fully observed rows use the target's Markov blanket directly (the same
    quantity variable elimination returns); other rows go through
    ``eliminate``, memoised on the evidence pattern.
    """
    rows = np.asarray(rows, dtype=np.int64)
    col = {c: j for j, c in enumerate(columns)}
    t_card = net.cardinality(target)
    out = np.empty((rows.shape[0], t_card))
    others = [c for c in columns if c != target and c in net.states]
    other_idx = [col[c] for c in others]
    complete = np.all(rows[:, other_idx] >= 0, axis=1) if other_idx else np.ones(rows.shape[0], bool)
    covered = set(others) | {target}
    if complete.any() and covered == set(net.nodes):
        out[complete] = _blanket_posterior(net, rows[complete], col, target)
    else:
        complete = np.zeros(rows.shape[0], bool)
    memo: dict[tuple, np.ndarray] = {}
    for i in np.flatnonzero(~complete):
        key = tuple(int(rows[i, j]) for j in other_idx)
        if key not in memo:
            ev = {c: s for c, s in zip(others, key) if s >= 0}
            memo[key] = eliminate(net, ev, target).probabilities
        out[i] = memo[key]
    return out


def _blanket_posterior(net: BayesianNetwork, rows: np.ndarray, col: Mapping[str, int], target: str) -> np.ndarray:
    t_card = net.cardinality(target)
    n = rows.shape[0]
    scores = np.ones((n, t_card))
    families = [target] + [c for c in net.nodes if target in net.cpts[c].parents]
    for node in families:
        cpt = net.cpts[node]
        for t in range(t_card):
            row_idx = np.zeros(n, dtype=np.int64)
            for p, pc in zip(cpt.parents, cpt.parent_cards):
                vals = np.full(n, t) if p == target else rows[:, col[p]]
                row_idx = row_idx * pc + vals
            child_vals = np.full(n, t) if node == target else rows[:, col[node]]
            scores[:, t] *= cpt.table[row_idx, child_vals]
    totals = scores.sum(axis=1, keepdims=True)
    if np.any(totals <= 0.0):
        raise ZeroProbabilityEvidence(f"a test row has probability zero (query {target!r})")
    return scores / totals


@dataclass(frozen=True)
class WhatIfReport:
    set_node: str
    set_state: int
    baseline: dict[str, np.ndarray]
    conditioned: dict[str, np.ndarray]

    @property
    def deltas(self) -> dict[str, np.ndarray]:
        return {n: self.conditioned[n] - self.baseline[n] for n in self.baseline}

    def to_json(self, states: Mapping[str, Sequence[str]] | None = None) -> dict:
        def labelled(node, vec):
            if states is None:
                return [float(x) for x in vec]
            return {lab: float(x) for lab, x in zip(states[node], vec)}

        set_state = self.set_state if states is None else states[self.set_node][self.set_state]
        return {
            "set": {"node": self.set_node, "state": set_state},
            "baseline": {n: labelled(n, v) for n, v in self.baseline.items()},
            "conditioned": {n: labelled(n, v) for n, v in self.conditioned.items()},
            "deltas": {n: labelled(n, v) for n, v in self.deltas.items()},
        }


def what_if(net: BayesianNetwork, set_node: str, set_state: int, report_nodes: Sequence[str] | None = None) -> WhatIfReport:
    """Marginals of ``report_nodes`` before and after fixing ``set_node``."""
    if set_node not in net.states:
        raise UnknownVariable(set_node)
    if report_nodes is None:
        report_nodes = [n for n in net.nodes if n != set_node]
    if set_node in report_nodes:
        raise InvalidEvidence("report nodes must exclude the fixed node")
    ev = Evidence({set_node: set_state})
    ev.validate(net)
    baseline = {n: eliminate(net, None, n).probabilities for n in report_nodes}
    conditioned = {n: eliminate(net, ev, n).probabilities for n in report_nodes}
    return WhatIfReport(set_node, int(set_state), baseline, conditioned)
