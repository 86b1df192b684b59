"""One-way parameter sensitivity of a target posterior.

Varying a single CPT entry theta while the rest of its row is rescaled
proportionally makes P(target, e) and P(e) affine in theta. The posterior
is therefore (a*theta + b) / (c*theta + d), and two exact inference runs
pin down all four coefficients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateRow, UnknownVariable, ZeroProbabilityEvidence
from .graph import export_dot
from .infer import Evidence, _as_evidence, joint_with_evidence
from .network import BayesianNetwork

# Derivatives below this magnitude count as zero when ranking nodes.
STRENGTH_FLOOR = 1e-12


@dataclass(frozen=True)
class ParameterSensitivity:
    node: str
    row: int
    state: int
    target_state: int
    theta: float
    derivative: float
    a: float
    b: float
    c: float
    d: float

    def posterior(self, theta: float) -> float:
        return (self.a * theta + self.b) / (self.c * theta + self.d)

    def to_json(self) -> dict:
        return {
            "node": self.node,
            "row": self.row,
            "state": self.state,
            "target_state": self.target_state,
            "theta": self.theta,
            "derivative": self.derivative,
            "coefficients": [self.a, self.b, self.c, self.d],
        }


@dataclass
class SensitivityReport:
    target: str
    target_states: tuple[int, ...]
    evidence: Evidence
    per_parameter: list[ParameterSensitivity] = field(default_factory=list)
    per_node_strength: dict[str, float] = field(default_factory=dict)

    def to_json(self, states: Mapping[str, Sequence[str]] | None = None) -> dict:
        ev = dict(self.evidence.assignments)
        if states is not None:
            ev = {k: states[k][v] for k, v in ev.items()}
        return {
            "target": self.target,
            "target_states": list(self.target_states),
            "evidence": ev,
            "per_node_strength": self.per_node_strength,
            "per_parameter": [p.to_json() for p in self.per_parameter],
        }

    def dumps(self, states=None) -> str:
        return json.dumps(self.to_json(states), indent=2) + "\n"


def covaried_row(row: np.ndarray, state: int, theta: float) -> np.ndarray:
    """Set ``row[state] = theta`` and rescale the others to keep the sum at 1.

    When the original entry is already 1 the remainder is spread evenly.
    """
    row = np.asarray(row, dtype=float)
    out = row.copy()
    theta0 = row[state]
    others = np.arange(row.size) != state
    if theta0 < 1.0:
        out[others] = row[others] * (1.0 - theta) / (1.0 - theta0)
    else:
        out[others] = (1.0 - theta) / (row.size - 1)
    out[state] = theta
    return out


def _with_theta(net: BayesianNetwork, node: str, row: int, state: int, theta: float) -> BayesianNetwork:
    table = np.array(net.cpts[node].table)
    table[row] = covaried_row(table[row], state, theta)
    return net.with_cpt(node, table)


def _second_point(theta0: float) -> float:
    return theta0 + 0.5 if theta0 <= 0.5 else theta0 - 0.5


def _check_parameter(net: BayesianNetwork, parameter) -> tuple[str, int, int]:
    node, row, state = parameter
    if node not in net.cpts:
        raise UnknownVariable(node)
    cpt = net.cpts[node]
    if cpt.cardinality < 2:
        raise DegenerateRow(f"{node!r} has a single state; its parameter is fixed at 1")
    if not 0 <= row < cpt.n_rows or not 0 <= state < cpt.cardinality:
        raise IndexError(f"parameter {parameter} outside the CPT of {node!r}")
    return node, int(row), int(state)


def _coefficients_from(theta0, theta1, joint0, joint1, target_state):
    n0, n1 = float(joint0[target_state]), float(joint1[target_state])
    d0, d1 = float(joint0.sum()), float(joint1.sum())
    a = (n1 - n0) / (theta1 - theta0)
    c = (d1 - d0) / (theta1 - theta0)
    b = n0 - a * theta0
    d = d0 - c * theta0
    return a, b, c, d


def posterior_coefficients(net: BayesianNetwork, parameter, evidence, target: str, target_state: int):
    """(a, b, c, d) with P(target_state | e) = (a*theta + b) / (c*theta + d).

    ``c*theta0 + d`` equals P(e) at the current parameter value.
    """
    node, row, state = _check_parameter(net, parameter)
    ev = _as_evidence(evidence)
    theta0 = float(net.cpts[node].table[row, state])
    theta1 = _second_point(theta0)
    joint0 = joint_with_evidence(net, ev, target)
    if not joint0.sum() > 0:
        raise ZeroProbabilityEvidence("evidence has probability zero")
    joint1 = joint_with_evidence(_with_theta(net, node, row, state, theta1), ev, target)
    return _coefficients_from(theta0, theta1, joint0, joint1, target_state)


def _derivative(a, b, c, d, theta0):
    return (a * d - b * c) / (c * theta0 + d) ** 2


def sensitivity_value(net: BayesianNetwork, parameter, evidence, target: str, target_state: int) -> float:
    """d P(target_state | e) / d theta at the current theta."""
    node, row, state = _check_parameter(net, parameter)
    theta0 = float(net.cpts[node].table[row, state])
    a, b, c, d = posterior_coefficients(net, parameter, evidence, target, target_state)
    return _derivative(a, b, c, d, theta0)


def sensitivity_report(
    net: BayesianNetwork,
    target: str,
    evidence=None,
    target_states: Sequence[int] | None = None,
    nodes: Sequence[str] | None = None,
) -> SensitivityReport:
    """Coefficients and derivatives for every CPT parameter of ``nodes``.

    Node strength is the largest absolute derivative over the node's
    parameters and the requested target states, scaled so the strongest
    non-target node is 1.0. The target's own CPT is listed per parameter but
    left out of the strengths.
    """
    if target not in net.states:
        raise UnknownVariable(target)
    ev = _as_evidence(evidence)
    if target_states is None:
        target_states = range(net.cardinality(target))
    target_states = tuple(int(s) for s in target_states)
    if nodes is None:
        nodes = list(net.nodes)
    joint0 = joint_with_evidence(net, ev, target)
    if not joint0.sum() > 0:
        raise ZeroProbabilityEvidence("evidence has probability zero")

    entries = []
    raw: dict[str, float] = {}
    for node in nodes:
        cpt = net.cpts[node]
        if cpt.cardinality < 2:
            continue
        best = 0.0
        for row in range(cpt.n_rows):
            for state in range(cpt.cardinality):
                theta0 = float(cpt.table[row, state])
                theta1 = _second_point(theta0)
                joint1 = joint_with_evidence(_with_theta(net, node, row, state, theta1), ev, target)
                for ts in target_states:
                    a, b, c, d = _coefficients_from(theta0, theta1, joint0, joint1, ts)
                    deriv = _derivative(a, b, c, d, theta0)
                    entries.append(ParameterSensitivity(node, row, state, ts, theta0, deriv, a, b, c, d))
                    best = max(best, abs(deriv))
        if node != target:
            raw[node] = best if best >= STRENGTH_FLOOR else 0.0
    return SensitivityReport(target, target_states, ev, entries, normalise_strengths(raw))


def normalise_strengths(raw: Mapping[str, float]) -> dict[str, float]:
    top = max(raw.values(), default=0.0)
    if top <= 0.0:
        return {n: 0.0 for n in raw}
    return {n: min(v / top, 1.0) for n, v in raw.items()}


def node_influence(net: BayesianNetwork, target: str, evidence=None) -> tuple[dict[str, float], str]:
    """Per-node influence strengths on ``target`` and a red-shaded DOT graph."""
    report = sensitivity_report(net, target, evidence)
    dot = export_dot(net.dag, report.per_node_strength, name=f"sensitivity_{target}")
    return report.per_node_strength, dot
