"""Conditional probability tables and the Bayesian network container."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .graph import Dag

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Cpt:
    """P(child | parents) as a (parent configurations x child states) table.

    Parent configurations are enumerated row-major over ``parents`` (the last
    parent varies fastest).
    """

    child: str
    parents: tuple[str, ...]
    parent_cards: tuple[int, ...]
    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        parents = tuple(self.parents)
        cards = tuple(int(c) for c in self.parent_cards)
        if len(parents) != len(cards):
            raise ValueError("one cardinality per parent")
        q = int(np.prod(cards, dtype=np.int64)) if cards else 1
        if table.ndim != 2 or table.shape[0] != q:
            raise ValueError(f"CPT for {self.child!r} needs {q} rows, got shape {table.shape}")
        if np.any(table < 0) or np.any(np.abs(table.sum(axis=1) - 1.0) > ROW_SUM_TOL):
            raise ValueError(f"CPT rows for {self.child!r} must be distributions")
        table.setflags(write=False)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "parent_cards", cards)
        object.__setattr__(self, "table", table)

    @property
    def cardinality(self) -> int:
        return self.table.shape[1]

    @property
    def n_rows(self) -> int:
        return self.table.shape[0]

    @property
    def free_parameters(self) -> int:
        return (self.cardinality - 1) * self.n_rows

    def row_index(self, parent_states) -> int:
        idx = 0
        for s, c in zip(parent_states, self.parent_cards):
            idx = idx * c + int(s)
        return idx

    def as_factor_array(self) -> np.ndarray:
        """The table reshaped to (*parent_cards, child_card)."""
        return self.table.reshape(*self.parent_cards, self.cardinality)

    def with_table(self, table) -> "Cpt":
        return Cpt(self.child, self.parents, self.parent_cards, table)


@dataclass(frozen=True)
class BayesianNetwork:
    dag: Dag
    cpts: Mapping[str, Cpt]
    states: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        cpts = {n: self.cpts[n] for n in self.dag.nodes}
        states = {n: tuple(self.states[n]) for n in self.dag.nodes}
        for node in self.dag.nodes:
            cpt = cpts[node]
            if list(cpt.parents) != self.dag.parents(node):
                raise ValueError(
                    f"CPT parents {cpt.parents} for {node!r} differ from DAG parents "
                    f"{self.dag.parents(node)}"
                )
            if cpt.cardinality != len(states[node]):
                raise ValueError(f"state count mismatch for {node!r}")
            for p, c in zip(cpt.parents, cpt.parent_cards):
                if c != len(states[p]):
                    raise ValueError(f"parent cardinality mismatch {p!r} -> {node!r}")
        object.__setattr__(self, "cpts", cpts)
        object.__setattr__(self, "states", states)

    @property
    def nodes(self) -> tuple[str, ...]:
        return self.dag.nodes

    def cardinality(self, node: str) -> int:
        return len(self.states[node])

    def parameter_count(self) -> int:
        return sum(cpt.free_parameters for cpt in self.cpts.values())

    def state_index(self, node: str, label: str) -> int:
        return self.states[node].index(label)

    def with_cpt(self, node: str, table) -> "BayesianNetwork":
        cpts = dict(self.cpts)
        cpts[node] = cpts[node].with_table(table)
        return BayesianNetwork(self.dag, cpts, self.states)

    def to_json(self) -> dict:
        nodes = []
        for name in self.dag.nodes:
            cpt = self.cpts[name]
            nodes.append(
                {
                    "name": name,
                    "states": list(self.states[name]),
                    "parents": list(cpt.parents),
                    "cpt_rows": cpt.table.tolist(),
                }
            )
        return {"nodes": nodes, "edges": [list(e) for e in self.dag.sorted_edges()]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, obj: dict) -> "BayesianNetwork":
        names = [n["name"] for n in obj["nodes"]]
        dag = Dag.from_edges(names, [tuple(e) for e in obj["edges"]])
        states = {n["name"]: tuple(n["states"]) for n in obj["nodes"]}
        cpts = {}
        for n in obj["nodes"]:
            parents = tuple(n["parents"])
            cpts[n["name"]] = Cpt(
                n["name"],
                parents,
                tuple(len(states[p]) for p in parents),
                np.asarray(n["cpt_rows"], dtype=float),
            )
        return cls(dag, cpts, states)

    @classmethod
    def loads(cls, text: str) -> "BayesianNetwork":
        return cls.from_json(json.loads(text))


def parameter_count(dag: Dag, cardinalities: Mapping[str, int]) -> int:
    """Free parameters: sum over nodes of (r - 1) times the parent configurations."""
    total = 0
    for node in dag.nodes:
        q = 1
        for p in dag.parents(node):
            q *= cardinalities[p]
        total += (cardinalities[node] - 1) * q
    return total
