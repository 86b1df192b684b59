"""Immutable DAG value type with cycle prevention, ordering and DOT export."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import (
    DuplicateEdge,
    SelfLoop,
    StrengthOutOfRange,
    UnknownNode,
    WouldCreateCycle,
)


@dataclass(frozen=True)
class Dag:
    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes):
            raise ValueError("node names must be unique")
        object.__setattr__(self, "nodes", nodes)
        edges = frozenset(self.edges)
        object.__setattr__(self, "edges", frozenset())
        for parent, child in sorted(edges, key=self._edge_key):
            self._check_edge(parent, child, frozenset(self.edges))
            object.__setattr__(self, "edges", self.edges | {(parent, child)})

    @classmethod
    def from_edges(cls, nodes: Iterable[str], edges: Iterable[tuple[str, str]] = ()) -> "Dag":
        return cls(tuple(nodes), frozenset(edges))

    def _edge_key(self, edge):
        pos = {n: i for i, n in enumerate(self.nodes)}
        return (pos.get(edge[0], -1), pos.get(edge[1], -1))

    def _require(self, node: str) -> None:
        if node not in self.nodes:
            raise UnknownNode(node)

    def _check_edge(self, parent: str, child: str, edges) -> None:
        self._require(parent)
        self._require(child)
        if parent == child:
            raise SelfLoop(parent)
        if (parent, child) in edges:
            raise DuplicateEdge(f"{parent} -> {child}")
        if _reaches(edges, child, parent):
            raise WouldCreateCycle(f"{parent} -> {child}")

    def add_edge(self, parent: str, child: str) -> "Dag":
        self._check_edge(parent, child, self.edges)
        new = object.__new__(Dag)
        object.__setattr__(new, "nodes", self.nodes)
        object.__setattr__(new, "edges", self.edges | {(parent, child)})
        return new

    def remove_edge(self, parent: str, child: str) -> "Dag":
        if (parent, child) not in self.edges:
            raise KeyError(f"no edge {parent} -> {child}")
        new = object.__new__(Dag)
        object.__setattr__(new, "nodes", self.nodes)
        object.__setattr__(new, "edges", self.edges - {(parent, child)})
        return new

    def parents(self, node: str) -> list[str]:
        """Parents of ``node`` in node declaration order."""
        self._require(node)
        return [p for p in self.nodes if (p, node) in self.edges]

    def children(self, node: str) -> list[str]:
        self._require(node)
        return [c for c in self.nodes if (node, c) in self.edges]

    def in_degree(self, node: str) -> int:
        self._require(node)
        return sum(1 for _, c in self.edges if c == node)

    def out_degree(self, node: str) -> int:
        self._require(node)
        return sum(1 for p, _ in self.edges if p == node)

    def sorted_edges(self) -> list[tuple[str, str]]:
        return sorted(self.edges, key=self._edge_key)

    def topological_order(self) -> list[str]:
        return topological_order(self)

    def to_json(self) -> dict:
        return {"nodes": list(self.nodes), "edges": [list(e) for e in self.sorted_edges()]}


def _reaches(edges, start: str, goal: str) -> bool:
    children: dict[str, list[str]] = {}
    for p, c in edges:
        children.setdefault(p, []).append(c)
    stack, seen = [start], {start}
    while stack:
        node = stack.pop()
        if node == goal:
            return True
        for nxt in children.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def add_edge(dag: Dag, parent: str, child: str) -> Dag:
    return dag.add_edge(parent, child)


def in_degree(dag: Dag, node: str) -> int:
    return dag.in_degree(node)


def topological_order(dag: Dag) -> list[str]:
    """Kahn's algorithm; among ready nodes the earliest declared goes first."""
    pos = {n: i for i, n in enumerate(dag.nodes)}
    indeg = {n: 0 for n in dag.nodes}
    children: dict[str, list[str]] = {n: [] for n in dag.nodes}
    for p, c in dag.edges:
        indeg[c] += 1
        children[p].append(c)
    heap = [pos[n] for n in dag.nodes if indeg[n] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        node = dag.nodes[heapq.heappop(heap)]
        order.append(node)
        for c in children[node]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, pos[c])
    return order


def strength_color(strength: float) -> str:
    """White (0.0) to pure red (1.0) as an RGB hex string."""
    if not 0.0 <= strength <= 1.0:
        raise StrengthOutOfRange(f"strength {strength} outside [0, 1]")
    level = round(255 * (1.0 - strength))
    return f"#ff{level:02x}{level:02x}"


def _quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(
    dag: Dag,
    annotations: Mapping[str, float] | None = None,
    name: str = "bn",
) -> str:
    """Render the DAG as Graphviz DOT text.

    Nodes named in ``annotations`` get a filled style shaded by strength.
    Node and edge order follow declaration order so output is stable.
    """
    annotations = dict(annotations or {})
    for node, s in annotations.items():
        dag._require(node)
        if not 0.0 <= s <= 1.0:
            raise StrengthOutOfRange(f"{node}: strength {s} outside [0, 1]")
    lines = [f"digraph {_quote(name)} {{"]
    for node in dag.nodes:
        if node in annotations:
            s = annotations[node]
            lines.append(
                f'  {_quote(node)} [style=filled, fillcolor="{strength_color(s)}", '
                f'tooltip="strength={s:.4f}"];'
            )
        else:
            lines.append(f"  {_quote(node)};")
    for p, c in dag.sorted_edges():
        lines.append(f"  {_quote(p)} -> {_quote(c)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
