"""Greedy score-based structure search over single-edge moves."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ..discretize import DiscreteDataset
from ..graph import Dag
from .score import BDEU, ScoreCache, ScoreSpec

# Deltas closer than this are treated as equal and resolved by move key.
TIE_TOL = 1e-9


@dataclass
class SearchResult:
    dag: Dag
    score: float
    trace: list[float] = field(default_factory=list)
    moves: list[tuple[str, str, str]] = field(default_factory=list)


def _descendants(children: list[set[int]]) -> list[set[int]]:
    p = len(children)
    out = []
    for start in range(p):
        seen: set[int] = set()
        stack = list(children[start])
        while stack:
            x = stack.pop()
            if x not in seen:
                seen.add(x)
                stack.extend(children[x])
        out.append(seen)
    return out


def _climb(
    cache: ScoreCache,
    names: tuple[str, ...],
    parents: list[set[int]],
    max_parents: int,
    forbidden: set[tuple[int, int]],
) -> SearchResult:
    p = len(names)
    fam = [cache(v, parents[v]) for v in range(p)]
    trace = [sum(fam)]
    moves = []
    while True:
        children = [set() for _ in range(p)]
        for v in range(p):
            for u in parents[v]:
                children[u].add(v)
        desc = _descendants(children)

        best_delta = 0.0
        best_key = None
        best_move = None
        for u in range(p):
            for v in range(p):
                if u == v:
                    continue
                if u in parents[v]:
                    # delete u -> v
                    reduced = parents[v] - {u}
                    d_del = cache(v, reduced) - fam[v]
                    cand = [(d_del, ("delete", names[u], names[v]), ("delete", u, v))]
                    # reverse u -> v into v -> u
                    if (v, u) not in forbidden and len(parents[u]) < max_parents:
                        other_path = any(w == v or v in desc[w] for w in children[u] if w != v)
                        if not other_path:
                            d_rev = d_del + cache(u, parents[u] | {v}) - fam[u]
                            cand.append((d_rev, ("reverse", names[u], names[v]), ("reverse", u, v)))
                elif v in parents[u]:
                    continue
                else:
                    if (u, v) in forbidden or len(parents[v]) >= max_parents or u in desc[v]:
                        continue
                    d_add = cache(v, parents[v] | {u}) - fam[v]
                    cand = [(d_add, ("add", names[u], names[v]), ("add", u, v))]
                for delta, key, move in cand:
                    if best_key is None or delta > best_delta + TIE_TOL or (
                        abs(delta - best_delta) <= TIE_TOL and key < best_key
                    ):
                        best_delta, best_key, best_move = delta, key, move
        if best_move is None or best_delta <= TIE_TOL:
            break
        op, u, v = best_move
        if op == "add":
            parents[v] = parents[v] | {u}
        elif op == "delete":
            parents[v] = parents[v] - {u}
        else:
            parents[v] = parents[v] - {u}
            parents[u] = parents[u] | {v}
        for node in {u, v}:
            fam[node] = cache(node, parents[node])
        trace.append(sum(fam))
        moves.append(best_key)
    edges = {(names[u], names[v]) for v in range(p) for u in parents[v]}
    return SearchResult(Dag.from_edges(names, edges), sum(fam), trace, moves)


def random_dag_parents(
    p: int,
    rng: np.random.Generator,
    max_parents: int,
    forbidden: set[tuple[int, int]],
    edge_prob: float | None = None,
) -> list[set[int]]:
    """Random DAG as parent sets: edges follow a random permutation."""
    if edge_prob is None:
        edge_prob = min(1.0, 1.5 / max(p - 1, 1))
    order = rng.permutation(p)
    parents: list[set[int]] = [set() for _ in range(p)]
    for i in range(p):
        for j in range(i + 1, p):
            u, v = int(order[i]), int(order[j])
            if rng.random() < edge_prob and len(parents[v]) < max_parents and (u, v) not in forbidden:
                parents[v].add(u)
    return parents


def hill_climb_search(
    data: DiscreteDataset,
    spec: ScoreSpec = BDEU,
    max_parents: int = 4,
    restarts: int = 10,
    seed: int = 0,
    forbidden: Iterable[tuple[str, str]] = (),
    cache: ScoreCache | None = None,
) -> SearchResult:
    """Hill climbing from the empty graph plus ``restarts - 1`` random starts.

    The best-scoring run wins; ties keep the earliest run.
    """
    if len(data.names) < 2:
        raise ValueError("structure learning needs at least 2 variables")
    if cache is None:
        cache = ScoreCache(data, spec)
    names = data.names
    pos = {n: i for i, n in enumerate(names)}
    banned = {(pos[a], pos[b]) for a, b in forbidden}
    p = len(names)
    best = _climb(cache, names, [set() for _ in range(p)], max_parents, banned)
    rng = np.random.default_rng(seed)
    for _ in range(max(restarts, 1) - 1):
        start = random_dag_parents(p, rng, max_parents, banned)
        run = _climb(cache, names, start, max_parents, banned)
        if run.score > best.score + TIE_TOL:
            best = run
    return best


def hill_climb(
    data: DiscreteDataset,
    spec: ScoreSpec = BDEU,
    max_parents: int = 4,
    restarts: int = 10,
    seed: int = 0,
    forbidden: Iterable[tuple[str, str]] = (),
) -> Dag:
    return hill_climb_search(data, spec, max_parents, restarts, seed, forbidden).dag
