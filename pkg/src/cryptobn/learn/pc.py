"""Constraint-based structure learning: chi-square CI tests and the PC algorithm."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.stats import chi2

from ..discretize import DiscreteDataset
from ..errors import EmptyStratumData, WouldCreateCycle
from ..graph import Dag


@dataclass(frozen=True)
class CITestResult:
    statistic: float
    p_value: float
    dof: int
    independent: bool
    low_power_strata: int = 0
    n_strata: int = 0


def chi_square_ci_test(
    data: DiscreteDataset,
    x: str,
    y: str,
    conditioning_set: Sequence[str] = (),
    alpha: float = 0.05,
) -> CITestResult:
    """Pearson chi-square test of x independent of y given the conditioning set.

    Statistics and degrees of freedom are summed over the strata of the
    conditioning variables. Per stratum, rows/columns with zero margins are
    dropped from the degrees of freedom. A stratum is low-power when more
    than 20% of its cells expect fewer than 5 counts.
    """
    if x == y:
        raise ValueError("x and y must differ")
    z = list(conditioning_set)
    if x in z or y in z:
        raise ValueError("conditioning set must exclude x and y")
    cols = [data.index(v) for v in (x, y, *z)]
    sub = data.data[:, cols]
    sub = sub[np.all(sub >= 0, axis=1)]
    if sub.shape[0] == 0:
        raise EmptyStratumData(f"no complete rows for {x} _|_ {y} | {z}")
    rx, ry = data.cardinalities[cols[0]], data.cardinalities[cols[1]]
    stratum = np.zeros(sub.shape[0], dtype=np.int64)
    n_strata = 1
    for j, v in enumerate(z):
        card = data.cardinalities[cols[2 + j]]
        stratum = stratum * card + sub[:, 2 + j]
        n_strata *= card
    flat = np.bincount((stratum * rx + sub[:, 0]) * ry + sub[:, 1], minlength=n_strata * rx * ry)
    tables = flat.reshape(n_strata, rx, ry).astype(float)

    stat = 0.0
    dof = 0
    low_power = 0
    used = 0
    for table in tables:
        n = table.sum()
        if n == 0:
            continue
        used += 1
        row = table.sum(axis=1)
        col = table.sum(axis=0)
        expected = np.outer(row, col) / n
        if np.mean(expected < 5) > 0.2:
            low_power += 1
        nz = expected > 0
        stat += float(np.sum((table[nz] - expected[nz]) ** 2 / expected[nz]))
        dof += max(int(np.count_nonzero(row)) - 1, 0) * max(int(np.count_nonzero(col)) - 1, 0)
    p_value = float(chi2.sf(stat, dof)) if dof > 0 else 1.0
    return CITestResult(stat, p_value, dof, p_value > alpha, low_power, used)


@dataclass
class PCResult:
    dag: Dag
    skeleton: set[frozenset[str]]
    sepsets: dict[frozenset[str], tuple[str, ...]]
    oriented: set[tuple[str, str]]
    fallback_oriented: list[tuple[str, str]] = field(default_factory=list)
    dropped: list[tuple[str, str]] = field(default_factory=list)


def pc_search(data: DiscreteDataset, alpha: float = 0.05, max_cond_size: int | None = None) -> PCResult:
    """PC (stable variant): skeleton, v-structures, Meek rules 1-3, then fallback.

    Adjacency sets are frozen per conditioning-set size, so the skeleton does
    not depend on the order of tests. Undirected edges left after the Meek
    rules are pointed from the earlier-declared to the later-declared node.
    """
    names = list(data.names)
    pos = {n: i for i, n in enumerate(names)}
    adj = {n: set(names) - {n} for n in names}
    sepsets: dict[frozenset[str], tuple[str, ...]] = {}

    level = 0
    while True:
        if max_cond_size is not None and level > max_cond_size:
            break
        frozen = {n: sorted(adj[n], key=pos.get) for n in names}
        if not any(len(frozen[n]) - 1 >= level for n in names):
            break
        for x in names:
            for y in frozen[x]:
                if y not in adj[x]:
                    continue
                candidates = [v for v in frozen[x] if v != y]
                if len(candidates) < level:
                    continue
                for cond in combinations(candidates, level):
                    res = chi_square_ci_test(data, x, y, cond, alpha)
                    if res.independent:
                        adj[x].discard(y)
                        adj[y].discard(x)
                        sepsets[frozenset((x, y))] = tuple(cond)
                        break
        level += 1

    skeleton = {frozenset((a, b)) for a in names for b in adj[a]}
    # arrows[(a, b)] means a mark a -> b.
    arrows: set[tuple[str, str]] = set()

    def undirected(a, b):
        return b in adj[a] and (a, b) not in arrows and (b, a) not in arrows

    for z in names:
        nbrs = sorted(adj[z], key=pos.get)
        for x, y in combinations(nbrs, 2):
            if y in adj[x]:
                continue
            sep = sepsets.get(frozenset((x, y)), ())
            if z in sep:
                continue
            for a in (x, y):
                if (z, a) not in arrows:
                    arrows.add((a, z))

    changed = True
    while changed:
        changed = False
        for a in names:
            for b in sorted(adj[a], key=pos.get):
                if not undirected(a, b):
                    continue
                # R1: c -> a - b, c not adjacent to b  =>  a -> b
                if any((c, a) in arrows and (a, c) not in arrows and b not in adj[c] and c != b for c in adj[a]):
                    arrows.add((a, b))
                    changed = True
                    continue
                # R2: a -> c -> b  =>  a -> b
                if any(
                    (a, c) in arrows and (c, a) not in arrows and (c, b) in arrows and (b, c) not in arrows
                    for c in adj[a] & adj[b]
                ):
                    arrows.add((a, b))
                    changed = True
                    continue
                # R3: a - c -> b, a - d -> b, c and d not adjacent  =>  a -> b
                kites = [
                    c for c in adj[a] & adj[b]
                    if undirected(a, c) and (c, b) in arrows and (b, c) not in arrows
                ]
                if any(d not in adj[c] for c, d in combinations(kites, 2)):
                    arrows.add((a, b))
                    changed = True

    directed = sorted(
        ((a, b) for a, b in arrows if (b, a) not in arrows),
        key=lambda e: (pos[e[0]], pos[e[1]]),
    )
    dag = Dag.from_edges(names)
    dropped = []
    for a, b in directed:
        try:
            dag = dag.add_edge(a, b)
        except WouldCreateCycle:
            dropped.append((a, b))
    fallback = []
    for edge in sorted(skeleton, key=lambda e: sorted(pos[v] for v in e)):
        a, b = sorted(edge, key=pos.get)
        if (a, b) in dag.edges or (b, a) in dag.edges:
            continue
        # Undirected, conflicting (bidirected) or dropped edges all land here.
        for u, v in ((a, b), (b, a)):
            try:
                dag = dag.add_edge(u, v)
                fallback.append((u, v))
                break
            except WouldCreateCycle:
                continue
    return PCResult(dag, skeleton, sepsets, set(directed), fallback, dropped)


def pc_learn(data: DiscreteDataset, alpha: float = 0.05, max_cond_size: int | None = None) -> Dag:
    return pc_search(data, alpha, max_cond_size).dag
