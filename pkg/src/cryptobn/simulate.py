"""Random networks, forward sampling and synthetic market tables.

Used by the test-suite, the acceptance checks, the benchmark and the demo
data generator.
"""

from __future__ import annotations

from datetime import date
from typing import Mapping, Sequence

import numpy as np

from .data_ingest import TimeSeriesTable, date_range
from .discretize import DiscreteDataset, label_states
from .graph import Dag
from .network import BayesianNetwork, Cpt


def random_cpt_table(rng: np.random.Generator, rows: int, card: int, concentration: float = 1.0) -> np.ndarray:
    return rng.dirichlet(np.full(card, concentration), size=rows)


def network_from_tables(
    dag: Dag,
    tables: Mapping[str, Sequence[Sequence[float]]],
    cards: Mapping[str, int] | None = None,
) -> BayesianNetwork:
    """Build a network from literal CPT rows (parents in declaration order)."""
    tables = {n: np.asarray(t, dtype=float) for n, t in tables.items()}
    if cards is None:
        cards = {n: tables[n].shape[1] for n in dag.nodes}
    cpts = {}
    for n in dag.nodes:
        parents = dag.parents(n)
        cpts[n] = Cpt(n, tuple(parents), tuple(cards[p] for p in parents), tables[n])
    states = {n: tuple(label_states(cards[n])) if cards[n] >= 2 else ("Only",) for n in dag.nodes}
    return BayesianNetwork(dag, cpts, states)


def random_network(
    rng: np.random.Generator,
    n_nodes: int,
    cards: int | Sequence[int] = 2,
    max_parents: int = 3,
    edge_prob: float = 0.4,
    concentration: float = 1.0,
    names: Sequence[str] | None = None,
) -> BayesianNetwork:
    if names is None:
        names = [f"X{i}" for i in range(n_nodes)]
    if isinstance(cards, int):
        cards = [cards] * n_nodes
    card = dict(zip(names, cards))
    order = list(rng.permutation(n_nodes))
    edges = set()
    for j in range(n_nodes):
        child = names[order[j]]
        earlier = [names[order[i]] for i in range(j)]
        chosen = [p for p in earlier if rng.random() < edge_prob][:max_parents]
        edges.update((p, child) for p in chosen)
    dag = Dag.from_edges(names, edges)
    tables = {}
    for n in names:
        q = int(np.prod([card[p] for p in dag.parents(n)], dtype=np.int64))
        tables[n] = random_cpt_table(rng, q, card[n], concentration)
    return network_from_tables(dag, tables, card)


def sample(net: BayesianNetwork, n: int, rng: np.random.Generator) -> DiscreteDataset:
    """Forward (ancestral) sampling of ``n`` complete rows."""
    nodes = list(net.nodes)
    col = {v: j for j, v in enumerate(nodes)}
    data = np.zeros((n, len(nodes)), dtype=np.int64)
    for node in net.dag.topological_order():
        cpt = net.cpts[node]
        row = np.zeros(n, dtype=np.int64)
        for p, pc in zip(cpt.parents, cpt.parent_cards):
            row = row * pc + data[:, col[p]]
        probs = cpt.table[row]
        cum = np.cumsum(probs, axis=1)
        u = rng.random(n)[:, None]
        data[:, col[node]] = np.minimum((u >= cum).sum(axis=1), cpt.cardinality - 1)
    return DiscreteDataset(tuple(nodes), tuple(net.cardinality(v) for v in nodes), tuple(net.states[v] for v in nodes), data)


def mask_mcar(data: DiscreteDataset, fraction: float, rng: np.random.Generator) -> DiscreteDataset:
    """Hide each cell independently with probability ``fraction``."""
    matrix = data.data.copy()
    matrix[rng.random(matrix.shape) < fraction] = -1
    return DiscreteDataset(data.names, data.cardinalities, data.state_labels, matrix)


MARKET_DRIVERS = ("Gold", "MSCI", "SP500", "WTI", "USDX")


def synthetic_market(
    n_rows: int,
    coins: Sequence[str] = ("BinanceCoin", "Ethereum", "Litecoin", "Ripple", "Tether"),
    drivers: Sequence[str] = MARKET_DRIVERS,
    seed: int = 0,
    start: date = date(2018, 1, 1),
    with_tweets: bool = False,
) -> TimeSeriesTable:
    """Daily price levels for market drivers and coins with planted links.

    Each coin's daily change loads on two drivers plus noise, so changes are
    predictable from same-day driver changes. Values are price levels
    (positive); difference or log-return them before discretising.
    """
    rng = np.random.default_rng(seed)
    dates = date_range(start, n_rows)
    driver_moves = {d: rng.normal(0.0, 1.0, n_rows) for d in drivers}
    columns: dict[str, np.ndarray] = {}
    for i, d in enumerate(drivers):
        columns[d] = 100.0 + 5.0 * i + np.cumsum(driver_moves[d]) * 0.5 + 0.02 * np.arange(n_rows)
    for j, coin in enumerate(coins):
        a = drivers[j % len(drivers)]
        b = drivers[(j + 2) % len(drivers)]
        move = 1.2 * driver_moves[a] - 0.8 * driver_moves[b] + rng.normal(0.0, 0.6, n_rows)
        columns[coin] = 500.0 + 50.0 * j + np.cumsum(move)
        if with_tweets:
            base = 200.0 + 40.0 * np.maximum(move, 0.0) + rng.gamma(2.0, 10.0, n_rows)
            columns[f"{coin}_tweets"] = np.round(base)
    # Keep levels strictly positive so log returns are defined.
    for name, values in columns.items():
        low = values.min()
        if low <= 1.0:
            columns[name] = values - low + 1.0
    return TimeSeriesTable(tuple(dates), columns)
