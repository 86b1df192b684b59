"""Unsupervised binning of continuous columns into labelled states."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DegenerateRange, DuplicateCutPoints, InvalidK, TooFewDistinctValues

METHODS = ("EqualInterval", "EqualQuantile", "KMeans")

_NAMED_LABELS = {
    2: ("Down", "Up"),
    3: ("Down", "Steady", "Up"),
    4: ("Strong Down", "Down", "Up", "Strong Up"),
}


def label_states(k: int) -> list[str]:
    if k < 2:
        raise InvalidK(f"need at least 2 bins, got {k}")
    if k in _NAMED_LABELS:
        return list(_NAMED_LABELS[k])
    return [f"Bin{i}" for i in range(1, k + 1)]


@dataclass(frozen=True)
class Discretizer:
    method: str
    k: int
    cut_points: tuple[float, ...]
    state_labels: tuple[str, ...]

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        cuts = tuple(float(c) for c in self.cut_points)
        if len(cuts) != self.k - 1:
            raise ValueError(f"{self.k} bins need {self.k - 1} cut points, got {len(cuts)}")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise DuplicateCutPoints(f"cut points not strictly ascending: {cuts}")
        if len(self.state_labels) != self.k:
            raise ValueError("one label per bin required")
        object.__setattr__(self, "cut_points", cuts)
        object.__setattr__(self, "state_labels", tuple(self.state_labels))

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "k": self.k,
            "cut_points": list(self.cut_points),
            "state_labels": list(self.state_labels),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Discretizer":
        return cls(obj["method"], int(obj["k"]), tuple(obj["cut_points"]), tuple(obj["state_labels"]))


def _clean(values, k: int) -> np.ndarray:
    if k < 2:
        raise InvalidK(f"need at least 2 bins, got {k}")
    arr = np.asarray(values, dtype=float)
    return arr[~np.isnan(arr)]


def _check_distinct(arr: np.ndarray, k: int) -> np.ndarray:
    distinct = np.unique(arr)
    if distinct.size < k:
        raise TooFewDistinctValues(f"{distinct.size} distinct values for {k} bins")
    return distinct


def fit_equal_interval(values, k: int) -> Discretizer:
    arr = _clean(values, k)
    if arr.size and arr.min() == arr.max():
        raise DegenerateRange(f"all values equal {arr.min()}")
    _check_distinct(arr, k)
    lo, hi = float(arr.min()), float(arr.max())
    step = (hi - lo) / k
    cuts = tuple(lo + i * step for i in range(1, k))
    return Discretizer("EqualInterval", k, cuts, tuple(label_states(k)))


def fit_equal_quantile(values, k: int) -> Discretizer:
    """Cut at the i/k sample quantiles (linear interpolation, R type 7)."""
    arr = _clean(values, k)
    _check_distinct(arr, k)
    cuts = np.quantile(arr, [i / k for i in range(1, k)], method="linear")
    if np.any(np.diff(cuts) <= 0):
        raise DuplicateCutPoints(f"tied quantiles collapse bins: {cuts.tolist()}")
    return Discretizer("EqualQuantile", k, tuple(cuts.tolist()), tuple(label_states(k)))


def kmeans_clusters(values, k: int) -> list[np.ndarray]:
    """Globally optimal 1-D k-means partition of ``values`` (sorted clusters)."""
    arr = _clean(values, k)
    distinct, counts = np.unique(arr, return_counts=True)
    if distinct.size < k:
        raise TooFewDistinctValues(f"{distinct.size} distinct values for {k} bins")
    # Centring keeps the prefix sums of squares well conditioned.
    centre = float(distinct[distinct.size // 2])
    starts = kernels.kmeans_dp(distinct - centre, counts.astype(float), k)
    bounds = [*starts.tolist(), distinct.size]
    return [
        np.repeat(distinct[bounds[c]:bounds[c + 1]], counts[bounds[c]:bounds[c + 1]])
        for c in range(k)
    ]


def fit_kmeans(values, k: int) -> Discretizer:
    """Exact 1-D k-means by dynamic programming.

    Cut points are midpoints between the largest value of one cluster and the
    smallest of the next. No random initialisation is involved.
    """
    clusters = kmeans_clusters(values, k)
    cuts = tuple(
        (float(clusters[c][-1]) + float(clusters[c + 1][0])) / 2.0 for c in range(k - 1)
    )
    return Discretizer("KMeans", k, cuts, tuple(label_states(k)))


_FITTERS = {
    "EqualInterval": fit_equal_interval,
    "EqualQuantile": fit_equal_quantile,
    "KMeans": fit_kmeans,
}


def fit(method: str, values, k: int) -> Discretizer:
    try:
        fitter = _FITTERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}") from None
    return fitter(values, k)


def apply(d: Discretizer, values) -> np.ndarray:
    """State index per value; -1 marks missing.

    A value gets the number of cut points at or below it, so a value equal
    to a cut point lands in the upper bin and out-of-range values clamp to the
    end bins.
    """
    arr = np.asarray(values, dtype=float)
    states = np.searchsorted(np.asarray(d.cut_points), arr, side="right").astype(np.int64)
    states[np.isnan(arr)] = -1
    return states


def bin_counts(d: Discretizer, values) -> list[int]:
    states = apply(d, values)
    return np.bincount(states[states >= 0], minlength=d.k).tolist()


@dataclass(frozen=True)
class DiscreteDataset:
    """Integer-coded categorical data; -1 marks a missing cell."""

    names: tuple[str, ...]
    cardinalities: tuple[int, ...]
    state_labels: tuple[tuple[str, ...], ...]
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.int64)
        if data.ndim != 2 or data.shape[1] != len(self.names):
            raise ValueError("data must have one column per variable")
        if len(set(self.names)) != len(self.names):
            raise ValueError("variable names must be unique")
        cards = tuple(int(c) for c in self.cardinalities)
        for j, card in enumerate(cards):
            col = data[:, j]
            if np.any(col < -1) or np.any(col >= card):
                raise ValueError(f"state index out of range for {self.names[j]!r}")
            if len(self.state_labels[j]) != card:
                raise ValueError(f"label count mismatch for {self.names[j]!r}")
        data.setflags(write=False)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "cardinalities", cards)
        object.__setattr__(self, "state_labels", tuple(tuple(s) for s in self.state_labels))
        object.__setattr__(self, "data", data)

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    def index(self, name: str) -> int:
        return self.names.index(name)

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.index(name)]

    def has_missing(self) -> bool:
        return bool(np.any(self.data < 0))

    def take(self, rows) -> "DiscreteDataset":
        return DiscreteDataset(self.names, self.cardinalities, self.state_labels, self.data[rows])

    @classmethod
    def from_columns(
        cls,
        columns: dict[str, Sequence[int]],
        cardinalities: dict[str, int] | None = None,
        labels: dict[str, Sequence[str]] | None = None,
    ) -> "DiscreteDataset":
        names = tuple(columns)
        data = np.column_stack([np.asarray(columns[n], dtype=np.int64) for n in names])
        cards = []
        for n in names:
            if cardinalities and n in cardinalities:
                cards.append(int(cardinalities[n]))
            else:
                cards.append(max(int(data[:, names.index(n)].max()) + 1, 2))
        labs = []
        for n, c in zip(names, cards):
            if labels and n in labels:
                labs.append(tuple(labels[n]))
            else:
                labs.append(tuple(label_states(c)) if c >= 2 else ("Only",))
        return cls(names, tuple(cards), tuple(labs), data)


def discretize_table(columns: dict[str, np.ndarray], discretizers: dict[str, Discretizer]) -> DiscreteDataset:
    names = tuple(columns)
    data = np.column_stack([apply(discretizers[n], columns[n]) for n in names])
    return DiscreteDataset(
        names,
        tuple(discretizers[n].k for n in names),
        tuple(discretizers[n].state_labels for n in names),
        data,
    )
