"""Decomposable structure scores (BIC and BDeu)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .. import kernels
from ..discretize import DiscreteDataset
from ..errors import EmptyEffectiveData


@dataclass(frozen=True)
class ScoreSpec:
    kind: str = "BDeu"
    equivalent_sample_size: float = 1.0

    def __post_init__(self):
        if self.kind not in ("BIC", "BDeu"):
            raise ValueError(f"unknown score {self.kind!r}")
        if not self.equivalent_sample_size > 0:
            raise ValueError("equivalent_sample_size must be positive")

    def to_json(self) -> dict:
        if self.kind == "BIC":
            return {"kind": "BIC"}
        return {"kind": "BDeu", "equivalent_sample_size": self.equivalent_sample_size}


BDEU = ScoreSpec("BDeu", 1.0)
BIC = ScoreSpec("BIC")


def score_counts(counts: np.ndarray, spec: ScoreSpec) -> float:
    """Family score from a (parent configs x child states) count table."""
    counts = np.asarray(counts, dtype=float)
    q, r = counts.shape
    n_j = counts.sum(axis=1)
    if spec.kind == "BIC":
        nz = counts > 0
        ll = float(np.sum(counts[nz] * np.log(counts[nz] / np.broadcast_to(n_j[:, None], counts.shape)[nz])))
        n = float(n_j.sum())
        return ll - 0.5 * np.log(n) * (r - 1) * q
    a_j = spec.equivalent_sample_size / q
    a_jk = a_j / r
    return float(
        np.sum(gammaln(a_j) - gammaln(a_j + n_j))
        + np.sum(gammaln(a_jk + counts) - gammaln(a_jk))
    )


def family_score(data: DiscreteDataset, child: str, parents: Sequence[str], spec: ScoreSpec = BDEU) -> float:
    """Score of one node given its parent set.

    Rows missing any of the involved columns are dropped for this family only.
    """
    ci = data.index(child)
    pis = [data.index(p) for p in parents]
    counts, used = kernels.family_counts(data.data, ci, pis, data.cardinalities)
    if used == 0:
        raise EmptyEffectiveData(f"no complete rows for family {child!r} | {list(parents)}")
    return score_counts(counts, spec)


def graph_score(data: DiscreteDataset, dag, spec: ScoreSpec = BDEU) -> float:
    return sum(family_score(data, n, dag.parents(n), spec) for n in dag.nodes)


class ScoreCache:
    """Memoised family scores keyed by (child index, sorted parent indices)."""

    def __init__(self, data: DiscreteDataset, spec: ScoreSpec):
        self.data = data
        self.spec = spec
        self._cache: dict[tuple[int, tuple[int, ...]], float] = {}
        self._matrix = data.data
        self._cards = data.cardinalities

    def __call__(self, child: int, parents) -> float:
        key = (child, tuple(sorted(parents)))
        hit = self._cache.get(key)
        if hit is None:
            counts, used = kernels.family_counts(self._matrix, child, key[1], self._cards)
            if used == 0:
                raise EmptyEffectiveData(f"no complete rows for family {self.data.names[child]!r}")
            hit = score_counts(counts, self.spec)
            self._cache[key] = hit
        return hit

    def __len__(self) -> int:
        return len(self._cache)
