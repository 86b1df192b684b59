"""Pipeline configuration: a versioned YAML document validated up front."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .data_ingest import TRANSFORMS
from .discretize import METHODS
from .errors import ConfigError
from .learn import ScoreSpec

SCHEMA_VERSION = 1

_METHOD_ALIASES = {
    "equalinterval": "EqualInterval",
    "equal_interval": "EqualInterval",
    "equal-interval": "EqualInterval",
    "interval": "EqualInterval",
    "equalquantile": "EqualQuantile",
    "equal_quantile": "EqualQuantile",
    "equal-quantile": "EqualQuantile",
    "quantile": "EqualQuantile",
    "kmeans": "KMeans",
    "k-means": "KMeans",
    "k_means": "KMeans",
}


def normalise_method(name: str) -> str:
    if name in METHODS:
        return name
    try:
        return _METHOD_ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown discretisation method {name!r}; choose from {list(METHODS)}") from None


@dataclass(frozen=True)
class InputSpec:
    path: Path
    date_column: str
    columns: tuple[str, ...]


@dataclass(frozen=True)
class TargetSpec:
    name: str
    variables: tuple[str, ...]


@dataclass(frozen=True)
class LearnerSettings:
    algorithm: str = "hill_climb"
    score: ScoreSpec = ScoreSpec()
    max_parents: int = 4
    restarts: int = 10
    alpha: float = 1.0
    pc_alpha: float = 0.05
    forbidden_edges: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class PipelineConfig:
    seed: int
    inputs: tuple[InputSpec, ...]
    targets: tuple[TargetSpec, ...]
    output_dir: Path
    alignment: str = "intersect"
    max_gap: int | None = None
    transforms: dict[str, str] = field(default_factory=dict)
    methods: tuple[str, ...] = METHODS
    bins: tuple[int, ...] = (2, 3, 4)
    learner: LearnerSettings = LearnerSettings()
    folds: int = 5
    n_jobs: int = 1

    @property
    def all_columns(self) -> list[str]:
        return [c for spec in self.inputs for c in spec.columns]


def _require(obj: dict, key: str, path: str) -> Any:
    if not isinstance(obj, dict) or key not in obj or obj[key] is None:
        raise ConfigError(f"{path}{key}" if not path else f"{path}.{key}", "required field missing")
    return obj[key]


def _int(value, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return value


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _csv_header(path: Path) -> list[str]:
    with path.open(newline="", encoding="utf-8-sig") as fh:
        try:
            return [h.strip() for h in next(csv.reader(fh))]
        except StopIteration:
            return []


def parse_config(raw: Any, base_dir: Path) -> PipelineConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a mapping")
    version = _require(raw, "schema_version", "")
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version!r}; this build reads {SCHEMA_VERSION}")
    seed = _int(_require(raw, "seed", ""), "seed", 0)

    inputs = []
    raw_inputs = _require(raw, "inputs", "")
    if not isinstance(raw_inputs, list) or not raw_inputs:
        raise ConfigError("inputs", "expected a non-empty list")
    for i, item in enumerate(raw_inputs):
        where = f"inputs[{i}]"
        path = base_dir / str(_require(item, "path", where))
        if not path.is_file():
            raise ConfigError(f"{where}.path", f"file not found: {path}")
        date_column = str(item.get("date_column", "date"))
        header = _csv_header(path)
        if date_column not in header:
            raise ConfigError(f"{where}.date_column", f"{date_column!r} not in {path.name} header")
        columns = item.get("columns")
        if columns is None:
            columns = [h for h in header if h != date_column]
        if not isinstance(columns, list) or not columns:
            raise ConfigError(f"{where}.columns", "expected a non-empty list")
        for c in columns:
            if c not in header:
                raise ConfigError(f"{where}.columns", f"column {c!r} not in {path.name}")
        inputs.append(InputSpec(path, date_column, tuple(str(c) for c in columns)))
    all_columns = [c for spec in inputs for c in spec.columns]
    if len(set(all_columns)) != len(all_columns):
        raise ConfigError("inputs", "column names must be unique across files")

    align = raw.get("alignment") or {}
    policy = align.get("policy", "intersect")
    if policy not in ("intersect", "forward_fill"):
        raise ConfigError("alignment.policy", f"unknown policy {policy!r}")
    max_gap = None
    if policy == "forward_fill":
        max_gap = _int(_require(align, "max_gap", "alignment"), "alignment.max_gap", 0)

    tr = raw.get("transforms") or {}
    default = tr.get("default", "first_difference")
    if default not in TRANSFORMS:
        raise ConfigError("transforms.default", f"unknown transform {default!r}")
    per_column = dict(tr.get("columns") or {})
    for c, kind in per_column.items():
        if c not in all_columns:
            raise ConfigError(f"transforms.columns.{c}", "unknown column")
        if kind not in TRANSFORMS:
            raise ConfigError(f"transforms.columns.{c}", f"unknown transform {kind!r}")
    transforms = {c: per_column.get(c, default) for c in all_columns}

    grid = raw.get("grid") or {}
    try:
        methods = tuple(normalise_method(m) for m in grid.get("methods", list(METHODS)))
    except ValueError as exc:
        raise ConfigError("grid.methods", str(exc)) from None
    bins = tuple(_int(b, f"grid.bins[{i}]", 2) for i, b in enumerate(grid.get("bins", [2, 3, 4])))
    if not methods or not bins:
        raise ConfigError("grid", "methods and bins must be non-empty")

    raw_targets = _require(raw, "targets", "")
    if not isinstance(raw_targets, list) or not raw_targets:
        raise ConfigError("targets", "expected a non-empty list")
    targets = []
    for i, t in enumerate(raw_targets):
        where = f"targets[{i}]"
        if isinstance(t, str):
            t = {"name": t}
        name = str(_require(t, "name", where))
        if name not in all_columns:
            raise ConfigError(f"{where}.name", f"unknown column {name!r}")
        variables = t.get("variables") or all_columns
        for v in variables:
            if v not in all_columns:
                raise ConfigError(f"{where}.variables", f"unknown column {v!r}")
        if name not in variables:
            variables = [name, *variables]
        if len(variables) < 2:
            raise ConfigError(f"{where}.variables", "a network needs at least 2 variables")
        targets.append(TargetSpec(name, tuple(variables)))

    lr = raw.get("learner") or {}
    algorithm = lr.get("algorithm", "hill_climb")
    if algorithm not in ("hill_climb", "pc"):
        raise ConfigError("learner.algorithm", f"unknown algorithm {algorithm!r}")
    score_kind = lr.get("score", "BDeu")
    if score_kind not in ("BDeu", "BIC"):
        raise ConfigError("learner.score", f"unknown score {score_kind!r}")
    ess = _number(lr.get("equivalent_sample_size", 1.0), "learner.equivalent_sample_size")
    if ess <= 0:
        raise ConfigError("learner.equivalent_sample_size", "must be positive")
    alpha = _number(lr.get("alpha", 1.0), "learner.alpha")
    if alpha < 0:
        raise ConfigError("learner.alpha", "must be >= 0")
    forbidden = []
    for i, e in enumerate(lr.get("forbidden_edges") or []):
        if not isinstance(e, (list, tuple)) or len(e) != 2 or any(v not in all_columns for v in e):
            raise ConfigError(f"learner.forbidden_edges[{i}]", "expected [parent, child] column names")
        forbidden.append((str(e[0]), str(e[1])))
    learner = LearnerSettings(
        algorithm=algorithm,
        score=ScoreSpec(score_kind, ess),
        max_parents=_int(lr.get("max_parents", 4), "learner.max_parents", 1),
        restarts=_int(lr.get("restarts", 10), "learner.restarts", 1),
        alpha=alpha,
        pc_alpha=_number(lr.get("pc_alpha", 0.05), "learner.pc_alpha"),
        forbidden_edges=tuple(forbidden),
    )

    output_dir = base_dir / str(raw.get("output_dir", "out"))
    return PipelineConfig(
        seed=seed,
        inputs=tuple(inputs),
        targets=tuple(targets),
        output_dir=output_dir,
        alignment=policy,
        max_gap=max_gap,
        transforms=transforms,
        methods=methods,
        bins=bins,
        learner=learner,
        folds=_int(raw.get("folds", 5), "folds", 2),
        n_jobs=_int(raw.get("n_jobs", 1), "n_jobs", 1),
    )


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("<file>", f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"invalid YAML: {exc}") from None
    return parse_config(raw, path.parent)
