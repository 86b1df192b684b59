"""End-to-end run: ingest, grid, selection, final network and reports.

Every output byte is a function of the config and its seed. Artifacts are
listed in ``manifest.json`` with their sha256, sorted by path.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import replace
from pathlib import Path

from . import evaluate
from .config import PipelineConfig, load_config
from .data_ingest import TransformSpec, align, describe, load_csv, transform
from .graph import export_dot
from .infer import what_if
from .sensitivity import sensitivity_report

log = logging.getLogger(__name__)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


class _Writer:
    def __init__(self, root: Path):
        self.root = root
        self.written: dict[str, str] = {}

    def write(self, rel: str, text: str) -> None:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode("utf-8")
        path.write_bytes(data)
        self.written[rel] = hashlib.sha256(data).hexdigest()

    def manifest(self) -> None:
        entries = [{"path": k, "sha256": v} for k, v in sorted(self.written.items())]
        (self.root / "manifest.json").write_text(_dump({"artifacts": entries}), encoding="utf-8")


def build_table(cfg: PipelineConfig):
    tables = [load_csv(spec.path, spec.date_column, list(spec.columns)) for spec in cfg.inputs]
    aligned = align(tables, cfg.alignment, cfg.max_gap)
    return aligned, transform(aligned, TransformSpec(cfg.transforms))


def _safe_name(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)


def run(cfg: PipelineConfig) -> dict[str, str]:
    out = _Writer(cfg.output_dir)
    aligned, table = build_table(cfg)
    log.info("aligned table: %d rows, %d columns", table.n_rows, len(table.names))

    out.write("describe.json", _dump({n: describe(aligned[n]).as_dict() for n in aligned.names}))
    out.write("data/aligned.csv", aligned.to_csv())
    out.write("data/transformed.csv", table.to_csv())

    lr = cfg.learner
    base = evaluate.ModelConfig(
        target=cfg.targets[0].name,
        score=lr.score,
        max_parents=lr.max_parents,
        alpha=lr.alpha,
        restarts=lr.restarts,
        learner=lr.algorithm,
        pc_alpha=lr.pc_alpha,
    )
    variables = {t.name: list(t.variables) for t in cfg.targets}
    reports = []
    for t in cfg.targets:
        forbidden = tuple(e for e in lr.forbidden_edges if e[0] in t.variables and e[1] in t.variables)
        reports.extend(
            evaluate.run_grid(
                table,
                [t.name],
                cfg.methods,
                cfg.bins,
                replace(base, forbidden=forbidden),
                cfg.seed,
                cfg.folds,
                variables,
                cfg.n_jobs,
            )
        )
    out.write("grid.json", evaluate.reports_to_json(reports))
    out.write("grid.md", evaluate.reports_to_markdown(reports))

    for t in cfg.targets:
        folder = _safe_name(t.name)
        mine = [r for r in reports if r.config.target == t.name]
        out.write(f"{folder}/grid.json", evaluate.reports_to_json(mine))
        out.write(f"{folder}/grid.md", evaluate.reports_to_markdown(mine))
        try:
            winner = evaluate.best_report(mine)
        except evaluate.EmptyInput:
            out.write(f"{folder}/winner.json", _dump({"target": t.name, "winner": None,
                                                      "reason": "every grid cell failed"}))
            continue
        net = winner.network
        out.write(
            f"{folder}/winner.json",
            _dump(
                {
                    "target": t.name,
                    "config": winner.config.to_json(),
                    "accuracy": winner.accuracy,
                    "auc": None if math.isnan(winner.auc) else winner.auc,
                    "parameter_count": winner.parameter_count,
                    "rule": "max accuracy, then max AUC, then min parameter count",
                    "discretizers": {n: d.to_json() for n, d in winner.discretizers.items()},
                }
            ),
        )
        out.write(f"{folder}/network.json", net.dumps())
        out.write(f"{folder}/network.dot", export_dot(net.dag, name=t.name))

        scenarios = []
        for node in net.nodes:
            if node == t.name:
                continue
            for s in range(net.cardinality(node)):
                scenarios.append(what_if(net, node, s).to_json(net.states))
        out.write(f"{folder}/what_if.json", _dump({"target": t.name, "scenarios": scenarios}))

        report = sensitivity_report(net, t.name)
        out.write(f"{folder}/sensitivity.json", _dump(report.to_json(net.states)))
        out.write(
            f"{folder}/sensitivity.dot",
            export_dot(net.dag, report.per_node_strength, name=f"sensitivity_{t.name}"),
        )
        degrees = {n: net.dag.in_degree(n) for n in net.nodes}
        out.write(
            f"{folder}/in_degree.json",
            _dump(
                {
                    "in_degree": degrees,
                    "isolated": [n for n in net.nodes if degrees[n] == 0],
                    "parents": {n: net.dag.parents(n) for n in net.nodes},
                }
            ),
        )
    out.manifest()
    return out.written


def run_pipeline(config_path: str | Path) -> dict[str, str]:
    return run(load_config(config_path))
