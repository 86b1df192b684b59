"""Discrete Bayesian-network analysis of daily coin and market series.

Subcommands::

    cryptobn run <config.yaml>
    cryptobn query <network.json> --target NAME [--evidence NAME=State ...] [--json]
    cryptobn describe <file.csv> [--date-column date] [--columns A B] [--json]
    cryptobn discretize <file.csv> --method M --bins K [--transform T] [--json]

Exit status: 0 on success, 2 for configuration or usage errors caught
before any work starts, 1 for other failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import discretize as disc
from .config import normalise_method
from .data_ingest import TRANSFORMS, TransformSpec, describe, load_csv, transform
from .errors import ConfigError, CryptoBNError, UnknownStateLabel, UnknownVariable
from .infer import predict
from .network import BayesianNetwork

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _parse_evidence(net: BayesianNetwork, pairs: list[str]) -> dict[str, int]:
    evidence = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"evidence must look like name=State, got {pair!r}")
        name, label = pair.split("=", 1)
        name, label = name.strip(), label.strip()
        if name not in net.states:
            raise UnknownVariable(name)
        labels = list(net.states[name])
        if label not in labels:
            raise UnknownStateLabel(name, label, labels)
        evidence[name] = labels.index(label)
    return evidence


def cmd_run(args) -> int:
    from .pipeline import run
    from .config import load_config

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    written = run(cfg)
    print(f"wrote {len(written)} artifacts + manifest.json to {cfg.output_dir}")
    return EXIT_OK


def cmd_query(args) -> int:
    net = BayesianNetwork.loads(Path(args.model).read_text(encoding="utf-8"))
    if args.target not in net.states:
        raise UnknownVariable(args.target)
    evidence = _parse_evidence(net, args.evidence or [])
    state, post = predict(net, evidence, args.target)
    labels = net.states[args.target]
    if args.json:
        out = {
            "target": args.target,
            "evidence": {k: net.states[k][v] for k, v in evidence.items()},
            "posterior": dict(zip(labels, post.probabilities.tolist())),
            "argmax": labels[state],
        }
        print(json.dumps(out, indent=2))
    else:
        given = ", ".join(f"{k}={net.states[k][v]}" for k, v in evidence.items()) or "no evidence"
        print(f"P({args.target} | {given})")
        width = max(len(lab) for lab in labels)
        for lab, p in zip(labels, post.probabilities):
            print(f"  {lab:<{width}}  {p:.6f}")
        print(f"argmax: {labels[state]}")
    return EXIT_OK


def cmd_describe(args) -> int:
    table = load_csv(args.csv, args.date_column, args.columns)
    stats = {n: describe(table[n]).as_dict() for n in table.names}
    if args.json:
        print(json.dumps(stats, indent=2))
        return EXIT_OK
    print(f"{'':<16}{'Mean':>12}{'Std. Dev.':>12}{'Min.':>12}{'Median':>12}{'Max.':>12}{'No. Obs.':>10}")
    for name, s in stats.items():
        print(
            f"{name:<16}{s['mean']:>12.2f}{s['std_dev']:>12.2f}{s['min']:>12.2f}"
            f"{s['median']:>12.2f}{s['max']:>12.2f}{s['n_obs']:>10d}"
        )
    return EXIT_OK


def cmd_discretize(args) -> int:
    table = load_csv(args.csv, args.date_column, args.columns)
    if args.transform != "raw":
        table = transform(table, TransformSpec({n: args.transform for n in table.names}))
    method = normalise_method(args.method)
    result = {}
    for name in table.names:
        d = disc.fit(method, table[name], args.bins)
        result[name] = {**d.to_json(), "counts": disc.bin_counts(d, table[name])}
    if args.json:
        print(json.dumps(result, indent=2))
        return EXIT_OK
    print(f"method={method} bins={args.bins} transform={args.transform}")
    for name, r in result.items():
        cells = "  ".join(f"{lab}={c}" for lab, c in zip(r["state_labels"], r["counts"]))
        print(f"{name:<16}{cells}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cryptobn", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the full pipeline from a YAML config")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("query", help="posterior of a target in a saved network")
    p.add_argument("model", help="network JSON written by `run`")
    p.add_argument("--target", required=True)
    p.add_argument("--evidence", nargs="*", default=[], metavar="NAME=STATE")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("describe", help="summary statistics per column")
    p.add_argument("csv")
    p.add_argument("--date-column", default="date")
    p.add_argument("--columns", nargs="*", default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("discretize", help="bin populations per column")
    p.add_argument("csv")
    p.add_argument("--method", required=True, help="EqualInterval, EqualQuantile or KMeans")
    p.add_argument("--bins", type=int, required=True)
    p.add_argument("--transform", choices=TRANSFORMS, default="raw")
    p.add_argument("--date-column", default="date")
    p.add_argument("--columns", nargs="*", default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_discretize)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (CryptoBNError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
