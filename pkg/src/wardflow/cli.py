"""Command-line interface: build, analyze, synth, and export."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import __version__, report as report_mod
from .eventlog import (
    KEEP_AS_IS,
    REJECT_UNKNOWN,
    LogSchema,
    SchemaError,
    UnknownLocationError,
    apply_category_map,
    parse_event_log,
    read_category_map,
    reconstruct_journeys,
)
from .network import build_network, export_network, import_network
from .synth import ModelSpec, generate_event_log, generate_network, geometric_stop_lengths, write_event_log_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_ANALYSIS = 3

_FORMATS = ("graphml", "dot", "edgelist")
_MODEL_FAMILIES = {
    "ba": "preferential-attachment",
    "ws": "ring-rewire",
    "er": "uniform-random",
    "config": "configuration",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _schema_from_args(args) -> LogSchema:
    return LogSchema(
        admission_column=args.admission_col,
        location_column=args.location_col,
        timestamp_column=args.timestamp_col,
        delimiter=args.delimiter,
        timestamp_format=args.timestamp_format,
    )


def _add_log_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--admission-col", default="admission_id")
    parser.add_argument("--location-col", default="location")
    parser.add_argument("--timestamp-col", default="timestamp")
    parser.add_argument("--delimiter", default=",")
    parser.add_argument("--timestamp-format", default=None,
                        help="strptime format; default ISO-8601")
    parser.add_argument("--categories", default=None, help="two-column location,category file")
    parser.add_argument("--category-policy", choices=[KEEP_AS_IS, REJECT_UNKNOWN], default=KEEP_AS_IS)


def _network_from_log(path: str, args) -> tuple:
    with open(path, "rb") as handle:
        data = handle.read()
    events, stats = parse_event_log(io.StringIO(data.decode("utf-8")), _schema_from_args(args))
    journeys = reconstruct_journeys(events)
    if args.categories:
        category_map = read_category_map(args.categories, default_policy=args.category_policy,
                                         delimiter=args.delimiter)
        journeys = apply_category_map(journeys, category_map)
        data += Path(args.categories).read_bytes()  # digest covers every input file
    return build_network(journeys), stats, data


def _write_output(payload: bytes, destination: str | None) -> None:
    if destination is None or destination == "-":
        sys.stdout.buffer.write(payload)
    else:
        Path(destination).write_bytes(payload)


def cmd_build(args) -> int:
    try:
        net, stats, _ = _network_from_log(args.log, args)
    except (OSError, SchemaError, UnknownLocationError, ValueError, UnicodeDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(
        f"rows read: {stats.rows_read}, rejected: {stats.rows_rejected} {dict(sorted(stats.rejections.items()))}",
        file=sys.stderr,
    )
    try:
        payload = export_network(net, args.format)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write_output(payload, args.output)
    return EXIT_OK


def _load_network(args):
    path = Path(args.network)
    data = path.read_bytes()
    if args.from_log:
        net, stats, raw = _network_from_log(args.network, args)
        return net, stats, raw
    fmt = args.format or {"": "graphml", ".graphml": "graphml", ".xml": "graphml", ".csv": "edgelist"}.get(
        path.suffix.lower(), "graphml"
    )
    return import_network(data, fmt, directed=not args.undirected), None, data


def _write_sidecars(report: dict, directory: str) -> None:
    base = Path(directory)
    base.mkdir(parents=True, exist_ok=True)
    metrics = report.get("network_metrics") or {}
    distribution = metrics.get("degree_distribution") or {}
    with open(base / "degree_distribution.csv", "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["degree", "probability"])
        for k in sorted(distribution, key=int):
            writer.writerow([k, distribution[k]])
    nodes = report.get("node_metrics") or []
    by_degree: dict[int, list[float]] = {}
    for row in nodes:
        if row.get("knn_weighted") is not None:
            by_degree.setdefault(row["degree"], []).append(row["knn_weighted"])
    with open(base / "knn_curve.csv", "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["degree", "mean_knn_weighted"])
        for k in sorted(by_degree):
            writer.writerow([k, sum(by_degree[k]) / len(by_degree[k])])
    for strategy, attack in (report.get("resilience") or {}).items():
        with open(base / f"attack_{strategy}.csv", "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["fraction_removed", "wcc_fraction", "scc_fraction", "efficiency"])
            for step in attack["steps"]:
                writer.writerow([step["fraction_removed"], step["wcc_fraction"],
                                 step["scc_fraction"], step["efficiency"]])


def cmd_analyze(args) -> int:
    try:
        net, stats, raw = _load_network(args)
    except (OSError, SchemaError, UnknownLocationError, ValueError, UnicodeDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    skip = [token for chunk in args.skip for token in chunk.split(",") if token]
    strategies = [token for chunk in args.attack for token in chunk.split(",") if token]
    try:
        report = report_mod.build_report(
            net,
            seed=args.seed,
            boot=args.boot,
            quantile=args.quantile,
            role_threshold_sd=args.role_threshold_sd,
            sw_samples=args.sw_samples,
            sw_swaps=args.sw_swaps,
            sw_lattice_swaps=args.sw_lattice_swaps,
            attack_strategies=strategies or ("degree", "random"),
            attack_step=args.attack_step,
            skip=skip,
            ingest=stats,
            digest=report_mod.input_digest(raw),
            weighted_betweenness=args.weighted_betweenness,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.sidecar_dir:
        _write_sidecars(report, args.sidecar_dir)
    text = json.dumps(report, indent=2, allow_nan=False)
    print(text)
    return EXIT_ANALYSIS if report.get("all_sections_failed") else EXIT_OK


def cmd_synth(args) -> int:
    family = _MODEL_FAMILIES[args.model]
    degrees = None
    if args.degrees:
        degrees = tuple(int(token) for token in args.degrees.split(",") if token)
    try:
        spec = ModelSpec(family=family, n=args.n, seed=args.seed, m=args.m, k=args.k,
                         p=args.p, degrees=degrees)
        net = generate_network(spec)
        journeys, stats = generate_event_log(
            net, args.journeys, geometric_stop_lengths(args.mean_stops), seed=args.seed
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    buffer = io.StringIO()
    write_event_log_csv(journeys, buffer)
    _write_output(buffer.getvalue().encode("utf-8"), args.output)
    print(f"journeys: {len(journeys)}, truncated: {stats.truncated_journeys}", file=sys.stderr)
    return EXIT_OK


def cmd_export(args) -> int:
    path = Path(args.network)
    try:
        data = path.read_bytes()
        source_fmt = args.source_format or ("edgelist" if path.suffix.lower() == ".csv" else "graphml")
        net = import_network(data, source_fmt, directed=not args.undirected)
        payload = export_network(net, args.to)
    except (OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _write_output(payload, args.output)
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="wardflow", description="Transfer-network analysis of location event logs")
    parser.add_argument("--version", action="version", version=f"wardflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", help="event log CSV -> network file")
    build.add_argument("log")
    _add_log_options(build)
    build.add_argument("--format", choices=_FORMATS, default="graphml")
    build.add_argument("-o", "--output", default=None)
    build.set_defaults(func=cmd_build)

    analyze = sub.add_parser("analyze", help="network file -> JSON report on stdout")
    analyze.add_argument("network")
    analyze.add_argument("--from-log", action="store_true", help="treat the input as an event log CSV")
    _add_log_options(analyze)
    analyze.add_argument("--format", choices=("graphml", "edgelist"), default=None,
                         help="input format override")
    analyze.add_argument("--undirected", action="store_true", help="edge-list input is undirected")
    analyze.add_argument("--quantile", type=float, default=0.20)
    analyze.add_argument("--role-threshold-sd", type=float, default=2.0)
    analyze.add_argument("--boot", type=int, default=200)
    analyze.add_argument("--seed", type=int, default=0)
    analyze.add_argument("--sw-samples", type=int, default=20)
    analyze.add_argument("--sw-swaps", type=int, default=None)
    analyze.add_argument("--sw-lattice-swaps", type=int, default=None)
    analyze.add_argument("--attack", action="append", default=[],
                         help="comma-separated strategies: degree, betweenness, random")
    analyze.add_argument("--attack-step", type=float, default=0.05)
    analyze.add_argument("--skip", action="append", default=[],
                         help=f"comma-separated sections: {', '.join(report_mod.SECTIONS)}")
    analyze.add_argument("--weighted-betweenness", action="store_true")
    analyze.add_argument("--sidecar-dir", default=None, help="write plot-ready curve CSVs here")
    analyze.set_defaults(func=cmd_analyze)

    synth = sub.add_parser("synth", help="generate a synthetic event log CSV")
    synth.add_argument("--model", choices=sorted(_MODEL_FAMILIES), required=True)
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--m", type=int, default=None)
    synth.add_argument("--k", type=int, default=None)
    synth.add_argument("--p", type=float, default=None)
    synth.add_argument("--degrees", default=None, help="comma-separated degree sequence")
    synth.add_argument("--journeys", type=int, required=True)
    synth.add_argument("--mean-stops", type=float, default=14.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("-o", "--output", default=None)
    synth.set_defaults(func=cmd_synth)

    export = sub.add_parser("export", help="convert a network file between formats")
    export.add_argument("network")
    export.add_argument("--source-format", choices=("graphml", "edgelist"), default=None)
    export.add_argument("--undirected", action="store_true")
    export.add_argument("--to", choices=_FORMATS, required=True)
    export.add_argument("-o", "--output", default=None)
    export.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
