"""Command-line shell for the acquisition, build, analysis, and query
pipeline.

Exit codes: 0 success; 2 missing snapshot or input file; 3 malformed
configuration; 1 any other domain failure. Structured logs go to stderr,
one event per line; command output goes to stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

from pkgraph import analytics
from pkgraph.annotate import BaselineAnnotator
from pkgraph.errors import PkgraphError
from pkgraph.evalstats import (
    classification_metrics,
    discordant_counts,
    mcnemar,
    paired_outcomes_are_binary,
    read_classification_file,
    read_paired_file,
    wilcoxon_signed_rank,
)
from pkgraph.graph import SnapshotError, load_snapshot, save_snapshot, TopicKind
from pkgraph.imports import Resolver, scan_corpus, load_alias_table, load_name_set, write_unresolved_report
from pkgraph.infer import (
    DEFAULT_COEFFICIENTS,
    DEFAULT_KIND_WEIGHTS,
    ScoreCoefficients,
    query_to_dict,
    recommend,
    recommendation_to_dict,
    story_to_query,
)
from pkgraph.ingest import (
    FetchPolicy,
    IngestEndpoints,
    LiveTransport,
    Platform,
    RecordingTransport,
    ReplayTransport,
)
from pkgraph.pipeline import (
    StagingError,
    build_graph,
    load_scan,
    load_staging,
    run_ingest,
    save_scan,
    write_staging,
)
from pkgraph._data import read_data_lines, read_file_lines

logger = logging.getLogger("pkgraph")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_MISSING_INPUT = 2
EXIT_BAD_CONFIG = 3


class ConfigError(PkgraphError):
    """Configuration file or flag is malformed."""


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        config = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    unknown = set(config) - {"coefficients", "kind_weights"}
    if unknown:
        raise ConfigError(f"config {path} has unknown keys: {sorted(unknown)}")
    return config


def _coefficients(args, config: dict) -> ScoreCoefficients:
    values = {
        "topical": DEFAULT_COEFFICIENTS.topical,
        "quality": DEFAULT_COEFFICIENTS.quality,
        "usage": DEFAULT_COEFFICIENTS.usage,
        "vulnerability": DEFAULT_COEFFICIENTS.vulnerability,
    }
    from_file = config.get("coefficients", {})
    if not isinstance(from_file, dict) or set(from_file) - set(values):
        raise ConfigError(f"coefficients config must use keys {sorted(values)}")
    values.update(from_file)
    for name in values:
        override = getattr(args, f"coeff_{name}", None)
        if override is not None:
            values[name] = override
    try:
        return ScoreCoefficients(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad coefficients: {exc}") from exc


def _kind_weights(args, config: dict) -> Dict[TopicKind, float]:
    weights = dict(DEFAULT_KIND_WEIGHTS)
    from_file = config.get("kind_weights", {})
    if not isinstance(from_file, dict):
        raise ConfigError("kind_weights config must be an object")
    for key, value in from_file.items():
        try:
            weights[TopicKind(key)] = float(value)
        except ValueError as exc:
            raise ConfigError(f"bad kind weight {key!r}: {exc}") from exc
    for raw in getattr(args, "kind_weight", None) or []:
        key, sep, value = raw.partition("=")
        if not sep:
            raise ConfigError(f"--kind-weight expects KIND=VALUE, got {raw!r}")
        try:
            weights[TopicKind(key.strip())] = float(value)
        except ValueError as exc:
            raise ConfigError(f"bad --kind-weight {raw!r}: {exc}") from exc
    return weights


def _add_scoring_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config with coefficients and kind_weights")
    parser.add_argument("--coeff-topical", type=float, dest="coeff_topical")
    parser.add_argument("--coeff-quality", type=float, dest="coeff_quality")
    parser.add_argument("--coeff-usage", type=float, dest="coeff_usage")
    parser.add_argument("--coeff-vulnerability", type=float, dest="coeff_vulnerability")
    parser.add_argument(
        "--kind-weight", action="append", metavar="KIND=VALUE",
        help="override a topic kind weight (repeatable)")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    if args.replay:
        transport = ReplayTransport(args.replay)
    else:
        headers = {}
        token = os.environ.get("PKGRAPH_CODEHOST_TOKEN")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        transport = LiveTransport(policy=FetchPolicy(), headers=headers)
        if args.record:
            transport = RecordingTransport(transport, args.record)
    packages: List[str] = []
    if args.packages:
        packages.extend(p.strip() for p in args.packages.split(",") if p.strip())
    if args.packages_file:
        packages.extend(read_file_lines(args.packages_file))
    if args.from_scan:
        scan = load_scan(args.from_scan)
        packages.extend(scan.usage)
    platforms = [Platform(p.strip()) for p in args.platforms.split(",") if p.strip()]
    endpoints = IngestEndpoints.from_env()
    staging = run_ingest(packages, args.term or [], platforms, transport, endpoints)
    write_staging(staging, args.staging)
    for warning in staging.warnings:
        logger.warning("ingest: %s", warning)
    print(f"staged {len(staging.metadata)} package(s), {len(staging.repos)} repo(s) "
          f"-> {args.staging}")
    return EXIT_OK


def cmd_scan(args) -> int:
    registry_index = load_name_set(args.registry_index) if args.registry_index else frozenset()
    alias_table = load_alias_table(args.alias_table) if args.alias_table else None
    stdlib_modules = load_name_set(args.stdlib_modules) if args.stdlib_modules else None
    resolver = Resolver(
        registry_index=registry_index,
        alias_table=alias_table,
        stdlib_modules=stdlib_modules,
        stdlib_policy=args.stdlib_policy,
    )
    result = scan_corpus(args.root, resolver)
    save_scan(result, args.out)
    if args.unresolved_report:
        write_unresolved_report(result, args.unresolved_report)
    print(f"scanned {result.files_scanned} file(s): {len(result.usage)} package(s), "
          f"{len(result.unresolved)} unresolved name(s), {len(result.skipped)} skipped")
    return EXIT_OK


def cmd_build_graph(args) -> int:
    if not args.staging and not args.scan:
        raise ConfigError("build-graph needs --staging and/or --scan")
    staging = load_staging(args.staging) if args.staging else None
    scan = load_scan(args.scan) if args.scan else None
    taxonomy = (
        read_file_lines(args.taxonomy) if args.taxonomy
        else read_data_lines("taxonomy_terms.txt")
    )
    if staging is None:
        from pkgraph.pipeline import Staging
        staging = Staging()
    graph = build_graph(
        staging, scan,
        taxonomy=taxonomy,
        annotator=BaselineAnnotator(),
        build_timestamp=args.build_timestamp,
    )
    save_snapshot(graph, args.out)
    print(f"sealed graph with {len(graph)} package(s) -> {args.out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    graph = load_snapshot(args.graph)
    render = analytics.render_tsv if args.format == "tsv" else analytics.render_table

    def usage_counts() -> Dict[str, int]:
        counts = {}
        for name in graph.package_names():
            if args.scope == "registry" and not graph.package(name).registry_available:
                continue
            stat = graph.usage_of(name)
            if stat is not None and stat.script_count >= 1:
                counts[name] = stat.script_count
        return counts

    if args.report == "usage":
        report = analytics.usage_histogram(usage_counts())
        sys.stdout.write(render(analytics.DISTRIBUTION_HEADERS, analytics.distribution_rows(report)))
    elif args.report == "top-usage":
        if args.total_scripts is not None:
            total = args.total_scripts
        elif args.scan:
            total = load_scan(args.scan).files_scanned
        else:
            raise ConfigError("top-usage needs --total-scripts or --scan")
        rows = analytics.top_k_usage(usage_counts(), args.top, total)
        sys.stdout.write(render(
            analytics.USAGE_HEADERS, [(r.package, r.count, r.percentage) for r in rows]))
    elif args.report == "keywords":
        occurrences: Dict[str, int] = {}
        for name in graph.package_names():
            for label in graph.topics_of(name):
                occurrences[label.term] = occurrences.get(label.term, 0) + 1
        report = analytics.keyword_frequency(occurrences, top_n=args.top)
        sys.stdout.write(render(
            analytics.DISTRIBUTION_HEADERS, analytics.distribution_rows(report.distribution)))
        sys.stdout.write("\n")
        sys.stdout.write(render(
            analytics.KEYWORD_HEADERS,
            [(r.keyword, r.count, r.percentage) for r in report.top]))
    elif args.report == "availability":
        flags = {name: graph.package(name).registry_available for name in graph.package_names()}
        split = analytics.availability_from_packages(flags)
        sys.stdout.write(render(
            ("group", "count", "percentage"),
            [
                ("registry", split.registry_count, split.registry_percentage),
                ("other", split.other_count, split.other_percentage),
            ],
        ))
    return EXIT_OK


def cmd_recommend(args) -> int:
    config = _load_config(args.config)
    coefficients = _coefficients(args, config)
    kind_weights = _kind_weights(args, config)
    graph = load_snapshot(args.graph)
    annotator = BaselineAnnotator()
    query = story_to_query(
        args.story, annotator,
        k=args.k,
        exclude_vulnerable=args.exclude_vulnerable,
        min_quality=args.min_quality,
        runtime_constraint=args.runtime,
    )
    result = recommend(query, graph, coefficients, kind_weights)
    if args.format == "json":
        print(json.dumps({
            "recommendations": [recommendation_to_dict(r) for r in result.recommendations],
            "query_echo": query_to_dict(query),
            "graph_build_timestamp": graph.build_timestamp,
            "diagnostics": list(result.diagnostics),
        }, indent=1, sort_keys=True))
    else:
        if result.empty:
            print("no recommendations")
            for line in result.diagnostics:
                print(f"  {line}")
            return EXIT_OK
        rows = [
            (
                rank,
                rec.package,
                f"{rec.total:.4f}",
                f"{rec.components.topical:.4f}",
                f"{rec.components.quality:.4f}",
                f"{rec.components.usage:.4f}",
                f"{rec.components.vulnerability_penalty:.4f}",
                ", ".join(term for term, _ in rec.matched_terms),
            )
            for rank, rec in enumerate(result.recommendations, 1)
        ]
        sys.stdout.write(analytics.render_table(
            ("rank", "package", "total", "topical", "quality", "usage", "vuln", "matched"),
            rows,
        ))
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.mode == "classification":
        counts = read_classification_file(args.input, positive_label=args.positive_label)
        metrics = classification_metrics(counts)
        report = {
            "mode": "classification",
            "counts": {"tp": counts.tp, "fp": counts.fp, "fn": counts.fn, "tn": counts.tn},
            "metrics": metrics.as_dict(),
        }
    else:
        pairs = read_paired_file(args.input)
        report = {"mode": "paired", "n_pairs": len(pairs)}
        if paired_outcomes_are_binary(pairs):
            b, c = discordant_counts(pairs)
            test = mcnemar(b, c)
            report["mcnemar"] = {
                "b": b, "c": c,
                "statistic": test.statistic, "p_value": test.p_value, "method": test.method,
            }
        else:
            test = wilcoxon_signed_rank([a for a, _ in pairs], [b for _, b in pairs])
            report["wilcoxon"] = {
                "statistic": test.statistic, "p_value": test.p_value,
                "n_effective": test.n_effective, "method": test.method,
            }
    text = json.dumps(report, indent=1, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_OK


def cmd_serve(args) -> int:
    from pkgraph.service import serve

    config = _load_config(args.config)
    coefficients = _coefficients(args, config)
    kind_weights = _kind_weights(args, config)
    port = args.port if args.port is not None else int(os.environ.get("PKGRAPH_PORT", "8080"))
    serve(args.graph, host=args.host, port=port,
          coefficients=coefficients, kind_weights=kind_weights)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pkgraph",
        description="Evidence-based package selection over a knowledge graph",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="acquire registry, advisory, repo, and review data")
    p.add_argument("--staging", required=True, help="output staging directory")
    p.add_argument("--replay", help="fixture bundle to replay instead of live fetching")
    p.add_argument("--record", help="record live responses into this bundle directory")
    p.add_argument("--packages", help="comma-separated package names")
    p.add_argument("--packages-file", help="file of package names, one per line")
    p.add_argument("--from-scan", help="also ingest every package a scan resolved")
    p.add_argument("--term", action="append", help="taxonomy search term (repeatable)")
    p.add_argument("--platforms", default=",".join(p.value for p in Platform),
                   help="comma-separated review platforms")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("scan", help="scan a source corpus for package usage")
    p.add_argument("--root", required=True, help="corpus root directory")
    p.add_argument("--out", required=True, help="scan result JSON path")
    p.add_argument("--registry-index", help="file of known registry package names")
    p.add_argument("--alias-table", help="import-name to package alias table")
    p.add_argument("--stdlib-modules", help="standard-library module list")
    p.add_argument("--stdlib-policy", choices=["strict", "registry-shadow"], default="strict")
    p.add_argument("--unresolved-report", help="write the unresolved-name TSV here")
    p.set_defaults(handler=cmd_scan)

    p = sub.add_parser("build-graph", help="merge staging + scan into a sealed snapshot")
    p.add_argument("--staging", help="staging directory from `ingest`")
    p.add_argument("--scan", help="scan result from `scan`")
    p.add_argument("--out", required=True, help="snapshot output path")
    p.add_argument("--taxonomy", help="taxonomy vocabulary file (default: packaged)")
    p.add_argument("--build-timestamp", type=int, help="freeze the build timestamp")
    p.set_defaults(handler=cmd_build_graph)

    p = sub.add_parser("analyze", help="corpus characterization reports")
    p.add_argument("--graph", required=True, help="snapshot path")
    p.add_argument("--report", required=True,
                   choices=["usage", "top-usage", "keywords", "availability"])
    p.add_argument("--format", choices=["tsv", "table"], default="table")
    p.add_argument("--scope", choices=["all", "registry"], default="all")
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--total-scripts", type=int, help="denominator for top-usage percentages")
    p.add_argument("--scan", help="scan result (alternative source of --total-scripts)")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("recommend", help="rank packages for a user story")
    p.add_argument("--graph", required=True, help="snapshot path")
    p.add_argument("--story", required=True, help="user story text")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--exclude-vulnerable", action="store_true")
    p.add_argument("--min-quality", type=float)
    p.add_argument("--runtime", help="runtime version the project targets, e.g. 3.11")
    p.add_argument("--format", choices=["table", "json"], default="table")
    _add_scoring_flags(p)
    p.set_defaults(handler=cmd_recommend)

    p = sub.add_parser("eval", help="evaluation metrics over labeled files")
    p.add_argument("--input", required=True, help="TSV of (id, gold, predicted) or (id, a, b)")
    p.add_argument("--mode", choices=["classification", "paired"], required=True)
    p.add_argument("--positive-label", default="1")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--graph", required=True, help="snapshot path")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, help="default: PKGRAPH_PORT or 8080")
    _add_scoring_flags(p)
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO,
        format='{"level": "%(levelname)s", "logger": "%(name)s", "message": "%(message)s"}',
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        logger.error("bad configuration: %s", exc)
        return EXIT_BAD_CONFIG
    except (FileNotFoundError, SnapshotError, StagingError) as exc:
        logger.error("missing or unreadable input: %s", exc)
        return EXIT_MISSING_INPUT
    except PkgraphError as exc:
        logger.error("%s", exc)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
