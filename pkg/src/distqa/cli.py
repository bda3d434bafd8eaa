"""Command-line entry point: ``distqa {assess,gen,check,bench-sizeup,bench-speedup}``.

Assessment configuration is a JSON object with the optional keys
``metrics`` (list of ids), ``metric_files`` (DSL files), ``context``
(evaluation-context overrides), ``workers``, ``partition_count``, ``mode``,
``executor``, ``timeout``, ``dqv_base`` and ``dataset_iri``. Command-line
flags take precedence over the file.

Exit codes: 0 success, 1 configuration error or failed metric,
2 parse failure in strict mode (and argparse usage errors), 3 timeout.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import platform
import sys
import time

from . import __version__
from .bench import (
    SIZEUP_HEADER,
    SPEEDUP_HEADER,
    bench_sizeup,
    bench_speedup,
    generated_context,
    linear_fit,
    write_csv,
)
from .dqv import write_dqv
from .dsl import DslError, load_metric_file
from .engine import PER_METRIC, SHARED_SCAN, AssessmentConfig, AssessmentTimeout, assess
from .generator import GeneratorProfile, ProfileError, generate_file
from .metrics import UnknownMetricError, custom_definition, registry_lookup
from .qap.context import ConfigurationError, EvaluationContext
from .rdf import SKIP, STRICT, ParseError, parse_dataset

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARSE = 2
EXIT_TIMEOUT = 3

CONFIG_KEYS = {
    "metrics",
    "metric_files",
    "context",
    "workers",
    "partition_count",
    "mode",
    "executor",
    "timeout",
    "dqv_base",
    "dataset_iri",
}
RESULT_HEADER = ("metric", "value", "kind", "flags", "wall_time", "rule_evaluations", "error")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read config {path}: {e}") from None
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    return data


def _resolve_metrics(items: list[str], files: list[str]) -> list:
    """Turn ids and DSL file paths into metric definitions."""
    out = []
    for item in items:
        if os.path.isfile(item):
            files = [*files, item]
            continue
        try:
            out.append(registry_lookup(item))
        except UnknownMetricError as e:
            raise ConfigurationError(str(e.args[0])) from None
    for path in files:
        try:
            sources = load_metric_file(path)
        except OSError as e:
            raise ConfigurationError(f"cannot read metric file {path}: {e}") from None
        out.extend(custom_definition(s.name, s.expr, s.description) for s in sources)
    return out


def _build_config(args) -> tuple[AssessmentConfig, dict]:
    data = _load_config(args.config)
    if args.metrics is not None:
        metric_spec = [m.strip() for m in args.metrics.split(",") if m.strip()]
        metric_files = []
    else:
        metric_spec = list(data.get("metrics", []))
        metric_files = list(data.get("metric_files", []))
    metrics = _resolve_metrics(metric_spec, metric_files)
    if not metrics:
        raise ConfigurationError("no metrics requested")

    context_data = dict(data.get("context", {}))
    if args.internal_prefix:
        context_data["internal_prefixes"] = args.internal_prefix
    ctx = EvaluationContext.from_dict(context_data)

    workers = args.workers if args.workers is not None else data.get("workers", 1)
    config = AssessmentConfig(
        metrics=metrics,
        context=ctx,
        workers=workers,
        partition_count=data.get("partition_count"),
        mode=args.mode or data.get("mode", PER_METRIC),
        executor=data.get("executor", "auto"),
        timeout=args.timeout if args.timeout is not None else data.get("timeout"),
        emit_dqv=bool(args.dqv),
        dqv_base=data.get("dqv_base", AssessmentConfig.dqv_base),
        dataset_iri=data.get("dataset_iri"),
        timestamp=args.timestamp,
    )
    snapshot = {
        "metrics": [m.id for m in metrics],
        "metric_files": metric_files,
        "context": ctx.to_dict(),
        "workers": config.workers,
        "partition_count": config.partition_count,
        "mode": config.mode,
        "executor": config.executor,
        "timeout": config.timeout,
        "strict": args.strict,
    }
    return config, snapshot


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def _result_rows(report):
    for r in report.results:
        yield (
            r.metric_id,
            _fmt(r.value),
            r.value_kind,
            ";".join(sorted(r.flags)),
            repr(r.wall_time),
            r.rule_evaluations,
            r.error or "",
        )


def _result_json(report) -> list[dict]:
    return [
        {
            "metric": r.metric_id,
            "value": r.value,
            "kind": r.value_kind,
            "flags": sorted(r.flags),
            "action_counts": r.action_counts,
            "wall_time": r.wall_time,
            "rule_evaluations": r.rule_evaluations,
            "extras": r.extras,
            "error": r.error,
        }
        for r in report.results
    ]


def _write_results(report, out: str | None) -> None:
    if out and out.endswith(".json"):
        with open(out, "w", encoding="utf-8") as fh:
            json.dump({"results": _result_json(report)}, fh, indent=2)
            fh.write("\n")
        return
    fh = open(out, "w", encoding="utf-8", newline="") if out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_HEADER)
        writer.writerows(_result_rows(report))
    finally:
        if out:
            fh.close()


def _run_manifest(args, snapshot, d, report, parse_time) -> dict:
    return {
        "tool": "distqa",
        "version": __version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "python": platform.python_version(),
        "config": snapshot,
        "dataset": {
            "path": os.path.abspath(args.input),
            "triples": len(d),
            "distinct_triples": d.distinct_count(),
            "lines_skipped": d.report.lines_skipped,
        },
        "workers": report.workers,
        "partition_count": report.partition_count,
        "mode": report.mode,
        "parse_time": parse_time,
        "eval_time": report.eval_time,
        "wall_times": {r.metric_id: r.wall_time for r in report.results},
        "outputs": {"results": args.out, "dqv": args.dqv},
    }


def cmd_assess(args) -> int:
    try:
        config, snapshot = _build_config(args)
    except (ConfigurationError, DslError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    start = time.perf_counter()
    try:
        d = parse_dataset(args.input, STRICT if args.strict else SKIP)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as e:
        print(f"cannot read input: {e}", file=sys.stderr)
        return EXIT_CONFIG
    parse_time = time.perf_counter() - start
    if d.report.lines_skipped:
        print(d.report.summary(), file=sys.stderr)

    try:
        report = assess(config, d)
    except ConfigurationError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except AssessmentTimeout as e:
        print(f"timeout: {e}", file=sys.stderr)
        return EXIT_TIMEOUT

    _write_results(report, args.out)
    if args.dqv:
        write_dqv(report.dqv or [], args.dqv)
    manifest_path = args.manifest or (f"{args.out}.manifest.json" if args.out else None)
    if manifest_path:
        with open(manifest_path, "w", encoding="utf-8") as fh:
            json.dump(_run_manifest(args, snapshot, d, report, parse_time), fh, indent=2)
            fh.write("\n")

    failed = [r for r in report.results if not r.ok]
    for r in failed:
        print(f"{r.metric_id}: {r.error}", file=sys.stderr)
    return EXIT_CONFIG if failed else EXIT_OK


def cmd_gen(args) -> int:
    profile = GeneratorProfile(
        seed=args.seed,
        n_triples=args.n,
        fraction_external_links=args.fraction_external_links,
        fraction_literals=args.fraction_literals,
        fraction_malformed_typed_literals=args.fraction_malformed,
        include_license=not args.no_license,
        long_uri_fraction=args.long_uri_fraction,
    )
    try:
        info = generate_file(profile, args.out, args.manifest)
    except ProfileError as e:
        print(f"invalid profile: {e}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(info["expected"], sort_keys=True))
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        d = parse_dataset(args.input, STRICT if args.strict else SKIP)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as e:
        print(f"cannot read input: {e}", file=sys.stderr)
        return EXIT_CONFIG
    print(d.report.summary())
    for line_no, category, message in d.report.errors[: args.max_errors]:
        print(f"line {line_no}: {category}: {message}")
    return EXIT_OK


def _open_out(path: str | None):
    return open(path, "w", encoding="utf-8", newline="") if path else sys.stdout


def cmd_bench_sizeup(args) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    rows = bench_sizeup(args.sizes, metrics, args.workers, args.runs, args.seed)
    fh = _open_out(args.out)
    try:
        write_csv(SIZEUP_HEADER, rows, fh)
    finally:
        if args.out:
            fh.close()
    if len(rows) >= 2:
        _, _, r2 = linear_fit([r.size for r in rows], [r.mean_time for r in rows])
        ratio = rows[-1].mean_time / rows[0].mean_time
        print(f"R^2={r2:.4f} time ratio largest/smallest={ratio:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_bench_speedup(args) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    if args.input:
        d = parse_dataset(args.input)
        ctx = EvaluationContext(internal_prefixes=tuple(args.internal_prefix)) if args.internal_prefix else None
    else:
        import tempfile

        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "speedup.nt")
            generate_file(GeneratorProfile(seed=args.seed, n_triples=args.size), path)
            d = parse_dataset(path)
        ctx = generated_context()
    rows = bench_speedup(d, args.workers, metrics, ctx, args.runs)
    fh = _open_out(args.out)
    try:
        write_csv(SPEEDUP_HEADER, rows, fh)
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="distqa", description="Pattern-based RDF quality assessment.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assess", help="evaluate metrics on an N-Triples file")
    p.add_argument("--input", required=True)
    p.add_argument("--metrics", help="comma-separated metric ids and/or metric DSL files")
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--workers", type=int)
    p.add_argument("--mode", choices=(PER_METRIC, SHARED_SCAN))
    p.add_argument("--internal-prefix", action="append", default=[], help="namespace of internal resources")
    p.add_argument("--dqv", help="write DQV measurements (N-Triples) here")
    p.add_argument("--out", help="results file; .json for JSON, CSV otherwise (default: CSV on stdout)")
    p.add_argument("--manifest", help="run manifest path (default: <out>.manifest.json)")
    p.add_argument("--strict", action="store_true", help="fail on the first malformed line")
    p.add_argument("--timeout", type=float)
    p.add_argument("--timestamp", help="fixed xsd:dateTime for DQV output")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("gen", help="generate a synthetic dataset with known metric values")
    p.add_argument("--out", required=True)
    p.add_argument("--manifest")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--fraction-external-links", type=float, default=0.1)
    p.add_argument("--fraction-literals", type=float, default=0.3)
    p.add_argument("--fraction-malformed", type=float, default=0.05)
    p.add_argument("--long-uri-fraction", type=float, default=0.01)
    p.add_argument("--no-license", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check", help="parse only and report malformed lines")
    p.add_argument("--input", required=True)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--max-errors", type=int, default=20)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench-sizeup", help="evaluation time against dataset size")
    p.add_argument("--sizes", type=_int_list, required=True, help="ascending, e.g. 1000000,2000000,4000000")
    p.add_argument("--metrics", default="L1,I2,RC1")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench_sizeup)

    p = sub.add_parser("bench-speedup", help="evaluation time against worker count")
    p.add_argument("--workers", type=_int_list, default=[1, 2, 4])
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input")
    src.add_argument("--size", type=int, default=5_000_000, help="generate a dataset of this many triples")
    p.add_argument("--internal-prefix", action="append", default=[])
    p.add_argument("--metrics", default="L1,I2,RC1")
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench_speedup)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == "bench-sizeup":
        if not args.sizes:
            parser.error("--sizes needs at least one size")
        if args.sizes != sorted(args.sizes):
            parser.error("--sizes must be ascending")
    if args.command == "bench-speedup" and not args.workers:
        parser.error("--workers needs at least one count")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
