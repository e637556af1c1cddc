"""Command-line interface.

Subcommands:

* ``discover``  - run BFS or pairwise discovery against a backend
* ``evaluate``  - score a predicted edge list against ground truth
* ``replay``    - rebuild a graph offline from a stored transcript
* ``stats``     - export the correlation matrix of a sample CSV
* ``fixtures``  - list (or copy out) the bundled benchmark files

Exit codes are stable and tested:

* 0 - success
* 2 - configuration or usage error (bad flags, missing files, cost guard)
* 3 - backend failure (auth, transport, malformed response)
* 4 - discovery finished but some queries never parsed (degraded result)
* 5 - invalid input data (node-set mismatch, corrupt transcript, bad file)

Config precedence for the remote backend: flags > config file (plain
``key=value`` lines) > environment (``CAUSALBFS_BASE_URL``,
``CAUSALBFS_MODEL``) > defaults.  The API key always comes from the
environment variable named by ``--api-key-env`` (default ``LLM_API_KEY``)
and is never written to any output file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .backends import (
    AuthenticationError,
    BackendError,
    HttpChatBackend,
    HttpConfig,
    OracleBackend,
    OracleConfig,
    ResponseCache,
    TranscriptError,
)
from .dataset import (
    DatasetError,
    fixture_path,
    list_fixtures,
    load_digraph,
    load_ground_truth,
    load_metadata,
    load_samples,
)
from .discovery import (
    BFS_METHOD,
    DiscoveryError,
    DiscoveryRun,
    PAIRWISE_METHOD,
    RunPolicy,
    acyclify_edges,
    discover_bfs,
    discover_pairwise,
    query_budget,
    replay_transcript,
)
from .evaluation import NodeSetMismatchError, evaluate, render_report_table
from .prompting import load_templates
from .stats import correlation_matrix

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_PARSE = 4
EXIT_DATA = 5


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read_config_file(path: str | None) -> dict[str, str]:
    """Parse a plain key=value config file ('#' starts a comment)."""
    if not path:
        return {}
    file = Path(path)
    if not file.is_file():
        raise CliError(f"config file not found: {path}", EXIT_CONFIG)
    values = {}
    for lineno, raw in enumerate(file.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}: line {lineno}: expected key=value", EXIT_CONFIG)
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _http_config(args) -> HttpConfig:
    file_cfg = _read_config_file(args.config)
    def pick(flag_value, file_key, env_key, default):
        if flag_value is not None:
            return flag_value
        if file_key in file_cfg:
            return file_cfg[file_key]
        if env_key and os.environ.get(env_key):
            return os.environ[env_key]
        return default
    defaults = HttpConfig()
    try:
        return HttpConfig(
            base_url=pick(args.base_url, "base_url", "CAUSALBFS_BASE_URL", defaults.base_url),
            model_id=pick(args.model, "model_id", "CAUSALBFS_MODEL", defaults.model_id),
            temperature=float(pick(args.temperature, "temperature", None, defaults.temperature)),
            seed=args.seed,
            api_key_env=pick(args.api_key_env, "api_key_env", None, defaults.api_key_env),
            max_retries=int(pick(args.max_retries, "max_retries", None, defaults.max_retries)),
            timeout=float(pick(args.timeout, "timeout", None, defaults.timeout)),
        )
    except ValueError as exc:
        raise CliError(f"bad backend configuration: {exc}", EXIT_CONFIG) from exc


def _resolve_file(value: str) -> Path:
    """Accept a real path or the name of a bundled fixture."""
    path = Path(value)
    if path.is_file():
        return path
    try:
        return fixture_path(value)
    except FileNotFoundError:
        raise CliError(f"file not found: {value}", EXIT_CONFIG) from None


def _make_backend(args, truth):
    if args.backend == "api":
        cache = ResponseCache(args.cache_dir) if args.cache_dir else None
        return HttpChatBackend(_http_config(args), cache=cache)
    if truth is None:
        raise CliError("oracle backends need --truth", EXIT_CONFIG)
    if args.backend == "oracle":
        config = OracleConfig(truth=truth, rng_seed=args.seed or 0)
    else:
        config = OracleConfig(
            truth=truth,
            false_negative_rate=args.fn_rate,
            false_positive_rate=args.fp_rate,
            rng_seed=args.seed or 0,
        )
    return OracleBackend(config)


def _run_dir(out: str, run_name: str | None, method: str) -> Path:
    base = Path(out)
    base.mkdir(parents=True, exist_ok=True)
    name = run_name or time.strftime("%Y%m%d-%H%M%S") + f"-{method}"
    run = base / name
    suffix = 1
    while run.exists():
        suffix += 1
        run = base / f"{name}-{suffix}"
    run.mkdir()
    (base / "latest").write_text(run.name + "\n", encoding="utf-8")
    return run


def _summary_dict(run: DiscoveryRun, args, n: int) -> dict:
    return {
        "method": run.method,
        "n": n,
        "query_counts": run.query_counts.to_dict(),
        "wall_time_s": round(run.wall_time_s, 6),
        "edges": len(run.graph.edges),
        "visit_order": run.frontier_trace,
        "parse_failures": run.parse_failures,
        "config": {
            "backend": args.backend,
            "model": args.model,
            "temperature": args.temperature,
            "seed": args.seed,
            "samples": args.samples,
            "fuzzy": args.fuzzy,
            "acyclify": getattr(args, "acyclify", False),
        },
    }


def cmd_discover(args) -> int:
    vars = load_metadata(_resolve_file(args.vars))
    truth = None
    if args.truth:
        truth = load_ground_truth(_resolve_file(args.truth), vars)
    elif args.backend != "api" or args.eval:
        raise CliError("--truth is required for oracle backends and --eval", EXIT_CONFIG)
    stats = None
    if args.samples:
        table = load_samples(_resolve_file(args.samples), vars)
        if set(table.variable_names) != set(vars.names):
            raise CliError("sample columns do not cover the variable set", EXIT_DATA)
        stats = correlation_matrix(table)

    n = len(vars)
    budget = query_budget(args.method, n)
    policy = RunPolicy(
        max_parse_retries=args.max_parse_retries,
        max_concurrency=args.concurrency,
        cost_confirm_threshold=args.cost_confirm_threshold,
        seed=args.seed or 0,
        fuzzy_matching=args.fuzzy,
        repeat_descriptions=args.repeat_descriptions,
    )
    if args.backend == "api" and budget > policy.cost_confirm_threshold and not args.yes:
        raise CliError(
            f"refusing to launch {budget} remote queries for {n} variables "
            f"(threshold {policy.cost_confirm_threshold}); pass --yes to confirm",
            EXIT_CONFIG,
        )

    backend = _make_backend(args, truth)
    templates = load_templates(args.templates) if args.templates else None
    run_dir = _run_dir(args.out, args.run_name, args.method)
    transcript = run_dir / "transcript.jsonl"
    try:
        if args.method == BFS_METHOD:
            run = discover_bfs(
                backend, vars, stats=stats, policy=policy,
                transcript_path=transcript, templates=templates,
            )
        else:
            run = discover_pairwise(
                backend, vars, corr=stats, policy=policy,
                transcript_path=transcript, templates=templates,
            )
    except DiscoveryError as exc:
        (run_dir / "edges.txt").write_text(exc.partial.graph.to_edge_list(), encoding="utf-8")
        raise CliError(f"{exc} (partial results in {run_dir})", EXIT_BACKEND) from exc

    graph = run.graph
    if args.method == PAIRWISE_METHOD and args.acyclify:
        graph = acyclify_edges(graph)
    (run_dir / "edges.txt").write_text(graph.to_edge_list(), encoding="utf-8")
    (run_dir / "graph.dot").write_text(graph.to_dot(), encoding="utf-8")
    summary = _summary_dict(run, args, n)
    report = None
    if args.eval:
        report = evaluate(graph, truth)
        summary["evaluation"] = json.loads(report.to_json())
        (run_dir / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    (run_dir / "summary.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8"
    )

    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        counts = run.query_counts
        print(f"{run.method} run over {n} variables -> {len(graph.edges)} edges in {run_dir}")
        print(
            f"queries: init {counts.init}, expansion {counts.expansion}, "
            f"pairwise {counts.pairwise}, retries {counts.retries}"
        )
        if report is not None:
            print(render_report_table([(run.method, report)]), end="")
    if run.parse_failures:
        print(f"warning: unparsed queries for {run.parse_failures}", file=sys.stderr)
        return EXIT_PARSE
    return EXIT_OK


def cmd_evaluate(args) -> int:
    vars = load_metadata(_resolve_file(args.vars))
    truth = load_ground_truth(_resolve_file(args.truth), vars)
    predicted = load_digraph(_resolve_file(args.predicted), vars)
    report = evaluate(predicted, truth)
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")
    if args.json:
        print(report.to_json())
    else:
        print(render_report_table([(Path(args.predicted).name, report)]), end="")
    return EXIT_OK


def cmd_replay(args) -> int:
    vars = load_metadata(_resolve_file(args.vars))
    run = replay_transcript(_resolve_file(args.transcript), vars, fuzzy=args.fuzzy)
    edge_list = run.graph.to_edge_list()
    if args.out:
        Path(args.out).write_text(edge_list, encoding="utf-8")
    if args.json:
        print(json.dumps({
            "method": run.method,
            "edges": [list(e) for e in run.graph.edges],
            "query_counts": run.query_counts.to_dict(),
        }, indent=2))
    else:
        print(edge_list, end="")
    return EXIT_OK


def cmd_stats(args) -> int:
    vars = load_metadata(_resolve_file(args.vars))
    table = load_samples(_resolve_file(args.samples), vars)
    matrix = correlation_matrix(table)
    if args.out:
        Path(args.out).write_text(matrix.to_csv_text(), encoding="utf-8")
    if args.json:
        print(json.dumps({
            "variable_names": list(matrix.variable_names),
            "values": matrix.values,
        }, indent=2))
    elif not args.out:
        print(matrix.to_csv_text(), end="")
    return EXIT_OK


def cmd_fixtures(args) -> int:
    names = list_fixtures()
    if args.copy_to:
        destination = Path(args.copy_to)
        destination.mkdir(parents=True, exist_ok=True)
        for name in names:
            (destination / name).write_bytes(fixture_path(name).read_bytes())
        print(f"copied {len(names)} fixture files to {destination}")
        return EXIT_OK
    if args.json:
        print(json.dumps({name: str(fixture_path(name)) for name in names}, indent=2))
    else:
        for name in names:
            print(f"{name}\t{fixture_path(name)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalbfs",
        description="Causal DAG discovery via breadth-first chat queries.",
    )
    parser.add_argument("--version", action="version", version=f"causalbfs {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("discover", help="run a discovery method against a backend")
    d.add_argument("--method", choices=[BFS_METHOD, PAIRWISE_METHOD], default=BFS_METHOD)
    d.add_argument("--backend", choices=["api", "oracle", "noisy-oracle"], default="oracle")
    d.add_argument("--vars", required=True, help="metadata JSON (path or fixture name)")
    d.add_argument("--truth", help="ground-truth edge list (oracle backends, --eval)")
    d.add_argument("--samples", help="sample CSV; enables correlation injection")
    d.add_argument("--out", default="runs", help="parent directory for run outputs")
    d.add_argument("--run-name", help="run directory name (default: timestamp)")
    d.add_argument("--eval", action="store_true", help="score the result against --truth")
    d.add_argument("--json", action="store_true", help="print the summary as JSON")
    d.add_argument("--yes", action="store_true", help="confirm runs above the cost threshold")
    d.add_argument("--acyclify", action="store_true",
                   help="pairwise only: greedily drop later cycle-closing edges")
    d.add_argument("--fuzzy", action="store_true",
                   help="also match unique case-insensitive name prefixes")
    d.add_argument("--repeat-descriptions", action="store_true",
                   help="re-include variable descriptions in every expansion prompt")
    d.add_argument("--model", help="remote model id")
    d.add_argument("--temperature", type=float)
    d.add_argument("--seed", type=int)
    d.add_argument("--fn-rate", type=float, default=0.0, help="noisy oracle: drop rate")
    d.add_argument("--fp-rate", type=float, default=0.0, help="noisy oracle: add rate")
    d.add_argument("--base-url", help="chat-completions endpoint base URL")
    d.add_argument("--api-key-env", help="environment variable holding the API key")
    d.add_argument("--max-retries", type=int, help="transport retry budget")
    d.add_argument("--timeout", type=float, help="request timeout in seconds")
    d.add_argument("--max-parse-retries", type=int, default=2)
    d.add_argument("--concurrency", type=int, default=1, help="pairwise dispatch width")
    d.add_argument("--cost-confirm-threshold", type=int, default=500)
    d.add_argument("--cache-dir", help="content-addressed reply cache directory")
    d.add_argument("--templates", help="prompt template override directory")
    d.add_argument("--config", help="key=value config file")
    d.set_defaults(func=cmd_discover)

    e = sub.add_parser("evaluate", help="score a predicted edge list")
    e.add_argument("--predicted", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--vars", required=True)
    e.add_argument("--out", help="write the JSON report here")
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("replay", help="rebuild a graph from a transcript, offline")
    r.add_argument("--transcript", required=True)
    r.add_argument("--vars", required=True)
    r.add_argument("--out", help="write the edge list here")
    r.add_argument("--fuzzy", action="store_true")
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_replay)

    s = sub.add_parser("stats", help="export a correlation matrix as CSV")
    s.add_argument("--vars", required=True)
    s.add_argument("--samples", required=True)
    s.add_argument("--out")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_stats)

    f = sub.add_parser("fixtures", help="list or copy the bundled benchmark files")
    f.add_argument("--copy-to", help="copy all fixture files into this directory")
    f.add_argument("--json", action="store_true")
    f.set_defaults(func=cmd_fixtures)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except AuthenticationError as exc:
        print(f"error: authentication failed: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except BackendError as exc:
        print(f"error: backend failure: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (DatasetError, NodeSetMismatchError, TranscriptError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
