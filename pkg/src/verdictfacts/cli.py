"""Command-line entry point wiring all stages together.

Subcommands: ingest, fetch, markers mine, extract, evaluate,
fixtures generate, report.  All interchange files are JSON or JSONL with the
schemas documented in the README.  Errors leave with exit code 1 and a single
machine-parsable JSON line on stderr; usage problems exit with code 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import config as config_mod
from .evaluate import (
    compare_all,
    hallucination_report,
    load_gold,
    method_report,
    render_band_table,
    render_hallucination_table,
    render_method_table,
    MatchBand,
    MethodReport,
)
from .fixtures import (
    FixtureCorpus,
    FixtureSpec,
    MutationBand,
    ReplayBehavior,
    generate_corpus,
    generate_replay,
    hallucination_pairs,
    write_corpus_dir,
)
from .ingest import (
    HttpRetriever,
    IngestError,
    StubRetriever,
    coverage_report,
    fetch_missing,
    link_corpus,
    load_admin_records,
    load_dump,
    unmatched_records,
)
from .llm import write_replay_records
from .markers import (
    candidates_to_json,
    default_marker_set,
    load_marker_set,
    mine_marker_candidates,
)
from .pipeline import PipelineConfig, load_results, run_corpus
from .reporting import render_table
from .rules import Method


class CliError(Exception):
    """Fatal command error with a clean one-line message."""


def _corpus_path(path_arg: str) -> Path:
    path = Path(path_arg)
    if path.is_dir():
        candidate = path / "corpus.jsonl"
        if not candidate.exists():
            raise CliError(f"no corpus.jsonl inside directory {path}")
        return candidate
    if not path.exists():
        raise CliError(f"corpus {path} does not exist")
    return path


def _load_markers(path_arg: str | None, config: dict):
    path = path_arg or config["markers"]["path"]
    return load_marker_set(path) if path else default_marker_set()


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _cmd_ingest(args, config: dict) -> int:
    year_range = (config["ingest"]["year_min"], config["ingest"]["year_max"])
    docs, stats = load_dump(args.dump, year_range)
    admin = load_admin_records(args.admin)
    report, pairs = link_corpus(docs, admin)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "linkage.json", report.to_dict())
    table = coverage_report(report, config["ingest"]["coverage_thresholds"])
    (out / "coverage.txt").write_text(table + "\n", encoding="utf-8")
    with open(out / "unmatched.csv", "w", encoding="utf-8") as sink:
        sink.write("docket_number,court_name,decision_year\n")
        for record in unmatched_records(docs, admin):
            sink.write(f"{record.docket_number},{record.court_name},{record.decision_year}\n")
    print(table)
    print(json.dumps({
        "parsed": stats.parsed, "corrupt": stats.corrupt,
        "out_of_range": stats.out_of_range, "duplicate_ids": stats.duplicate_ids,
        "matched": len(pairs),
    }, sort_keys=True))
    return 0


def _cmd_fetch(args, config: dict) -> int:
    unmatched = load_admin_records(args.unmatched)
    if args.stub_responses:
        scripted = json.loads(Path(args.stub_responses).read_text(encoding="utf-8"))
        retriever = StubRetriever({
            (row["docket"], row["court"]): row["text"] for row in scripted
        })
    else:
        endpoint = args.endpoint or config["fetch"]["endpoint"]
        if not endpoint:
            raise CliError("an --endpoint (or fetch.endpoint in the config) is required")
        retriever = HttpRetriever(
            endpoint,
            timeout=config["fetch"]["timeout"],
            request_interval=config["fetch"]["request_interval"],
            api_key=config_mod.api_key_from_env(),
        )
    max_retries = args.max_retries if args.max_retries is not None else config["fetch"]["max_retries"]
    docs, failures = fetch_missing(unmatched, retriever, max_retries=max_retries,
                                   workers=config["fetch"]["workers"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "fetched.jsonl", "w", encoding="utf-8") as sink:
        for doc in docs:
            sink.write(json.dumps({
                "id": doc.doc_id, "court": doc.court_name, "docket": doc.docket_number,
                "year": doc.decision_year, "text": doc.raw_text, "source": doc.source,
            }, ensure_ascii=False, sort_keys=True) + "\n")
    _write_json(out / "fetch_failures.json",
                [{"docket_number": f.docket_number, "court_name": f.court_name,
                  "reason": f.reason} for f in failures])
    print(json.dumps({"fetched": len(docs), "failed": len(failures)}, sort_keys=True))
    return 0


def _cmd_markers_mine(args, config: dict) -> int:
    docs, _ = load_dump(_corpus_path(args.corpus),
                        (config["ingest"]["year_min"], config["ingest"]["year_max"]))
    if not docs:
        raise CliError("corpus is empty")
    candidates = mine_marker_candidates(docs)
    Path(args.out).write_text(candidates_to_json(candidates) + "\n", encoding="utf-8")
    print(json.dumps({"documents": len(docs), "candidates": len(candidates)}, sort_keys=True))
    return 0


def _cmd_extract(args, config: dict) -> int:
    docs, _ = load_dump(_corpus_path(args.corpus),
                        (config["ingest"]["year_min"], config["ingest"]["year_max"]))
    markers = _load_markers(args.markers, config)
    overrides = {"provider.replay_path": args.replay, "pipeline.ground_threshold": args.ground_threshold}
    if args.replay:
        overrides["provider.backend"] = "replay"
    config = config_mod.apply_overrides(config, overrides)
    provider = config_mod.make_provider(config)
    pipeline_config = PipelineConfig(
        markers=markers,
        provider_config=config_mod.provider_config_from(config),
        ground_threshold=config["pipeline"]["ground_threshold"],
        concurrency=config["pipeline"]["concurrency"],
        method=Method(args.method),
    )
    summary = run_corpus(docs, pipeline_config, provider, args.out, resume=args.resume)
    print(json.dumps(summary.to_dict(), sort_keys=True))
    return 0


def _cmd_evaluate(args, config: dict) -> int:
    outcomes = load_results(args.results)
    if not outcomes:
        raise CliError(f"no results in {args.results}")
    gold = load_gold(args.gold)
    comparisons = compare_all(outcomes, gold)
    method = outcomes[0].method.value
    report = method_report(method, comparisons)
    payload = report.to_dict()
    if args.out:
        _write_json(Path(args.out), payload)
    print(render_method_table([report]))
    print()
    print(render_band_table(report))
    return 0


def _cmd_fixtures_generate(args, config: dict) -> int:
    spec = FixtureSpec.from_json(args.spec)
    corpus = generate_corpus(spec)
    paths = write_corpus_dir(corpus, args.out)
    behavior = ReplayBehavior(args.perfect, args.mutated, args.refuse,
                              mutation_mode=args.mutation_mode)
    records = generate_replay(corpus, behavior)
    replay_path = Path(args.out) / "replay.jsonl"
    write_replay_records(replay_path, records)
    print(json.dumps({
        "documents": len(corpus.docs),
        "corpus": str(paths["corpus"]),
        "gold": str(paths["gold"]),
        "manifest": str(paths["manifest"]),
        "replay": str(replay_path),
    }, sort_keys=True))
    return 0


def _cmd_report(args, config: dict) -> int:
    printed = False
    if args.linkage:
        payload = json.loads(Path(args.linkage).read_text(encoding="utf-8"))
        rows = [
            ("dump (direct match)", payload["matched_dump"]),
            ("api re-download", payload["matched_api"]),
            ("linked total", payload["matched_dump"] + payload["matched_api"]),
            ("not linked", payload["unmatched"]),
        ]
        total = payload["total_admin"]
        from .reporting import format_percent

        print(render_table(
            ["linkage step", "n cases", f"% of {total}"],
            [(label, n, format_percent(n, total)) for label, n in rows],
            title="registry coverage",
        ))
        printed = True
    if args.evaluation:
        payload = json.loads(Path(args.evaluation).read_text(encoding="utf-8"))
        band_counts = {MatchBand(k): v for k, v in payload["band_counts"].items()}
        report = MethodReport(
            method=payload["method"], n=payload["n"],
            extraction_rate=payload["extraction_rate"],
            quality_ge_95=payload["quality_ge_95"],
            band_counts=band_counts,
            correct_absences=payload.get("correct_absences", 0),
            mean_score=payload.get("mean_score"),
        )
        print(render_method_table([report]))
        print()
        print(render_band_table(report))
        printed = True
    if not printed:
        raise CliError("nothing to report: pass --linkage and/or --evaluation")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="verdictfacts",
        description="Extract verbatim factual statements from court-decision corpora.",
    )
    parser.add_argument("--config", help="JSON config file merged over built-in defaults")
    parser.add_argument("--print-config", action="store_true",
                        help="print the effective configuration and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("ingest", help="parse a dump, link it to the registry, report coverage")
    p.add_argument("--dump", required=True)
    p.add_argument("--admin", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("fetch", help="retrieve unmatched registry records via the API client")
    p.add_argument("--unmatched", required=True)
    p.add_argument("--endpoint")
    p.add_argument("--max-retries", type=int, dest="max_retries")
    p.add_argument("--stub-responses", dest="stub_responses",
                   help="JSON list of {docket, court, text} served instead of HTTP")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fetch)

    p_markers = sub.add_parser("markers", help="marker inventory commands")
    markers_sub = p_markers.add_subparsers(dest="markers_command")
    p = markers_sub.add_parser("mine", help="mine letter-spaced marker candidates from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_markers_mine)

    p = sub.add_parser("extract", help="run an extraction method over a corpus")
    p.add_argument("--method", required=True,
                   choices=[m.value for m in Method])
    p.add_argument("--corpus", required=True)
    p.add_argument("--markers")
    p.add_argument("--replay", help="replay fixture; implies the replay provider backend")
    p.add_argument("--ground-threshold", type=float, dest="ground_threshold")
    p.add_argument("--out", required=True)
    p.add_argument("--resume", action="store_true")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("evaluate", help="score results against gold annotations")
    p.add_argument("--results", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_evaluate)

    p_fixtures = sub.add_parser("fixtures", help="synthetic corpus commands")
    fixtures_sub = p_fixtures.add_subparsers(dest="fixtures_command")
    p = fixtures_sub.add_parser("generate", help="generate a synthetic corpus with gold and replay")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--perfect", type=float, default=1.0)
    p.add_argument("--mutated", type=float, default=0.0)
    p.add_argument("--refuse", type=float, default=0.0)
    p.add_argument("--mutation-mode", dest="mutation_mode", default="boundary",
                   choices=["boundary", "edits"])
    p.set_defaults(func=_cmd_fixtures_generate)

    p = sub.add_parser("report", help="render saved reports as plain-text tables")
    p.add_argument("--linkage")
    p.add_argument("--evaluation")
    p.set_defaults(func=_cmd_report)

    return parser


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_mod.load_config(args.config)
        overrides = {}
        threshold = getattr(args, "ground_threshold", None)
        if threshold is not None:
            overrides["pipeline.ground_threshold"] = threshold
        config = config_mod.apply_overrides(config, overrides)
        if args.print_config:
            print(config_mod.render_config(config))
            return 0
        if not getattr(args, "func", None):
            parser.print_usage(sys.stderr)
            return 2
        return args.func(args, config)
    except (CliError, config_mod.ConfigError, IngestError, FileExistsError,
            FileNotFoundError, ValueError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
