"""Staged extraction over corpora: tolerant rules first, grounded LLM fallback.

The cascade is fixed: the rule stage runs on every document and the provider
is called only for documents the rules could not handle.  Grounding on the
LLM path is mandatory and not configurable; a candidate that cannot be
aligned to the source above the threshold is a failure, not a result.

Corpus runs write one JSONL record per document, append-only and keyed by
doc_id, so an interrupted run can resume and produce a byte-identical file.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .align import ground
from .llm import (
    STATUS_OK,
    STATUS_SAFETY,
    STATUS_TOKEN_LIMIT,
    GenerationProvider,
    OutputParseError,
    ProviderConfig,
    llm_extract,
    parse_model_output,
    render_prompt,
)
from .markers import MarkerSet
from .rules import (
    CompiledMarkerSet,
    ExtractionOutcome,
    Method,
    Status,
    advanced_extract,
    baseline_extract,
    compile_marker_set,
    load_baseline_phrases,
)

logger = logging.getLogger(__name__)

DEFAULT_GROUND_THRESHOLD = 0.5


@dataclass(frozen=True)
class PipelineConfig:
    """Settings for a corpus extraction run."""

    markers: MarkerSet
    provider_config: ProviderConfig = ProviderConfig()
    ground_threshold: float = DEFAULT_GROUND_THRESHOLD
    concurrency: int = 1
    method: Method = Method.COMBINED

    def __post_init__(self) -> None:
        if not 0.0 <= self.ground_threshold <= 1.0:
            raise ValueError("ground_threshold must be in [0, 1]")
        if self.concurrency < 1:
            raise ValueError("concurrency must be >= 1")


def _llm_outcome(doc, markers: MarkerSet, provider: GenerationProvider,
                 method: Method, ground_threshold: float,
                 provider_config: ProviderConfig) -> ExtractionOutcome:
    rendered = render_prompt(doc, markers, max_doc_chars=provider_config.max_doc_chars)
    result = llm_extract(doc, rendered.text, provider,
                         max_retries=provider_config.max_retries)
    note = "; doc truncated for prompt budget" if rendered.doc_truncated else ""
    if result.status != STATUS_OK:
        return ExtractionOutcome(
            doc_id=doc.doc_id, method=method, status=Status.FAILED,
            diagnostics=f"llm: {result.status}{note}",
        )
    try:
        candidate = parse_model_output(result.raw_output)
    except OutputParseError as exc:
        return ExtractionOutcome(
            doc_id=doc.doc_id, method=method, status=Status.FAILED,
            diagnostics=f"llm: unparseable output ({exc}){note}",
        )
    if candidate is None:
        return ExtractionOutcome(
            doc_id=doc.doc_id, method=method, status=Status.NO_MATCH,
            diagnostics=f"llm: no factual statement reported{note}",
        )
    grounded = ground(candidate, doc.raw_text, ground_threshold)
    if grounded is None:
        return ExtractionOutcome(
            doc_id=doc.doc_id, method=method, status=Status.FAILED,
            diagnostics=f"llm: no sufficiently similar source span{note}",
        )
    return ExtractionOutcome(
        doc_id=doc.doc_id, method=method, status=Status.EXTRACTED,
        start_offset=grounded.start_offset, end_offset=grounded.end_offset,
        text=grounded.text, score=grounded.score,
        diagnostics=f"llm; grounded at {grounded.score:.4f}{note}",
    )


def extract_combined(doc, markers: MarkerSet | CompiledMarkerSet,
                     provider: GenerationProvider,
                     ground_threshold: float = DEFAULT_GROUND_THRESHOLD,
                     provider_config: ProviderConfig = ProviderConfig(),
                     ) -> ExtractionOutcome:
    """Rules first; the provider only sees documents the rules missed.

    Whatever path produced it, an extracted outcome's text is a verbatim
    substring of the document.
    """
    compiled = markers if isinstance(markers, CompiledMarkerSet) else compile_marker_set(markers)
    rule_outcome = advanced_extract(doc, compiled)
    if rule_outcome.status is Status.EXTRACTED:
        return ExtractionOutcome(
            doc_id=doc.doc_id, method=Method.COMBINED, status=Status.EXTRACTED,
            start_offset=rule_outcome.start_offset, end_offset=rule_outcome.end_offset,
            text=rule_outcome.text, score=1.0, diagnostics="rules",
        )
    base = compiled.markers
    return _llm_outcome(doc, base, provider, Method.COMBINED,
                        ground_threshold, provider_config)


@dataclass
class RunSummary:
    """Counts and cost accounting for one corpus run."""

    method: str
    n_docs: int = 0
    skipped_resume: int = 0
    by_status: dict[str, int] = field(default_factory=dict)
    provider_calls: int = 0
    llm_input_tokens: int = 0
    llm_output_tokens: int = 0
    llm_cost_usd: float = 0.0

    @property
    def extracted(self) -> int:
        return self.by_status.get(Status.EXTRACTED.value, 0)

    @property
    def extraction_rate(self) -> float:
        return self.extracted / self.n_docs if self.n_docs else 0.0

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n_docs": self.n_docs,
            "skipped_resume": self.skipped_resume,
            "by_status": dict(sorted(self.by_status.items())),
            "extracted": self.extracted,
            "extraction_rate": round(self.extraction_rate, 6),
            "provider_calls": self.provider_calls,
            "llm_input_tokens": self.llm_input_tokens,
            "llm_output_tokens": self.llm_output_tokens,
            "llm_cost_usd": round(self.llm_cost_usd, 8),
        }


class _CountingProvider:
    """Wraps a provider to count calls and accumulate token cost."""

    def __init__(self, inner: GenerationProvider, config: ProviderConfig):
        self.inner = inner
        self.config = config
        self.calls = 0
        self.input_tokens = 0
        self.output_tokens = 0

    def generate(self, prompt: str):
        self.calls += 1
        result = self.inner.generate(prompt)
        self.input_tokens += result.input_tokens
        self.output_tokens += result.output_tokens
        return result

    @property
    def cost_usd(self) -> float:
        return (self.input_tokens * self.config.input_usd_per_million_tokens
                + self.output_tokens * self.config.output_usd_per_million_tokens) / 1_000_000


def outcome_to_record(outcome: ExtractionOutcome) -> dict:
    return {
        "doc_id": outcome.doc_id,
        "method": outcome.method.value,
        "status": outcome.status.value,
        "start": outcome.start_offset,
        "end": outcome.end_offset,
        "text": outcome.text,
        "score": outcome.score,
        "diagnostics": outcome.diagnostics,
    }


def record_to_outcome(record: dict) -> ExtractionOutcome:
    return ExtractionOutcome(
        doc_id=record["doc_id"],
        method=Method(record["method"]),
        status=Status(record["status"]),
        start_offset=record.get("start"),
        end_offset=record.get("end"),
        text=record.get("text"),
        score=record.get("score"),
        diagnostics=record.get("diagnostics") or "",
    )


def load_results(path: str | Path) -> list[ExtractionOutcome]:
    outcomes = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                outcomes.append(record_to_outcome(json.loads(line)))
    return outcomes


def _scan_existing(path: Path) -> tuple[set[str], int]:
    """Completed doc_ids in a partial results file and the byte offset of the
    last intact line (a torn trailing line from a killed run is dropped)."""
    done: set[str] = set()
    good_end = 0
    with open(path, "rb") as handle:
        offset = 0
        for raw in handle:
            offset += len(raw)
            if not raw.endswith(b"\n"):
                break
            line = raw.decode("utf-8", errors="replace").strip()
            if not line:
                good_end = offset
                continue
            try:
                record = json.loads(line)
                done.add(record["doc_id"])
            except (ValueError, KeyError):
                break
            good_end = offset
    return done, good_end


def _make_extractor(config: PipelineConfig, provider: GenerationProvider,
                    ) -> Callable[[object], ExtractionOutcome]:
    compiled = compile_marker_set(config.markers)
    if config.method is Method.BASELINE:
        starts, ends = load_baseline_phrases()
        return lambda doc: baseline_extract(doc, starts, ends)
    if config.method is Method.ADVANCED:
        return lambda doc: advanced_extract(doc, compiled)
    if config.method is Method.LLM:
        return lambda doc: _llm_outcome(doc, config.markers, provider, Method.LLM,
                                        config.ground_threshold, config.provider_config)
    return lambda doc: extract_combined(doc, compiled, provider,
                                        config.ground_threshold, config.provider_config)


def run_corpus(docs: Sequence, config: PipelineConfig,
               provider: GenerationProvider,
               output_path: str | Path,
               resume: bool = False) -> RunSummary:
    """Extract every document, streaming one JSONL record per document.

    With ``resume=True`` documents already present in the output file are
    skipped and new records are appended after the last intact line, so a
    resumed run converges to the same bytes as an uninterrupted one.
    """
    path = Path(output_path)
    if path.exists() and not resume:
        raise FileExistsError(f"{path} exists; pass resume=True or remove it first")
    if path.parent != Path("") and not path.parent.exists():
        raise FileNotFoundError(f"output directory {path.parent} does not exist")

    done: set[str] = set()
    if resume and path.exists():
        done, good_end = _scan_existing(path)
        with open(path, "r+b") as handle:
            handle.truncate(good_end)

    counting = _CountingProvider(provider, config.provider_config)
    extract = _make_extractor(config, counting)
    summary = RunSummary(method=config.method.value)

    pending = [doc for doc in docs if doc.doc_id not in done]
    summary.skipped_resume = len(docs) - len(pending)
    summary.n_docs = len(docs)

    def run_one(doc) -> ExtractionOutcome:
        outcome = extract(doc)
        if not outcome.verify_verbatim(doc.raw_text):
            raise AssertionError(f"verbatim guarantee violated for {doc.doc_id}")
        return outcome

    with open(path, "a", encoding="utf-8") as sink:
        if config.concurrency == 1:
            results: Iterable[ExtractionOutcome] = map(run_one, pending)
            for outcome in results:
                _append(sink, outcome, summary)
        else:
            with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
                for outcome in pool.map(run_one, pending):  # order-preserving
                    _append(sink, outcome, summary)

    if done:
        for outcome in load_results(path):
            if outcome.doc_id in done:
                summary.by_status[outcome.status.value] = (
                    summary.by_status.get(outcome.status.value, 0) + 1
                )

    summary.provider_calls = counting.calls
    summary.llm_input_tokens = counting.input_tokens
    summary.llm_output_tokens = counting.output_tokens
    summary.llm_cost_usd = counting.cost_usd
    return summary


def _append(sink, outcome: ExtractionOutcome, summary: RunSummary) -> None:
    record = outcome_to_record(outcome)
    sink.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
    sink.flush()
    os.fsync(sink.fileno())
    summary.by_status[outcome.status.value] = summary.by_status.get(outcome.status.value, 0) + 1
