"""Corpus ingestion: dump parsing, registry linkage, retrieval of missing documents.

The decision dump is newline-delimited JSON, one self-contained record per
line with fields ``{id, court, docket, year, text}``.  The administrative
registry is a delimited text table (comma or tab, auto-detected) keyed by
docket number and court name.  Linkage joins the two on normalized keys and
accounts for every registry record: matched from the dump, matched from an
API re-download, or unmatched.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Protocol, Sequence

from .align import normalize_text
from .reporting import format_percent, render_table

logger = logging.getLogger(__name__)

DEFAULT_YEAR_RANGE = (2018, 2022)

SOURCE_DUMP = "dump"
SOURCE_API = "api_fetch"

REASON_NOT_FOUND = "not_found"
REASON_TRANSPORT = "transport_error"
REASON_RATE_LIMITED = "rate_limited"


class IngestError(Exception):
    """Unrecoverable ingestion problem (unreadable stream, bad registry)."""


@dataclass(frozen=True)
class VerdictDocument:
    """One court decision with its identity keys and raw text."""

    doc_id: str
    court_name: str
    docket_number: str
    decision_year: int
    raw_text: str
    source: str = SOURCE_DUMP

    def __post_init__(self) -> None:
        if not self.raw_text:
            raise ValueError(f"document {self.doc_id!r} has empty text")
        if not self.doc_id:
            raise ValueError("document id must be non-empty")
        if self.source not in (SOURCE_DUMP, SOURCE_API):
            raise ValueError(f"unknown document source {self.source!r}")


@dataclass(frozen=True)
class AdminRecord:
    """One registry row; (docket_number, court_name) is the linkage key."""

    docket_number: str
    court_name: str
    decision_year: int


@dataclass(frozen=True)
class CourtCoverage:
    attempted: int
    matched: int

    @property
    def rate(self) -> float:
        return self.matched / self.attempted if self.attempted else 0.0


@dataclass(frozen=True)
class LinkageReport:
    """Registry accounting: every record is matched (dump/api) or unmatched."""

    total_admin: int
    matched_dump: int
    matched_api: int
    unmatched: int
    per_court: dict[str, CourtCoverage] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.matched_dump + self.matched_api + self.unmatched != self.total_admin:
            raise ValueError("linkage counts do not add up to the registry total")

    @property
    def matched_total(self) -> int:
        return self.matched_dump + self.matched_api

    def to_dict(self) -> dict:
        return {
            "total_admin": self.total_admin,
            "matched_dump": self.matched_dump,
            "matched_api": self.matched_api,
            "unmatched": self.unmatched,
            "per_court": {
                name: {"attempted": c.attempted, "matched": c.matched, "rate": round(c.rate, 6)}
                for name, c in sorted(self.per_court.items())
            },
        }


@dataclass
class DumpStats:
    parsed: int = 0
    corrupt: int = 0
    out_of_range: int = 0
    duplicate_ids: int = 0


def normalize_docket(raw: str) -> str:
    """Canonical docket key: trimmed, inner whitespace runs collapsed, casefolded.

    Idempotent and deterministic; raises on empty input.
    """
    if not raw or not raw.strip():
        raise ValueError("docket number must be non-empty")
    collapsed = " ".join(raw.split())
    return collapsed.casefold()


def court_key(raw: str) -> str:
    """Court-name linkage key: same hygiene as dockets plus diacritic folding."""
    if not raw or not raw.strip():
        raise ValueError("court name must be non-empty")
    return normalize_text(raw).folded


def linkage_key(docket: str, court: str) -> tuple[str, str]:
    return normalize_docket(docket), court_key(court)


def parse_dump(dump_stream: BinaryIO | io.TextIOBase,
               year_range: tuple[int, int] = DEFAULT_YEAR_RANGE,
               ) -> tuple[list[VerdictDocument], DumpStats]:
    """Parse a newline-delimited dump; malformed records are counted, never fatal."""
    stats = DumpStats()
    docs: list[VerdictDocument] = []
    seen_ids: set[str] = set()
    try:
        lines = iter(dump_stream)
    except TypeError as exc:
        raise IngestError(f"dump stream is not readable: {exc}") from exc
    for line in lines:
        if isinstance(line, bytes):
            line = line.decode("utf-8", errors="replace")
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            text = record["text"]
            court = record["court"]
            docket = record["docket"]
            year = int(record["year"])
            doc_id = str(record.get("id") or f"{court}:{docket}")
            if not text or not str(text).strip():
                raise ValueError("empty text")
        except Exception:
            stats.corrupt += 1
            continue
        if not year_range[0] <= year <= year_range[1]:
            stats.out_of_range += 1
            continue
        if doc_id in seen_ids:
            stats.duplicate_ids += 1
            continue
        seen_ids.add(doc_id)
        docs.append(VerdictDocument(doc_id, str(court), str(docket), year, str(text)))
        stats.parsed += 1
    return docs, stats


def load_dump(path: str | Path,
              year_range: tuple[int, int] = DEFAULT_YEAR_RANGE,
              ) -> tuple[list[VerdictDocument], DumpStats]:
    try:
        handle = open(path, "rb")
    except OSError as exc:
        raise IngestError(f"cannot open dump {path}: {exc}") from exc
    with handle:
        return parse_dump(handle, year_range)


def load_admin_records(path: str | Path) -> list[AdminRecord]:
    """Load the registry table; duplicate linkage keys are a load-time error."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot open registry {path}: {exc}") from exc
    if not text.strip():
        raise IngestError(f"registry {path} is empty")
    header = text.splitlines()[0]
    delimiter = "\t" if "\t" in header else ","
    reader = csv.DictReader(io.StringIO(text), delimiter=delimiter)
    required = {"docket_number", "court_name", "decision_year"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise IngestError(
            f"registry {path} must have columns {sorted(required)}, got {reader.fieldnames}"
        )
    records: list[AdminRecord] = []
    seen: set[tuple[str, str]] = set()
    for row_no, row in enumerate(reader, start=2):
        record = AdminRecord(
            docket_number=row["docket_number"].strip(),
            court_name=row["court_name"].strip(),
            decision_year=int(row["decision_year"]),
        )
        key = linkage_key(record.docket_number, record.court_name)
        if key in seen:
            raise IngestError(
                f"registry {path} line {row_no}: duplicate linkage key {key}"
            )
        seen.add(key)
        records.append(record)
    return records


def link_corpus(docs: Sequence[VerdictDocument], admin: Sequence[AdminRecord],
                ) -> tuple[LinkageReport, list[tuple[AdminRecord, VerdictDocument]]]:
    """Match documents to registry records on normalized (docket, court) keys.

    Each registry record matches at most one document (the one with the
    lexicographically smallest id when several share a key, which keeps the
    result independent of input order).
    """
    admin_keys: set[tuple[str, str]] = set()
    for record in admin:
        key = linkage_key(record.docket_number, record.court_name)
        if key in admin_keys:
            raise IngestError(f"duplicate registry key {key}; deduplicate before linking")
        admin_keys.add(key)

    by_key: dict[tuple[str, str], VerdictDocument] = {}
    for doc in docs:
        key = linkage_key(doc.docket_number, doc.court_name)
        current = by_key.get(key)
        if current is None or doc.doc_id < current.doc_id:
            by_key[key] = doc

    matched_dump = 0
    matched_api = 0
    pairs: list[tuple[AdminRecord, VerdictDocument]] = []
    per_court_attempted: dict[str, int] = {}
    per_court_matched: dict[str, int] = {}
    for record in sorted(admin, key=lambda r: (court_key(r.court_name),
                                               normalize_docket(r.docket_number))):
        ckey = court_key(record.court_name)
        per_court_attempted[ckey] = per_court_attempted.get(ckey, 0) + 1
        doc = by_key.get(linkage_key(record.docket_number, record.court_name))
        if doc is None:
            continue
        pairs.append((record, doc))
        per_court_matched[ckey] = per_court_matched.get(ckey, 0) + 1
        if doc.source == SOURCE_API:
            matched_api += 1
        else:
            matched_dump += 1

    per_court = {
        name: CourtCoverage(attempted=per_court_attempted[name],
                            matched=per_court_matched.get(name, 0))
        for name in per_court_attempted
    }
    report = LinkageReport(
        total_admin=len(admin),
        matched_dump=matched_dump,
        matched_api=matched_api,
        unmatched=len(admin) - matched_dump - matched_api,
        per_court=per_court,
    )
    return report, pairs


def unmatched_records(docs: Sequence[VerdictDocument],
                      admin: Sequence[AdminRecord]) -> list[AdminRecord]:
    """Registry records with no document in the corpus."""
    have = {linkage_key(d.docket_number, d.court_name) for d in docs}
    return [r for r in admin
            if linkage_key(r.docket_number, r.court_name) not in have]


class RetrievalError(Exception):
    """Raised by retrieval clients; ``reason`` is one of the failure reasons."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(detail or reason)
        self.reason = reason


class DocumentRetriever(Protocol):
    """Fetches the raw text of one decision by its registry identity."""

    def fetch(self, record: AdminRecord) -> str: ...


class StubRetriever:
    """Scripted retriever for tests: maps linkage keys to text or a failure reason."""

    def __init__(self, responses: dict[tuple[str, str], str],
                 failures: dict[tuple[str, str], str] | None = None,
                 flaky_until_attempt: int = 0):
        self.responses = {
            linkage_key(docket, court): text
            for (docket, court), text in responses.items()
        }
        self.failures = {
            linkage_key(docket, court): reason
            for (docket, court), reason in (failures or {}).items()
        }
        self.flaky_until_attempt = flaky_until_attempt
        self.calls: list[tuple[str, str]] = []
        self._attempts: dict[tuple[str, str], int] = {}

    def fetch(self, record: AdminRecord) -> str:
        key = linkage_key(record.docket_number, record.court_name)
        self.calls.append(key)
        self._attempts[key] = self._attempts.get(key, 0) + 1
        if self._attempts[key] <= self.flaky_until_attempt:
            raise RetrievalError(REASON_TRANSPORT, "scripted transient failure")
        if key in self.failures:
            raise RetrievalError(self.failures[key], "scripted failure")
        if key in self.responses:
            return self.responses[key]
        raise RetrievalError(REASON_NOT_FOUND, "no scripted response")


class HttpRetriever:
    """Live retrieval backend: GET ``{endpoint}?docket=...&court=...``.

    Expects a JSON body with a ``text`` field.  404 maps to not_found, 429 to
    rate_limited, anything else unhealthy to transport_error.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0,
                 request_interval: float = 0.0, api_key: str | None = None):
        if not endpoint or not endpoint.startswith(("http://", "https://")):
            raise IngestError(f"retriever endpoint looks invalid: {endpoint!r}")
        if timeout <= 0:
            raise IngestError("retriever timeout must be positive")
        self.endpoint = endpoint
        self.timeout = timeout
        self.request_interval = request_interval
        self.api_key = api_key

    def fetch(self, record: AdminRecord) -> str:
        import requests

        if self.request_interval > 0:
            time.sleep(self.request_interval)
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            response = requests.get(
                self.endpoint,
                params={"docket": record.docket_number, "court": record.court_name},
                headers=headers,
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise RetrievalError(REASON_TRANSPORT, str(exc)) from exc
        if response.status_code == 404:
            raise RetrievalError(REASON_NOT_FOUND, "document not in remote service")
        if response.status_code == 429:
            raise RetrievalError(REASON_RATE_LIMITED, "remote service throttling")
        if response.status_code != 200:
            raise RetrievalError(REASON_TRANSPORT, f"HTTP {response.status_code}")
        try:
            text = response.json()["text"]
        except (ValueError, KeyError) as exc:
            raise RetrievalError(REASON_TRANSPORT, f"malformed response body: {exc}") from exc
        if not text:
            raise RetrievalError(REASON_NOT_FOUND, "remote record has no text")
        return text


@dataclass(frozen=True)
class FetchFailure:
    docket_number: str
    court_name: str
    reason: str


def fetch_missing(unmatched: Sequence[AdminRecord], retriever: DocumentRetriever,
                  max_retries: int = 3, workers: int = 1,
                  ) -> tuple[list[VerdictDocument], list[FetchFailure]]:
    """Retrieve unmatched registry records through the retrieval client.

    Transient failures (transport, rate limiting) are retried up to
    ``max_retries`` extra attempts; not_found is final.  Results are tagged
    ``api_fetch`` and returned in registry-key order regardless of worker
    scheduling.
    """
    if retriever is None:
        raise IngestError("no retriever configured")
    if max_retries < 0:
        raise IngestError("max_retries must be >= 0")
    if workers < 1:
        raise IngestError("workers must be >= 1")

    def attempt(record: AdminRecord) -> tuple[AdminRecord, str | None, str | None]:
        last_reason = REASON_TRANSPORT
        for _ in range(1 + max_retries):
            try:
                return record, retriever.fetch(record), None
            except RetrievalError as exc:
                last_reason = exc.reason
                if exc.reason == REASON_NOT_FOUND:
                    break
        return record, None, last_reason

    ordered = sorted(unmatched, key=lambda r: (court_key(r.court_name),
                                               normalize_docket(r.docket_number)))
    if workers == 1:
        results = [attempt(r) for r in ordered]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(attempt, ordered))

    docs: list[VerdictDocument] = []
    failures: list[FetchFailure] = []
    for record, text, reason in results:
        if text is not None:
            docs.append(VerdictDocument(
                doc_id=f"api:{court_key(record.court_name)}:{normalize_docket(record.docket_number)}",
                court_name=record.court_name,
                docket_number=record.docket_number,
                decision_year=record.decision_year,
                raw_text=text,
                source=SOURCE_API,
            ))
        else:
            failures.append(FetchFailure(record.docket_number, record.court_name, reason))
    logger.info("fetched %d of %d missing documents", len(docs), len(unmatched))
    return docs, failures


def coverage_report(report: LinkageReport,
                    thresholds: Sequence[float] = (0.9,)) -> str:
    """Aligned plain-text coverage table plus per-court threshold lines."""
    total = report.total_admin
    rows = [
        ("dump (direct match)", report.matched_dump, format_percent(report.matched_dump, total)),
        ("api re-download", report.matched_api, format_percent(report.matched_api, total)),
        ("linked total", report.matched_total, format_percent(report.matched_total, total)),
        ("not linked", report.unmatched, format_percent(report.unmatched, total)),
    ]
    table = render_table(
        ["linkage step", "n cases", f"% of {total}"], rows, title="registry coverage"
    )
    lines = [table]
    n_courts = len(report.per_court)
    for threshold in thresholds:
        above = sum(1 for c in report.per_court.values() if c.rate > threshold)
        lines.append(
            f"courts with match rate above {format_fraction_threshold(threshold)}: "
            f"{above}/{n_courts}"
        )
    return "\n".join(lines)


def format_fraction_threshold(threshold: float) -> str:
    return f"{threshold * 100:g}%"
