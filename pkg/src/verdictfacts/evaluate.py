"""Scoring extractions against gold annotations and rendering report tables.

Scores are character-level similarities from :mod:`verdictfacts.align`.
They are bucketed into bands with left-inclusive boundaries at 0.95, 0.80 and
0.50; a score of exactly 1.0 is its own band.  Band comparisons run on the
score rounded to 12 decimals, which removes binary-float noise from what are
mathematically rational numbers without ever moving a genuinely distinct
score across a boundary.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .align import locate_span, similarity
from .reporting import format_percent, render_table
from .rules import ExtractionOutcome, Status


class MatchBand(str, Enum):
    PERFECT = "perfect"            # exactly 1.0
    EXACT = "exact"                # [0.95, 1.0)
    HIGH = "high"                  # [0.80, 0.95)
    MEDIUM = "medium"              # [0.50, 0.80)
    LOW = "low"                    # [0, 0.50)
    NOT_EXTRACTED = "not_extracted"


BAND_ORDER = (MatchBand.PERFECT, MatchBand.EXACT, MatchBand.HIGH,
              MatchBand.MEDIUM, MatchBand.LOW, MatchBand.NOT_EXTRACTED)


def band(score: float | None) -> MatchBand:
    """Band for a similarity score, or NOT_EXTRACTED when there is none."""
    if score is None:
        return MatchBand.NOT_EXTRACTED
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"score out of range: {score}")
    s = round(score, 12)
    if s >= 1.0:
        return MatchBand.PERFECT
    if s >= 0.95:
        return MatchBand.EXACT
    if s >= 0.80:
        return MatchBand.HIGH
    if s >= 0.50:
        return MatchBand.MEDIUM
    return MatchBand.LOW


@dataclass(frozen=True)
class GoldAnnotation:
    """Human-annotated reference for one document.

    ``present`` is False for decisions that genuinely lack a factual
    statement (procedural rulings, acquittals); then ``gold_text`` is empty.
    """

    doc_id: str
    present: bool
    gold_text: str = ""

    def __post_init__(self) -> None:
        if self.present != bool(self.gold_text):
            raise ValueError("gold_text must be non-empty exactly when present is true")


@dataclass(frozen=True)
class Comparison:
    """One scored extraction/gold pair."""

    doc_id: str
    extracted: bool
    score: float | None
    band: MatchBand
    correct_absence: bool = False
    diagnostics: str = ""


def compare(outcome: ExtractionOutcome, gold: GoldAnnotation) -> Comparison:
    """Score one outcome against its gold annotation."""
    if outcome.doc_id != gold.doc_id:
        raise ValueError(f"doc_id mismatch: {outcome.doc_id!r} vs {gold.doc_id!r}")
    extracted = outcome.status is Status.EXTRACTED
    if gold.present and extracted:
        score = similarity(outcome.text, gold.gold_text)
        return Comparison(gold.doc_id, True, score, band(score))
    if gold.present and not extracted:
        return Comparison(gold.doc_id, False, None, MatchBand.NOT_EXTRACTED,
                          diagnostics=outcome.diagnostics)
    if not gold.present and not extracted:
        return Comparison(gold.doc_id, False, None, MatchBand.NOT_EXTRACTED,
                          correct_absence=True)
    return Comparison(gold.doc_id, True, 0.0, MatchBand.LOW, diagnostics="spurious")


@dataclass(frozen=True)
class MethodReport:
    """Per-method extraction rate and similarity-band breakdown."""

    method: str
    n: int
    extraction_rate: float
    quality_ge_95: float
    band_counts: dict[MatchBand, int]
    correct_absences: int = 0
    mean_score: float | None = None

    def __post_init__(self) -> None:
        if sum(self.band_counts.values()) != self.n:
            raise ValueError("band counts must sum to n")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n": self.n,
            "extraction_rate": round(self.extraction_rate, 6),
            "quality_ge_95": round(self.quality_ge_95, 6),
            "band_counts": {b.value: self.band_counts.get(b, 0) for b in BAND_ORDER},
            "correct_absences": self.correct_absences,
            "mean_score": None if self.mean_score is None else round(self.mean_score, 6),
        }


def method_report(method: str, comparisons: Sequence[Comparison]) -> MethodReport:
    """Aggregate scored comparisons; order-independent."""
    if not comparisons:
        raise ValueError("cannot report on zero comparisons")
    n = len(comparisons)
    counts = Counter(c.band for c in comparisons)
    extracted = sum(1 for c in comparisons if c.extracted)
    good = counts[MatchBand.PERFECT] + counts[MatchBand.EXACT]
    scores = [c.score for c in comparisons if c.score is not None]
    return MethodReport(
        method=method,
        n=n,
        extraction_rate=extracted / n,
        quality_ge_95=good / n,
        band_counts={b: counts.get(b, 0) for b in BAND_ORDER},
        correct_absences=sum(1 for c in comparisons if c.correct_absence),
        mean_score=(sum(scores) / len(scores)) if scores else None,
    )


# Bands for the hallucination analysis, which compares raw generated text
# against its best source span: {1.0} [0.95,1.0) [0.90,0.95) [0.80,0.90) [0,0.80)
HALLUCINATION_BINS = ("100", "95-99", "90-94", "80-89", "<80")


def hallucination_bin(score: float) -> str:
    s = round(score, 12)
    if s >= 1.0:
        return "100"
    if s >= 0.95:
        return "95-99"
    if s >= 0.90:
        return "90-94"
    if s >= 0.80:
        return "80-89"
    return "<80"


@dataclass(frozen=True)
class HallucinationReport:
    n: int
    bin_counts: dict[str, int]
    mean_similarity: float
    scores: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "bin_counts": {b: self.bin_counts.get(b, 0) for b in HALLUCINATION_BINS},
            "mean_similarity": round(self.mean_similarity, 6),
        }


def hallucination_report(pairs: Sequence[tuple[str, str]]) -> HallucinationReport:
    """Similarity of each generated string to its best span in the source."""
    if not pairs:
        raise ValueError("cannot analyse zero pairs")
    scores = [locate_span(generated, source).score for generated, source in pairs]
    counts = Counter(hallucination_bin(s) for s in scores)
    return HallucinationReport(
        n=len(scores),
        bin_counts={b: counts.get(b, 0) for b in HALLUCINATION_BINS},
        mean_similarity=sum(scores) / len(scores),
        scores=tuple(scores),
    )


def load_gold(path: str | Path) -> dict[str, GoldAnnotation]:
    """Load gold annotations from JSONL ``{doc_id, present, gold_text}``."""
    gold: dict[str, GoldAnnotation] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            ann = GoldAnnotation(str(row["doc_id"]), bool(row["present"]),
                                 row.get("gold_text") or "")
            if ann.doc_id in gold:
                raise ValueError(f"duplicate gold annotation for {ann.doc_id}")
            gold[ann.doc_id] = ann
    return gold


def compare_all(outcomes: Iterable[ExtractionOutcome],
                gold: dict[str, GoldAnnotation]) -> list[Comparison]:
    comparisons = []
    for outcome in outcomes:
        ann = gold.get(outcome.doc_id)
        if ann is None:
            raise ValueError(f"no gold annotation for document {outcome.doc_id}")
        comparisons.append(compare(outcome, ann))
    return comparisons


def render_method_table(reports: Sequence[MethodReport]) -> str:
    rows = [
        (r.method,
         format_percent(round(r.extraction_rate * r.n), r.n),
         format_percent(round(r.quality_ge_95 * r.n), r.n))
        for r in reports
    ]
    return render_table(["method", "extraction rate", "quality >=95%"], rows,
                        title="method performance")


def render_band_table(report: MethodReport) -> str:
    labels = {
        MatchBand.PERFECT: "perfect match (100%)",
        MatchBand.EXACT: "high quality (95-100%)",
        MatchBand.HIGH: "good quality (80-95%)",
        MatchBand.MEDIUM: "fair quality (50-80%)",
    }
    n = report.n
    rows = [
        (labels[b], report.band_counts.get(b, 0), format_percent(report.band_counts.get(b, 0), n, 1))
        for b in (MatchBand.PERFECT, MatchBand.EXACT, MatchBand.HIGH, MatchBand.MEDIUM)
    ]
    failed = report.band_counts.get(MatchBand.LOW, 0) + report.band_counts.get(MatchBand.NOT_EXTRACTED, 0)
    rows.append(("failed extraction", failed, format_percent(failed, n, 1)))
    good = report.band_counts.get(MatchBand.PERFECT, 0) + report.band_counts.get(MatchBand.EXACT, 0)
    rows.append(("total high quality (>=95%)", good, format_percent(good, n, 1)))
    return render_table(["outcome", "cases", "share"], rows,
                        title=f"extraction quality breakdown ({report.method}, n={n})")


def render_hallucination_table(report: HallucinationReport) -> str:
    rows = [
        (f"{label} %", report.bin_counts.get(label, 0),
         format_percent(report.bin_counts.get(label, 0), report.n, 1))
        for label in HALLUCINATION_BINS
    ]
    table = render_table(["similarity band", "cases", "share"], rows,
                         title=f"grounding similarity breakdown (n={report.n})")
    return table + f"\nmean similarity: {report.mean_similarity:.2f}"
