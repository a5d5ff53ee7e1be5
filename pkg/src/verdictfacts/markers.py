"""Letter-spaced section headings and the marker inventory mined from them.

Continental court decisions flag section boundaries typographically: the
letters of a heading word are spaced out ("R o z s u d o k").  Because that
convention survives sloppy PDF-to-text conversion far better than paragraph
breaks do, the spaced headings are the most reliable anchors for locating the
section that states the facts of the case.

This module detects spaced-out runs, collapses them back to plain words, and
aggregates them across a corpus into ranked marker candidates.  Deciding which
candidates actually open or close a fact statement is a human annotation step;
the result of that step is loaded from a JSON config as a :class:`MarkerSet`.
"""

from __future__ import annotations

import json
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .align import normalize_text

# One unit is 1-2 letters: conversion noise occasionally glues two letters of
# a spaced word together, so "R oz s u d o k" still counts.
_UNIT = r"[^\W\d_]{1,2}"
_SPACED_RUN = re.compile(
    rf"(?<![^\W\d_])({_UNIT}(?: {_UNIT})+)(?![^\W\d_])",
    re.UNICODE,
)


@dataclass(frozen=True)
class SpacedSpan:
    """One letter-spaced run in a document, with its collapsed reading."""

    start_offset: int
    end_offset: int
    raw: str
    collapsed: str


@dataclass(frozen=True)
class MarkerCandidate:
    """A collapsed expression aggregated over a corpus."""

    expression: str
    document_count: int
    mean_relative_position: float
    position_rank_histogram: dict[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class MarkerSet:
    """Annotated opener/closer phrases for fact statements."""

    start_markers: tuple[str, ...]
    end_markers: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.start_markers or not self.end_markers:
            raise ValueError("marker set needs at least one start and one end marker")
        overlap = set(self.start_markers) & set(self.end_markers)
        if overlap:
            raise ValueError(f"phrases listed as both start and end markers: {sorted(overlap)}")


def collapse_spacing(raw: str) -> str:
    """Remove single spaces sitting between letters; idempotent.

    "L I K E T H I S" -> "LIKETHIS".  Runs of two or more spaces and spaces
    next to non-letters are left alone, so already-collapsed text is
    unchanged.
    """
    return re.sub(r"(?<=[^\W\d_]) (?=[^\W\d_])", "", raw)


def collapse(span: SpacedSpan) -> str:
    """Collapsed reading of a detected span."""
    return collapse_spacing(span.raw)


def detect_spaced_runs(text: str) -> list[SpacedSpan]:
    """Find maximal letter-spaced runs in ``text``, ordered by offset.

    A run is two or more single-space-separated letter units (a unit being
    one or two letters, tolerating glued pairs), not flanked by further
    letters.  Runs with fewer than two single-letter units are rejected:
    sequences like "of a" are ordinary prose, not spaced headings.
    """
    spans: list[SpacedSpan] = []
    for m in _SPACED_RUN.finditer(text):
        units = m.group(1).split(" ")
        if sum(1 for u in units if len(u) == 1) < 2:
            continue
        collapsed = "".join(units)
        if len(collapsed) < 2:
            continue
        spans.append(SpacedSpan(m.start(1), m.end(1), m.group(1), collapsed))
    return spans


def mine_marker_candidates(docs: Iterable) -> list[MarkerCandidate]:
    """Aggregate spaced-run expressions over a corpus.

    Expressions are grouped by their folded collapsed form.  For each group
    the result carries how many documents contain it, the mean relative
    character position of its occurrences (offset / document length), and a
    histogram of the rank its first occurrence takes among the document's
    spaced runs.  Sorted by document count descending, then mean position,
    then expression; invariant under document order.
    """
    doc_counts: Counter[str] = Counter()
    positions: defaultdict[str, list[float]] = defaultdict(list)
    rank_hist: defaultdict[str, Counter[int]] = defaultdict(Counter)

    any_docs = False
    for doc in docs:
        any_docs = True
        text = doc.raw_text
        runs = detect_spaced_runs(text)
        seen_ranks: dict[str, int] = {}
        for rank, span in enumerate(runs, start=1):
            key = normalize_text(span.collapsed).folded
            if not key:
                continue
            positions[key].append(span.start_offset / max(1, len(text)))
            if key not in seen_ranks:
                seen_ranks[key] = rank
        for key, rank in seen_ranks.items():
            doc_counts[key] += 1
            rank_hist[key][rank] += 1
    if not any_docs:
        raise ValueError("cannot mine markers from an empty corpus")

    candidates = [
        MarkerCandidate(
            expression=key,
            document_count=doc_counts[key],
            mean_relative_position=sum(positions[key]) / len(positions[key]),
            position_rank_histogram=dict(sorted(rank_hist[key].items())),
        )
        for key in doc_counts
    ]
    candidates.sort(key=lambda c: (-c.document_count, c.mean_relative_position, c.expression))
    return candidates


def _normalize_phrases(phrases: Sequence[str]) -> tuple[str, ...]:
    out = []
    for phrase in phrases:
        folded = normalize_text(phrase).folded
        if not folded:
            raise ValueError(f"marker phrase folds to nothing: {phrase!r}")
        out.append(folded)
    return tuple(out)


def make_marker_set(start_markers: Sequence[str], end_markers: Sequence[str]) -> MarkerSet:
    """Build a validated MarkerSet, storing phrases in folded form."""
    return MarkerSet(_normalize_phrases(start_markers), _normalize_phrases(end_markers))


def load_marker_set(config_path: str | Path) -> MarkerSet:
    """Load an annotated marker set from a JSON config file."""
    path = Path(config_path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise ValueError(f"marker config {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ValueError(f"marker config {path} must be a JSON object")
    try:
        starts = payload["start_markers"]
        ends = payload["end_markers"]
    except KeyError as exc:
        raise ValueError(f"marker config {path} is missing {exc.args[0]}") from exc
    if not isinstance(starts, list) or not isinstance(ends, list):
        raise ValueError(f"marker config {path}: marker lists must be JSON arrays")
    return make_marker_set(starts, ends)


def default_marker_set() -> MarkerSet:
    """The marker set shipped with the package."""
    ref = resources.files("verdictfacts.data").joinpath("default_markers.json")
    payload = json.loads(ref.read_text(encoding="utf-8"))
    return make_marker_set(payload["start_markers"], payload["end_markers"])


def candidates_to_json(candidates: Sequence[MarkerCandidate]) -> str:
    """Serialize mined candidates for the annotation round-trip."""
    rows = [
        {
            "expression": c.expression,
            "document_count": c.document_count,
            "mean_relative_position": round(c.mean_relative_position, 6),
            "position_rank_histogram": {str(k): v for k, v in c.position_rank_histogram.items()},
        }
        for c in candidates
    ]
    return json.dumps(rows, ensure_ascii=False, indent=2)
