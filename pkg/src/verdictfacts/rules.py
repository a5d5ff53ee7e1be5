"""Rule-based fact-statement extraction.

Two tiers.  The baseline matches opener/closer phrases literally and is
deliberately whitespace-sensitive: a line break inside a phrase kills the
match, which is exactly how it fails on converted documents.  The advanced
tier compiles each phrase into a tolerant pattern that permits whitespace
between every pair of adjacent characters and treats diacritic variants of a
letter as equal, then falls back to the next letter-spaced heading when no
closing phrase exists.

Every successful outcome carries a span into the original document text and
the extracted string is, by construction and by invariant, the exact
substring at that span.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence

from .align import fold_char
from .markers import MarkerSet, detect_spaced_runs


class Method(str, Enum):
    BASELINE = "baseline"
    ADVANCED = "advanced"
    LLM = "llm"
    COMBINED = "combined"


class Status(str, Enum):
    EXTRACTED = "extracted"
    NO_MATCH = "no_match"
    FAILED = "failed"


@dataclass(frozen=True)
class ExtractionOutcome:
    """Method-tagged result for one document: a verbatim span or a failure."""

    doc_id: str
    method: Method
    status: Status
    start_offset: int | None = None
    end_offset: int | None = None
    text: str | None = None
    score: float | None = None
    diagnostics: str = ""

    def __post_init__(self) -> None:
        extracted = self.status is Status.EXTRACTED
        has_span = self.start_offset is not None and self.end_offset is not None
        if extracted != has_span or extracted != (self.text is not None):
            raise ValueError("span and text must be present exactly when status is extracted")
        if extracted and self.start_offset >= self.end_offset:
            raise ValueError("extracted span must be non-empty")

    def verify_verbatim(self, raw_text: str) -> bool:
        """Check the verbatim guarantee against the source document."""
        if self.status is not Status.EXTRACTED:
            return True
        return raw_text[self.start_offset : self.end_offset] == self.text


def _extracted(doc, method: Method, start: int, end: int, *, score: float | None = None,
               diagnostics: str = "") -> ExtractionOutcome:
    return ExtractionOutcome(
        doc_id=doc.doc_id,
        method=method,
        status=Status.EXTRACTED,
        start_offset=start,
        end_offset=end,
        text=doc.raw_text[start:end],
        score=score,
        diagnostics=diagnostics,
    )


def _miss(doc, method: Method, reason: str) -> ExtractionOutcome:
    return ExtractionOutcome(doc_id=doc.doc_id, method=method, status=Status.NO_MATCH,
                             diagnostics=reason)


def _trim_span(text: str, start: int, end: int) -> tuple[int, int]:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end


def load_baseline_phrases(config_path: str | Path | None = None) -> tuple[list[str], list[str]]:
    """Load the literal phrase inventory for the baseline matcher."""
    if config_path is None:
        ref = resources.files("verdictfacts.data").joinpath("baseline_phrases.json")
        payload = json.loads(ref.read_text(encoding="utf-8"))
    else:
        payload = json.loads(Path(config_path).read_text(encoding="utf-8"))
    starts = list(payload["start_phrases"])
    ends = list(payload["end_phrases"])
    if not starts or not ends:
        raise ValueError("baseline phrase lists must be non-empty")
    return starts, ends


def _first_literal(text: str, phrases: Sequence[str], from_pos: int = 0) -> tuple[int, int] | None:
    """Earliest literal occurrence of any phrase; at equal offsets the longest wins."""
    best: tuple[int, int] | None = None
    for phrase in phrases:
        pos = text.find(phrase, from_pos)
        if pos < 0:
            continue
        span = (pos, pos + len(phrase))
        if best is None or pos < best[0] or (pos == best[0] and span[1] > best[1]):
            best = span
    return best


def baseline_extract(doc, start_phrases: Sequence[str], end_phrases: Sequence[str]) -> ExtractionOutcome:
    """Fixed-phrase extraction: literal, whitespace-sensitive matching.

    Takes the text strictly between the end of the first opener occurrence
    and the start of the first closer occurrence after it, trimmed.
    """
    if not start_phrases or not end_phrases:
        raise ValueError("phrase lists must be non-empty")
    text = doc.raw_text
    start_hit = _first_literal(text, start_phrases)
    if start_hit is None:
        return _miss(doc, Method.BASELINE, "no start phrase found")
    end_hit = _first_literal(text, end_phrases, from_pos=start_hit[1])
    if end_hit is None:
        return _miss(doc, Method.BASELINE, "no end phrase after start phrase")
    start, end = _trim_span(text, start_hit[1], end_hit[0])
    if start >= end:
        return _miss(doc, Method.BASELINE, "empty span between phrases")
    return _extracted(doc, Method.BASELINE, start, end, score=1.0, diagnostics="baseline")


@lru_cache(maxsize=512)
def _letter_variants(base: str) -> str:
    """All precomposed Latin letters whose base form is ``base``, as a class body."""
    variants = {base}
    for cp in range(0xC0, 0x250):
        ch = chr(cp)
        decomposed = unicodedata.normalize("NFD", ch)
        folded = ch.casefold()
        if decomposed and decomposed[0].casefold() == base and len(folded) == 1:
            variants.add(folded)
    return "".join(sorted(variants))


@dataclass(frozen=True)
class TolerantPattern:
    """A phrase compiled to survive whitespace injection and diacritics."""

    phrase: str
    pattern: re.Pattern

    def search(self, text: str, pos: int = 0) -> re.Match | None:
        return self.pattern.search(text, pos)


def compile_tolerant(phrase: str) -> TolerantPattern:
    """Compile a phrase allowing optional whitespace between adjacent characters.

    Whitespace inside the phrase matches any whitespace run; letters match
    their diacritic variants case-insensitively; everything else is literal.
    """
    if not phrase:
        raise ValueError("cannot compile an empty phrase")
    pieces: list[str] = []
    for ch in phrase:
        if ch.isspace():
            pieces.append(r"\s+")
        else:
            base = fold_char(ch)
            if len(base) == 1 and base.isalpha():
                variants = _letter_variants(base)
                pieces.append(f"[{re.escape(variants)}]" if len(variants) > 1 else re.escape(base))
            else:
                pieces.append(re.escape(ch))
    # optional whitespace between adjacent characters, except where the
    # phrase itself requires whitespace
    body = pieces[0]
    for prev, piece in zip(pieces, pieces[1:]):
        if piece == r"\s+" or prev == r"\s+":
            body += piece
        else:
            body += r"\s*" + piece
    return TolerantPattern(phrase, re.compile(body, re.IGNORECASE))


@dataclass(frozen=True)
class CompiledMarkerSet:
    """Marker set with precompiled tolerant patterns, shareable across docs."""

    markers: MarkerSet
    start_patterns: tuple[TolerantPattern, ...]
    end_patterns: tuple[TolerantPattern, ...]


def compile_marker_set(markers: MarkerSet) -> CompiledMarkerSet:
    return CompiledMarkerSet(
        markers=markers,
        start_patterns=tuple(compile_tolerant(p) for p in markers.start_markers),
        end_patterns=tuple(compile_tolerant(p) for p in markers.end_markers),
    )


def _first_tolerant(text: str, patterns: Sequence[TolerantPattern],
                    from_pos: int = 0) -> tuple[int, int] | None:
    """Earliest tolerant match; at equal offsets the longest phrase wins."""
    best: tuple[int, int] | None = None
    best_len = -1
    for pat in patterns:
        m = pat.search(text, from_pos)
        if m is None:
            continue
        plen = len(pat.phrase)
        if (best is None or m.start() < best[0]
                or (m.start() == best[0] and plen > best_len)):
            best = (m.start(), m.end())
            best_len = plen
    return best


def advanced_extract(doc, markers: MarkerSet | CompiledMarkerSet) -> ExtractionOutcome:
    """Tolerant-pattern extraction driven by the mined marker set.

    Locates the earliest start marker, then the earliest end marker after it;
    when no end marker matches, the next letter-spaced heading serves as the
    terminator.  Offsets always reference the original document text.
    """
    compiled = markers if isinstance(markers, CompiledMarkerSet) else compile_marker_set(markers)
    text = doc.raw_text
    start_hit = _first_tolerant(text, compiled.start_patterns)
    if start_hit is None:
        return _miss(doc, Method.ADVANCED, "no start marker found")
    end_hit = _first_tolerant(text, compiled.end_patterns, from_pos=start_hit[1])
    fallback = False
    if end_hit is None:
        heading = next(
            (s for s in detect_spaced_runs(text) if s.start_offset >= start_hit[1]), None
        )
        if heading is None:
            return _miss(doc, Method.ADVANCED, "no end marker or spaced heading after start marker")
        end_hit = (heading.start_offset, heading.end_offset)
        fallback = True
    start, end = _trim_span(text, start_hit[1], end_hit[0])
    if start >= end:
        return _miss(doc, Method.ADVANCED, "empty span between markers")
    diag = "advanced; terminator=spaced-heading" if fallback else "advanced"
    return _extracted(doc, Method.ADVANCED, start, end, score=1.0, diagnostics=diag)
