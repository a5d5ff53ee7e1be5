"""verdictfacts: extraction of verbatim factual statements from court decisions.

The package splits into ingestion (dump parsing and registry linkage), marker
mining over letter-spaced headings, rule-based extraction, generation-backed
extraction with a grounding guard, a combined cascade, evaluation against
gold annotations, and a synthetic fixture generator that stands in for real
corpora.
"""

from .align import (
    GroundedSpan,
    NormalizedText,
    SpanMatch,
    edit_distance,
    ground,
    locate_span,
    normalize_text,
    similarity,
)
from .evaluate import GoldAnnotation, MatchBand, MethodReport, band, compare, method_report
from .ingest import AdminRecord, LinkageReport, VerdictDocument
from .markers import MarkerSet, SpacedSpan, collapse_spacing, detect_spaced_runs
from .rules import (
    ExtractionOutcome,
    Method,
    Status,
    TolerantPattern,
    advanced_extract,
    baseline_extract,
    compile_tolerant,
)

__version__ = "0.1.0"

__all__ = [
    "AdminRecord",
    "ExtractionOutcome",
    "GoldAnnotation",
    "GroundedSpan",
    "LinkageReport",
    "MarkerSet",
    "MatchBand",
    "Method",
    "MethodReport",
    "NormalizedText",
    "SpacedSpan",
    "SpanMatch",
    "Status",
    "TolerantPattern",
    "VerdictDocument",
    "advanced_extract",
    "band",
    "baseline_extract",
    "collapse_spacing",
    "compare",
    "compile_tolerant",
    "detect_spaced_runs",
    "edit_distance",
    "ground",
    "locate_span",
    "method_report",
    "normalize_text",
    "similarity",
    "__version__",
]
