"""Character-level text alignment: folding, similarity, span search, grounding.

Everything downstream that compares model output or extracted spans against a
source document goes through this module.  The central guarantee is that
:func:`ground` only ever hands back a contiguous, byte-identical excerpt of the
source document, never the candidate string it was given.

Scores are normalized Levenshtein similarities computed over *folded* text:
diacritics stripped, case-folded, whitespace runs collapsed to single spaces.
Folding keeps an offset map so that any folded span can be projected back to a
span in the original string.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass

import numpy as np

# Folded sources at or below this length are searched exhaustively over all
# substrings; longer sources go through the seeded search.
EXACT_SEARCH_LIMIT = 500

_WS = " "


@dataclass(frozen=True)
class NormalizedText:
    """Folded form of a string plus the map back into the original.

    ``offset_map[k]`` is the half-open range of the original string that
    produced folded character ``k``.  Ranges are monotone nondecreasing and a
    collapsed whitespace run maps to the whole run.
    """

    original: str
    folded: str
    offset_map: tuple[tuple[int, int], ...]

    def project(self, start: int, end: int) -> tuple[int, int]:
        """Map a folded span back to a span in the original string."""
        if not 0 <= start < end <= len(self.folded):
            raise ValueError(f"invalid folded span ({start}, {end})")
        return self.offset_map[start][0], self.offset_map[end - 1][1]


@dataclass(frozen=True)
class SpanMatch:
    """Best-matching source span for a candidate, in original offsets."""

    start_offset: int
    end_offset: int
    score: float


@dataclass(frozen=True)
class GroundedSpan:
    """A verbatim source excerpt accepted by the grounding guard."""

    text: str
    start_offset: int
    end_offset: int
    score: float


def fold_char(ch: str) -> str:
    """Fold one character: decompose, drop combining marks, casefold."""
    decomposed = unicodedata.normalize("NFD", ch)
    kept = "".join(c for c in decomposed if unicodedata.category(c) != "Mn")
    return kept.casefold()


def normalize_text(text: str) -> NormalizedText:
    """Fold a string and record where every folded character came from.

    Folding removes combining marks, case-folds, collapses whitespace runs to
    a single space and strips leading/trailing whitespace.  Idempotent: the
    folded form folds to itself.
    """
    chars: list[str] = []
    offsets: list[tuple[int, int]] = []
    run_start = -1  # start of a pending whitespace run, -1 when none
    for idx, ch in enumerate(text):
        if ch.isspace():
            if run_start < 0:
                run_start = idx
            continue
        folded = fold_char(ch)
        if not folded:
            continue  # lone combining mark
        if run_start >= 0:
            if chars:  # interior run -> one space; leading run is dropped
                chars.append(_WS)
                offsets.append((run_start, idx))
            run_start = -1
        for piece in folded:  # casefold may expand (one char -> several)
            chars.append(piece)
            offsets.append((idx, idx + 1))
    return NormalizedText(text, "".join(chars), tuple(offsets))


def _codes(s: str) -> np.ndarray:
    if not s:
        return np.empty(0, dtype=np.int32)
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32).astype(np.int32)


def _final_row(cand: np.ndarray, src: np.ndarray) -> np.ndarray:
    """Levenshtein DP final row: distance from ``cand`` to every prefix of ``src``.

    Row updates are vectorized over the source axis; the in-row dependency is
    resolved with the prefix-minimum identity
    ``row[j] = min_k(tmp[k] + (j - k)) = j + min-accumulate(tmp - index)``.
    """
    n = src.size
    idx = np.arange(n + 1, dtype=np.int32)
    row = idx.copy()
    for r in range(1, cand.size + 1):
        ch = cand[r - 1]
        new = np.empty(n + 1, dtype=np.int32)
        new[0] = r
        np.minimum(row[1:] + 1, row[:-1] + (src != ch), out=new[1:])
        u = new - idx
        np.minimum.accumulate(u, out=u)
        row = u + idx
    return row


def _free_start_row(cand: np.ndarray, src: np.ndarray) -> np.ndarray:
    """Sellers DP: min distance from ``cand`` to any substring ending at j."""
    n = src.size
    idx = np.arange(n + 1, dtype=np.int32)
    row = np.zeros(n + 1, dtype=np.int32)
    for r in range(1, cand.size + 1):
        ch = cand[r - 1]
        new = np.empty(n + 1, dtype=np.int32)
        new[0] = r
        np.minimum(row[1:] + 1, row[:-1] + (src != ch), out=new[1:])
        u = new - idx
        np.minimum.accumulate(u, out=u)
        row = u + idx
    return row


def edit_distance(a: str, b: str) -> int:
    """Plain Levenshtein distance with unit costs."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    return int(_final_row(_codes(a), _codes(b))[-1])


def similarity(a: str, b: str) -> float:
    """Normalized Levenshtein similarity over folded text, in [0, 1].

    ``1 - distance / max(len)`` on the folded forms; 1.0 exactly when the
    folded forms are equal (including both empty).  Symmetric.
    """
    fa = normalize_text(a).folded
    fb = normalize_text(b).folded
    if not fa and not fb:
        return 1.0
    longest = max(len(fa), len(fb))
    dist = edit_distance(fa, fb)
    if dist == 0:
        return 1.0
    return 1.0 - dist / longest


def _span_distances(cand: np.ndarray, src: np.ndarray, t_max: int) -> np.ndarray:
    """Distances D[i, t] = levenshtein(cand, src[i:i+t]) for t in 0..t_max.

    One DP over all start positions at once: the source is sheared into a
    (start, length) grid so each candidate-character step is a handful of
    whole-matrix operations.  Entries with i + t > len(src) are garbage and
    must be masked by the caller.
    """
    n = src.size
    pos = np.arange(n, dtype=np.int64)[:, None] + np.arange(t_max, dtype=np.int64)[None, :]
    sheared = src[np.minimum(pos, n - 1)]  # sheared[i, t-1] = src[i + t - 1]
    tvec = np.arange(t_max + 1, dtype=np.int32)[None, :]
    dist = np.tile(np.arange(t_max + 1, dtype=np.int32), (n, 1))
    for r in range(1, cand.size + 1):
        cost = (sheared != cand[r - 1]).astype(np.int32)
        new = np.empty_like(dist)
        new[:, 0] = r
        np.minimum(dist[:, 1:] + 1, dist[:, :-1] + cost, out=new[:, 1:])
        u = new - tvec
        np.minimum.accumulate(u, axis=1, out=u)
        dist = u + tvec
    return dist


def _best_span_bounded(cand: np.ndarray, src: np.ndarray, t_max: int) -> tuple[float, int, int]:
    """Best span with length <= t_max under the earliest-then-shortest tie rule."""
    n = src.size
    t_max = min(t_max, n)
    dist = _span_distances(cand, src, t_max)
    lengths = np.arange(t_max + 1, dtype=np.float64)[None, :]
    denom = np.maximum(float(cand.size), lengths)
    with np.errstate(divide="ignore", invalid="ignore"):
        sims = 1.0 - dist / denom
    sims[:, 0] = -1.0  # exclude empty spans
    starts = np.arange(n, dtype=np.int64)[:, None]
    invalid = starts + np.arange(t_max + 1, dtype=np.int64)[None, :] > n
    sims[invalid] = -1.0
    flat = int(np.argmax(sims))  # first occurrence in row-major order:
    i, t = divmod(flat, t_max + 1)  # earliest start, then shortest length
    return float(sims[i, t]), i, i + t


def _best_span_exact(cand: np.ndarray, src: np.ndarray) -> tuple[float, int, int]:
    """Exhaustive best-substring search, pruned only by a provable bound.

    A span of length t satisfies sim <= C/t for t >= C (and sim <= t/C for
    t <= C), so once a score B from the first bounded pass is in hand, span
    lengths beyond C/B cannot win or tie and are skipped exactly.
    """
    n = src.size
    c = cand.size
    t_cap = min(n, 2 * c + 8)
    best, i, j = _best_span_bounded(cand, src, t_cap)
    if best <= 0.0:
        full = n
    elif c / best <= t_cap:
        return best, i, j
    else:
        full = min(n, int(c / best))
    if full > t_cap:
        best, i, j = _best_span_bounded(cand, src, full)
    return best, i, j


def _best_span_seeded(cand: np.ndarray, src: np.ndarray) -> tuple[float, int, int]:
    """Approximate best span for long sources.

    Seeds end positions from a single free-start DP pass, then recovers the
    matching start for each seeded end with a reversed DP over a bounded
    window, jittering the end a few characters to polish the boundary.
    Deterministic; exact whenever the candidate occurs verbatim.
    """
    n = src.size
    c = cand.size
    ends_row = _free_start_row(cand, src)[1:]  # min distance for ends 1..n
    order = np.argsort(ends_row, kind="stable")
    seeds: list[int] = []
    for raw in order:
        end = int(raw) + 1
        if all(abs(end - other) > max(4, c // 2) for other in seeds):
            seeds.append(end)
        if len(seeds) >= 3:
            break

    rev_cand = cand[::-1]
    window = int(2.2 * c) + 8

    def score_end(end: int) -> tuple[float, int, int]:
        lo = max(0, end - window)
        rev = src[lo:end][::-1]
        row = _final_row(rev_cand, rev)  # row[k] = D(cand, src[end-k:end])
        lengths = np.arange(row.size, dtype=np.float64)
        denom = np.maximum(float(c), lengths)
        with np.errstate(divide="ignore", invalid="ignore"):
            sims = 1.0 - row / denom
        sims[0] = -1.0
        k = int(np.argmax(sims))
        return float(sims[k]), end - k, end

    best = (-1.0, 0, 0)
    for end in seeds:
        cand_best = score_end(end)
        for jitter in (-2, -1, 1, 2):
            alt = end + jitter
            if 1 <= alt <= n:
                trial = score_end(alt)
                if trial[0] > cand_best[0]:
                    cand_best = trial
        if cand_best[0] > best[0]:
            best = cand_best
    return best


def locate_span(candidate: str, source: str) -> SpanMatch:
    """Find the source span most similar to ``candidate``.

    The search runs over folded text and the winning span is projected back
    to original offsets.  Sources folding to at most ``EXACT_SEARCH_LIMIT``
    characters are searched exhaustively (ties resolved earliest start, then
    shortest span); longer sources use a seeded heuristic with the same
    scoring.
    """
    if not candidate:
        raise ValueError("candidate must be non-empty")
    if not source:
        raise ValueError("source must be non-empty")
    norm_src = normalize_text(source)
    fc = normalize_text(candidate).folded
    fs = norm_src.folded
    if not fs:
        return SpanMatch(0, len(source), 0.0)
    if not fc:
        return SpanMatch(*norm_src.project(0, 1), 0.0)
    cand_codes = _codes(fc)
    src_codes = _codes(fs)
    if len(fs) <= EXACT_SEARCH_LIMIT and len(fc) <= EXACT_SEARCH_LIMIT:
        score, start, end = _best_span_exact(cand_codes, src_codes)
    else:
        score, start, end = _best_span_seeded(cand_codes, src_codes)
    orig_start, orig_end = norm_src.project(start, end)
    return SpanMatch(orig_start, orig_end, max(0.0, min(1.0, score)))


def ground(candidate: str, source: str, accept_threshold: float = 0.5) -> GroundedSpan | None:
    """Replace generated text with the best-matching verbatim source excerpt.

    Returns the exact original substring at the located span when its score
    reaches ``accept_threshold``, otherwise ``None``.  The returned text is
    always ``source[start:end]``, never the candidate.
    """
    if not 0.0 <= accept_threshold <= 1.0:
        raise ValueError("accept_threshold must be in [0, 1]")
    if not candidate or not source:
        return None
    if not normalize_text(candidate).folded:
        return None
    match = locate_span(candidate, source)
    if match.score < accept_threshold:
        return None
    text = source[match.start_offset : match.end_offset]
    return GroundedSpan(text, match.start_offset, match.end_offset, match.score)
