"""Independent reference implementations used to cross-check production code.

These deliberately do not share algorithmic structure with the package: the
edit distance is a plain Wagner-Fischer table, and the span search enumerates
start positions with a per-start row DP instead of the production sheared
all-substrings matrix.  A handful of tiny cases are additionally checked
against a naive triple loop in the test modules to anchor the oracles
themselves.
"""

from __future__ import annotations

import numpy as np

from verdictfacts.align import normalize_text


def oracle_edit_distance(a: str, b: str) -> int:
    """Textbook Wagner-Fischer in pure Python."""
    m, n = len(a), len(b)
    if m == 0:
        return n
    if n == 0:
        return m
    prev = list(range(n + 1))
    for i in range(1, m + 1):
        cur = [i] + [0] * n
        ai = a[i - 1]
        for j in range(1, n + 1):
            cost = 0 if ai == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[n]


def oracle_similarity(a: str, b: str) -> float:
    fa = normalize_text(a).folded
    fb = normalize_text(b).folded
    if not fa and not fb:
        return 1.0
    dist = oracle_edit_distance(fa, fb)
    if dist == 0:
        return 1.0
    return 1.0 - dist / max(len(fa), len(fb))


def _distance_rows(cand: str, src_tail: str) -> list[int]:
    """Final DP row: distance from cand to every prefix of src_tail,
    vectorized over the source axis only (per-start architecture)."""
    c = np.frombuffer(cand.encode("utf-32-le"), dtype=np.uint32)
    s = np.frombuffer(src_tail.encode("utf-32-le"), dtype=np.uint32)
    n = s.size
    idx = np.arange(n + 1, dtype=np.int64)
    row = idx.copy()
    for r in range(1, c.size + 1):
        prev = row
        row = np.empty(n + 1, dtype=np.int64)
        row[0] = r
        row[1:] = np.minimum(prev[1:] + 1, prev[:-1] + (s != c[r - 1]))
        shifted = row - idx
        np.minimum.accumulate(shifted, out=shifted)
        row = shifted + idx
    return row.tolist()


def oracle_best_folded_span(candidate_folded: str, source_folded: str) -> tuple[float, int, int]:
    """Exhaustive best-substring search over folded text.

    Enumerates every start position, computing distances to all end positions
    in one DP row per start; keeps the first strict maximum in (start,
    length) order, which is the earliest-then-shortest tie rule.
    """
    c_len = len(candidate_folded)
    n = len(source_folded)
    best = (-1.0, 0, 0)
    for i in range(n):
        row = _distance_rows(candidate_folded, source_folded[i:])
        for t in range(1, n - i + 1):
            sim = 1.0 - row[t] / max(c_len, t)
            if sim > best[0]:
                best = (sim, i, i + t)
    return best


def oracle_naive_best_span(candidate: str, source: str) -> tuple[float, int, int]:
    """Triple-loop reference over all substrings, for tiny anchor cases only."""
    best = (-1.0, 0, 0)
    n = len(source)
    for i in range(n):
        for j in range(i + 1, n + 1):
            dist = oracle_edit_distance(candidate, source[i:j])
            sim = 1.0 - dist / max(len(candidate), j - i)
            if sim > best[0]:
                best = (sim, i, j)
    return best


def inject_whitespace(phrase: str, rng, max_insertions: int = 4) -> str:
    """Whitespace-injection oracle for tolerant-pattern checks.

    Inserts 1..max_insertions whitespace strings at interior positions,
    guaranteeing at least one break strictly inside the phrase.
    """
    assert len(phrase) >= 2
    n_ins = rng.randint(1, max_insertions)
    positions = sorted(rng.sample(range(1, len(phrase)), min(n_ins, len(phrase) - 1)),
                       reverse=True)
    fillers = [" ", "  ", "\n", "\t", " \n ", "\n\n"]
    out = phrase
    for pos in positions:
        out = out[:pos] + rng.choice(fillers) + out[pos:]
    return out
