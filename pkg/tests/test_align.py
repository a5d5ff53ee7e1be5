from __future__ import annotations

import random

import pytest

from verdictfacts.align import (
    EXACT_SEARCH_LIMIT,
    edit_distance,
    ground,
    locate_span,
    normalize_text,
    similarity,
)
from oracles import (
    oracle_best_folded_span,
    oracle_edit_distance,
    oracle_naive_best_span,
    oracle_similarity,
)

SK_ALPHABET = "aábcčdďeéfghiíjklĺľmnňoóôpqrŕřsštťuúvwxyýzž AÁBCČDĎEÉŠŽÚ  \n\t.,;:0123456789"


def random_text(rng: random.Random, lo: int, hi: int, alphabet: str = SK_ALPHABET) -> str:
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(lo, hi)))


class TestNormalizeText:
    def test_diacritic_and_case_fold(self):
        assert normalize_text("Súd").folded == "sud"

    def test_whitespace_collapse(self):
        assert normalize_text("a   b\n c").folded == "a b c"

    def test_strip_edges(self):
        assert normalize_text("  x y  ").folded == "x y"

    def test_empty(self):
        nt = normalize_text("")
        assert nt.folded == "" and nt.offset_map == ()

    def test_offset_map_covers_folded(self):
        nt = normalize_text("Súdne  rozhodnutie\nč. 4")
        assert len(nt.offset_map) == len(nt.folded)
        starts = [s for s, _ in nt.offset_map]
        assert starts == sorted(starts)

    def test_projection_recovers_source_region(self):
        text = "Okresný súd   Vrbové rozhodol"
        nt = normalize_text(text)
        pos = nt.folded.index("vrbove")
        start, end = nt.project(pos, pos + len("vrbove"))
        assert text[start:end] == "Vrbové"

    def test_idempotent_on_random_strings(self):
        rng = random.Random(101)
        for _ in range(300):
            text = random_text(rng, 0, 80)
            once = normalize_text(text).folded
            assert normalize_text(once).folded == once

    def test_projection_round_trip_on_random_strings(self):
        rng = random.Random(202)
        checked = 0
        while checked < 300:
            text = random_text(rng, 5, 80)
            nt = normalize_text(text)
            if len(nt.folded) < 3:
                continue
            a = rng.randrange(0, len(nt.folded) - 1)
            b = rng.randrange(a + 1, len(nt.folded) + 1)
            piece = nt.folded[a:b]
            if piece != piece.strip():  # spans snapped to non-space edges round-trip
                continue
            start, end = nt.project(a, b)
            assert normalize_text(text[start:end]).folded == piece
            checked += 1


class TestSimilarity:
    def test_identity(self):
        for s in ("", "a", "súd", "the quick brown fox"):
            assert similarity(s, s) == 1.0

    def test_diacritics_equal(self):
        assert similarity("sud", "súd") == 1.0

    def test_case_and_whitespace_fold(self):
        assert similarity("Okresny  sud", "okresný súd") == 1.0

    def test_empty_vs_nonempty(self):
        assert similarity("", "abc") == 0.0

    def test_one_iff_folded_equal(self):
        assert similarity("abc", "abd") < 1.0

    def test_symmetry_and_bounds_random(self):
        rng = random.Random(303)
        for _ in range(300):
            a = random_text(rng, 0, 50)
            b = random_text(rng, 0, 50)
            s1 = similarity(a, b)
            s2 = similarity(b, a)
            assert s1 == s2
            assert 0.0 <= s1 <= 1.0

    def test_matches_independent_dp_oracle(self):
        rng = random.Random(404)
        for _ in range(200):
            a = random_text(rng, 0, 60)
            b = random_text(rng, 0, 60)
            assert similarity(a, b) == oracle_similarity(a, b)

    def test_edit_distance_against_oracle(self):
        rng = random.Random(505)
        for _ in range(200):
            a = random_text(rng, 0, 40, "abcď ")
            b = random_text(rng, 0, 40, "abcď ")
            assert edit_distance(a, b) == oracle_edit_distance(a, b)


class TestLocateSpan:
    def test_exact_substring_scores_one(self):
        src = "x" * 40 + " the well hidden fragment sits here " + "y" * 40
        m = locate_span("well hidden fragment", src)
        assert m.score == 1.0
        assert src[m.start_offset:m.end_offset] == "well hidden fragment"

    def test_typos_still_locate_same_region(self):
        rng = random.Random(606)
        src = ("on 3 June 2020 at about 22:40 in Vrbove he forced open the door "
               "of house no. 8 and took a bicycle worth 540 euro,")
        excerpt = src[10:90]
        chars = list(excerpt)
        for pos in rng.sample(range(len(chars)), 2):
            chars[pos] = "q"
        m = locate_span("".join(chars), src)
        assert m.score >= 0.95
        grounded = src[m.start_offset:m.end_offset]
        assert similarity(grounded, excerpt) > 0.9

    def test_earliest_span_wins_ties(self):
        src = "abab abab"
        m = locate_span("abab", src)
        assert (m.start_offset, m.end_offset) == (0, 4)

    def test_matches_bruteforce_on_small_instances(self):
        rng = random.Random(707)
        for trial in range(60):
            source = random_text(rng, 10, 90, "abcd efg")
            if not normalize_text(source).folded:
                continue
            if rng.random() < 0.5:
                lo = rng.randrange(0, max(1, len(source) - 8))
                candidate = source[lo : lo + rng.randint(3, 12)]
            else:
                candidate = random_text(rng, 2, 12, "abcd efg")
            fc = normalize_text(candidate).folded
            if not fc:
                continue
            norm = normalize_text(source)
            got = locate_span(candidate, source)
            want_score, want_i, want_j = oracle_best_folded_span(fc, norm.folded)
            want_start, want_end = norm.project(want_i, want_j)
            assert got.score == pytest.approx(want_score, abs=0), (candidate, source)
            assert (got.start_offset, got.end_offset) == (want_start, want_end)

    def test_oracle_agrees_with_naive_reference(self):
        rng = random.Random(808)
        for _ in range(25):
            source = random_text(rng, 5, 30, "abc d")
            candidate = random_text(rng, 1, 8, "abc d")
            fs = normalize_text(source).folded
            fc = normalize_text(candidate).folded
            if not fs or not fc:
                continue
            assert oracle_best_folded_span(fc, fs) == oracle_naive_best_span(fc, fs)

    def test_long_source_exact_substring(self):
        rng = random.Random(909)
        body = random_text(rng, 1400, 1600, "abcdefghij klmnop")
        needle = "sentinel fragment planted deep in the body"
        src = body[:700] + " " + needle + " " + body[700:]
        assert len(normalize_text(src).folded) > EXACT_SEARCH_LIMIT
        m = locate_span(needle, src)
        assert m.score == 1.0
        assert src[m.start_offset:m.end_offset] == needle


class TestGround:
    def test_returns_exact_source_substring(self):
        src = "The accused took the bicycle from the yard and sold it."
        g = ground("took the bicyle from the yard", src)
        assert g is not None
        assert g.text == src[g.start_offset:g.end_offset]
        assert g.text in src

    def test_never_emits_invented_clause(self):
        src = "he took a bicycle worth 540 euro from the cellar of house no. 8,"
        fabricated = "he took a bicycle worth 540 euro and also stole a car"
        g = ground(fabricated, src)
        if g is not None:
            assert g.text in src
            assert "car" not in g.text

    def test_below_threshold_is_no_match(self):
        src = "completely unrelated text about gardening and the weather"
        assert ground("zzzz qqqq xxxx yyyy wwww", src, 0.8) is None

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            ground("a", "b", 1.5)

    def test_empty_candidate_is_no_match(self):
        assert ground("", "some text") is None
        assert ground("   ", "some text") is None

    def test_adversarial_substring_guarantee(self):
        rng = random.Random(1001)
        src_pool = [random_text(rng, 120, 400) for _ in range(10)]
        for _ in range(300):
            src = rng.choice(src_pool)
            mode = rng.randrange(3)
            if mode == 0:  # mutated excerpt
                lo = rng.randrange(0, max(1, len(src) - 30))
                piece = list(src[lo : lo + rng.randint(10, 60)])
                for pos in rng.sample(range(len(piece)), min(4, len(piece))):
                    piece[pos] = rng.choice("qwxyz")
                candidate = "".join(piece)
            elif mode == 1:  # truncated excerpt
                lo = rng.randrange(0, max(1, len(src) - 30))
                candidate = src[lo : lo + rng.randint(5, 25)]
            else:  # wholly invented
                candidate = random_text(rng, 5, 60, "qwxyz ")
            if not normalize_text(candidate).folded:
                continue
            g = ground(candidate, src, 0.3)
            if g is not None:
                assert g.text == src[g.start_offset:g.end_offset]
