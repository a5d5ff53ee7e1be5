from __future__ import annotations

import json
import random

import pytest

from conftest import make_doc
from verdictfacts.markers import (
    MarkerSet,
    collapse,
    collapse_spacing,
    default_marker_set,
    detect_spaced_runs,
    load_marker_set,
    make_marker_set,
    mine_marker_candidates,
)


class TestDetectSpacedRuns:
    def test_single_heading(self):
        spans = detect_spaced_runs("R o z s u d o k")
        assert len(spans) == 1
        assert spans[0].collapsed == "Rozsudok"
        assert (spans[0].start_offset, spans[0].end_offset) == (0, 15)

    def test_plain_prose_has_no_runs(self):
        assert detect_spaced_runs("the court decided") == []

    def test_short_word_pairs_are_not_runs(self):
        assert detect_spaced_runs("the damage of a bicycle to a value") == []

    def test_glued_pair_tolerated(self):
        spans = detect_spaced_runs("U zn e s e n i e")
        assert len(spans) == 1
        assert spans[0].collapsed == "Uznesenie"

    def test_runs_are_sorted_and_disjoint(self):
        text = "J u d g m e n t\nsome body text\nR e a s o n i n g\nmore"
        spans = detect_spaced_runs(text)
        assert [s.collapsed for s in spans] == ["Judgment", "Reasoning"]
        for prev, cur in zip(spans, spans[1:]):
            assert prev.end_offset <= cur.start_offset

    def test_offsets_index_raw_text(self):
        text = "prefix\n\nV ý r o k\n\nsuffix"
        (span,) = detect_spaced_runs(text)
        assert text[span.start_offset:span.end_offset] == span.raw
        assert collapse(span) == span.collapsed == "Výrok"

    def test_not_letter_bounded_left(self):
        # the left neighbour is a letter, so the leading unit is not a run start
        spans = detect_spaced_runs("word R o z s u d o k")
        assert [s.collapsed for s in spans] == ["Rozsudok"]

    def test_round_trip_random_words(self):
        rng = random.Random(42)
        alphabet = "abcdefghijklmnoprstuvzáčďéíľňóšťúýž"
        for _ in range(200):
            word = "".join(rng.choice(alphabet) for _ in range(rng.randint(2, 12)))
            spaced = " ".join(word)
            text = f"neutral context before\n{spaced}\nneutral context after"
            spans = detect_spaced_runs(text)
            assert len(spans) == 1, (word, spans)
            assert spans[0].collapsed == word


class TestCollapse:
    def test_paper_style_example(self):
        assert collapse_spacing("L I K E T H I S") == "LIKETHIS"

    def test_uznesenie(self):
        assert collapse_spacing("U z n e s e n i e") == "Uznesenie"

    def test_idempotent(self):
        once = collapse_spacing("R o z s u d o k")
        assert collapse_spacing(once) == once

    def test_double_spaces_preserved(self):
        assert collapse_spacing("two  words") == "two  words"

    def test_consistency_with_detection(self):
        text = "x\nS ú d\ny"
        (span,) = detect_spaced_runs(text)
        assert collapse_spacing(span.raw) == span.collapsed


class TestMineMarkers:
    def test_uniform_corpus(self):
        docs = [
            make_doc(f"R o z s u d o k\n\nbody text {i}\n\nO d ô v o d n e n i e\nmore",
                     doc_id=f"d{i}")
            for i in range(10)
        ]
        candidates = mine_marker_candidates(docs)
        assert candidates[0].expression == "rozsudok"
        assert candidates[0].document_count == 10
        assert candidates[0].position_rank_histogram == {1: 10}

    def test_tie_break_by_position(self):
        docs = [
            make_doc("A b c filler " + "x" * 50 + " D e f tail", doc_id=f"d{i}")
            for i in range(4)
        ]
        candidates = mine_marker_candidates(docs)
        assert [c.expression for c in candidates[:2]] == ["abc", "def"]

    def test_planted_frequencies(self):
        docs = []
        for i in range(30):
            parts = ["V ý r o k\n\nbody\n"]
            if i < 18:
                parts.append("P o u č e n i e\n\nmore\n")
            if i < 5:
                parts.append("T r o v y\n\nend\n")
            docs.append(make_doc("".join(parts), doc_id=f"d{i}"))
        counts = {c.expression: c.document_count for c in mine_marker_candidates(docs)}
        assert counts["vyrok"] == 30
        assert counts["poucenie"] == 18
        assert counts["trovy"] == 5

    def test_permutation_invariant(self):
        rng = random.Random(7)
        docs = [
            make_doc(f"J u d g m e n t\ntext {i}\nR e a s o n i n g\n", doc_id=f"d{i}")
            for i in range(12)
        ]
        base = mine_marker_candidates(docs)
        shuffled = docs[:]
        rng.shuffle(shuffled)
        assert mine_marker_candidates(shuffled) == base

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            mine_marker_candidates([])

    def test_relative_positions_in_unit_interval(self, small_corpus):
        for candidate in mine_marker_candidates(small_corpus.docs):
            assert 0.0 <= candidate.mean_relative_position <= 1.0


class TestMarkerSet:
    def test_default_set_contents(self):
        ms = default_marker_set()
        assert "is found guilty that" in ms.start_markers
        assert "therefore" in ms.end_markers and "thus" in ms.end_markers

    def test_cross_listed_phrase_rejected(self):
        with pytest.raises(ValueError):
            make_marker_set(["alpha", "beta"], ["beta"])

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            MarkerSet((), ("x",))

    def test_load_from_config(self, tmp_path):
        path = tmp_path / "markers.json"
        start = [f"opener variant number {i}" for i in range(40)]
        end = ["closer one", "closer two"]
        path.write_text(json.dumps({"start_markers": start, "end_markers": end}))
        ms = load_marker_set(path)
        assert len(ms.start_markers) == 40
        assert len(ms.end_markers) == 2

    def test_load_rejects_duplicate_across_lists(self, tmp_path):
        path = tmp_path / "markers.json"
        path.write_text(json.dumps({"start_markers": ["same"], "end_markers": ["same"]}))
        with pytest.raises(ValueError):
            load_marker_set(path)

    def test_phrases_stored_folded(self):
        ms = make_marker_set(["Je  Vinný,  Že"], ["a preto"])
        assert ms.start_markers == ("je vinny, ze",)
