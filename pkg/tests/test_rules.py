from __future__ import annotations

import random
import re

import pytest

from conftest import make_doc
from oracles import inject_whitespace
from verdictfacts.markers import make_marker_set
from verdictfacts.rules import (
    Method,
    Status,
    advanced_extract,
    baseline_extract,
    compile_marker_set,
    compile_tolerant,
    load_baseline_phrases,
)

START = ["is found guilty that", "is found guilty", "they are guilty that",
         "is acknowledged as guilty that", "is acknowledged guilty that"]
END = ["therefore"]


def verdict_text(marker: str = "is found guilty that", closer: str = "therefore",
                 fact: str = "he stole a bicycle from the yard of house no. 14,") -> str:
    return (
        "District Court Vrbove\nCase no. 2T/45/2020\n\n"
        "J u d g m e n t\n\n"
        "The accused Pavol Hruska\n\n"
        f"{marker}\n\n{fact}\n\n{closer}\n\n"
        "he committed the offence of theft,\n\nand is sentenced to a fine.\n\n"
        "R e a s o n i n g\n\nThe court heard the witnesses.\n"
    )


class TestBaseline:
    def test_clean_document_extracts_fact(self):
        doc = make_doc(verdict_text())
        out = baseline_extract(doc, START, END)
        assert out.status is Status.EXTRACTED
        assert out.text == "he stole a bicycle from the yard of house no. 14,"
        assert doc.raw_text[out.start_offset:out.end_offset] == out.text

    def test_table_style_construction(self):
        doc = make_doc("X is found guilty that he stole a bicycle, therefore he is punished")
        out = baseline_extract(doc, START, END)
        assert out.status is Status.EXTRACTED
        assert out.text == "he stole a bicycle,"

    def test_line_break_inside_phrase_defeats_baseline(self):
        doc = make_doc(verdict_text(marker="is found\nguilty that"))
        out = baseline_extract(doc, START, END)
        assert out.status is Status.NO_MATCH
        assert "start" in out.diagnostics

    def test_no_end_phrase_after_start(self):
        doc = make_doc("intro is found guilty that something happened and nothing closes")
        out = baseline_extract(doc, START, END)
        assert out.status is Status.NO_MATCH

    def test_longest_phrase_wins_at_same_offset(self):
        doc = make_doc("X is found guilty that he lied, therefore end")
        out = baseline_extract(doc, START, END)
        assert out.text == "he lied,"  # not "that he lied,"

    def test_empty_phrase_lists_rejected(self):
        doc = make_doc("text")
        with pytest.raises(ValueError):
            baseline_extract(doc, [], END)

    def test_packaged_baseline_phrases(self):
        starts, ends = load_baseline_phrases()
        assert "is found guilty that" in starts
        assert ends == ["therefore"]


class TestTolerantPattern:
    def test_matches_plain_phrase(self):
        assert compile_tolerant("guilty").search("he is guilty here")

    def test_matches_spaced_and_broken_variants(self):
        pat = compile_tolerant("guilty")
        assert pat.search("g u i l t y")
        assert pat.search("gui\nlty")

    def test_diacritic_variants_equal(self):
        pat = compile_tolerant("je vinny ze")
        assert pat.search("obzalovaný je vinný že dna")
        pat2 = compile_tolerant("je vinný že")
        assert pat2.search("on je vinny ze")

    def test_case_insensitive(self):
        assert compile_tolerant("Therefore").search("THEREFORE")

    def test_literal_specials(self):
        pat = compile_tolerant("no. 8 (a)")
        assert pat.search("at no. 8 (a) street")
        assert pat.search("at no.  8  ( a ) street")

    def test_empty_phrase_rejected(self):
        with pytest.raises(ValueError):
            compile_tolerant("")

    def test_random_injections_always_match(self):
        rng = random.Random(99)
        phrases = START + ["therefore", "thus"]
        for phrase in phrases:
            pat = compile_tolerant(phrase)
            for _ in range(120):
                variant = inject_whitespace(phrase, rng)
                m = pat.search(variant)
                assert m is not None, (phrase, repr(variant))
                assert variant.find(phrase) == -1  # baseline literal search fails


class TestAdvancedExtract:
    @pytest.fixture()
    def marker_set(self):
        return make_marker_set(START, ["therefore", "thus"])

    def test_clean_document(self, marker_set):
        doc = make_doc(verdict_text())
        out = advanced_extract(doc, marker_set)
        assert out.status is Status.EXTRACTED
        assert out.text == "he stole a bicycle from the yard of house no. 14,"

    def test_broken_marker_still_extracts(self, marker_set):
        doc = make_doc(verdict_text(marker="is  fo\nund gu ilty   that"))
        out = advanced_extract(doc, marker_set)
        assert out.status is Status.EXTRACTED
        assert out.text == "he stole a bicycle from the yard of house no. 14,"

    def test_spaced_heading_fallback_when_no_closer(self, marker_set):
        text = (
            "intro\n\nis found guilty that\n\n"
            "he damaged the fence of the local school,\n\n"
            "R e a s o n i n g\n\nevidence discussion\n"
        )
        doc = make_doc(text)
        out = advanced_extract(doc, marker_set)
        assert out.status is Status.EXTRACTED
        assert out.text == "he damaged the fence of the local school,"
        assert "spaced-heading" in out.diagnostics

    def test_no_start_marker(self, marker_set):
        doc = make_doc("a purely procedural ruling with no phrases of interest")
        out = advanced_extract(doc, marker_set)
        assert out.status is Status.NO_MATCH
        assert "start" in out.diagnostics

    def test_start_but_no_terminator(self, marker_set):
        doc = make_doc("x is found guilty that something happened and text just ends")
        out = advanced_extract(doc, marker_set)
        assert out.status is Status.NO_MATCH

    def test_verbatim_offsets(self, marker_set):
        doc = make_doc(verdict_text(marker="is fou nd guilty that", closer="the refore"))
        out = advanced_extract(doc, marker_set)
        assert out.status is Status.EXTRACTED
        assert doc.raw_text[out.start_offset:out.end_offset] == out.text

    def test_marker_excluded_from_payload(self, marker_set):
        doc = make_doc(verdict_text())
        out = advanced_extract(doc, marker_set)
        compiled = compile_marker_set(marker_set)
        for pattern in compiled.start_patterns:
            m = pattern.search(doc.raw_text)
            if m:
                assert not (out.start_offset < m.end() and m.start() < out.end_offset)

    def test_monotone_tolerance_over_baseline(self, marker_set):
        rng = random.Random(1234)
        for i in range(40):
            marker = rng.choice(START)
            closer = "therefore"
            fact = f"he took item number {i} from the storage room,"
            doc = make_doc(verdict_text(marker=marker, closer=closer, fact=fact),
                           doc_id=f"d{i}")
            base = baseline_extract(doc, START, END)
            adv = advanced_extract(doc, marker_set)
            if base.status is Status.EXTRACTED:
                assert adv.status is Status.EXTRACTED

    def test_determinism(self, marker_set):
        doc = make_doc(verdict_text(marker="is fo und guilty that"))
        first = advanced_extract(doc, marker_set)
        second = advanced_extract(doc, marker_set)
        assert first == second

    def test_method_tags(self, marker_set):
        doc = make_doc(verdict_text())
        assert baseline_extract(doc, START, END).method is Method.BASELINE
        assert advanced_extract(doc, marker_set).method is Method.ADVANCED
