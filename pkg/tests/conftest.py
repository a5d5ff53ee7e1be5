from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from verdictfacts.fixtures import FixtureSpec, generate_corpus
from verdictfacts.ingest import VerdictDocument
from verdictfacts.markers import default_marker_set


def make_doc(text: str, doc_id: str = "doc-1", court: str = "District Court Vrbove",
             docket: str = "1T/10/2020", year: int = 2020) -> VerdictDocument:
    return VerdictDocument(doc_id, court, docket, year, text)


@pytest.fixture(scope="session")
def markers():
    return default_marker_set()


@pytest.fixture(scope="session")
def small_corpus():
    """60 documents: mixed categories, deterministic."""
    spec = FixtureSpec(n_docs=60, seed=424242, clean_fraction=0.4,
                       noisy_fraction=0.5, pathological_fraction=0.1)
    return generate_corpus(spec)


@pytest.fixture(scope="session")
def acceptance_corpus():
    """The seeded 400-document corpus used by the acceptance suite."""
    spec = FixtureSpec(n_docs=400, seed=20250809, clean_fraction=0.405,
                       noisy_fraction=0.565, pathological_fraction=0.03)
    return generate_corpus(spec)
