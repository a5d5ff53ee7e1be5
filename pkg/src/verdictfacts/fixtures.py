"""Synthetic verdict corpora with known ground truth and scripted provider replays.

Real decision corpora carry personal data and cannot ship with the package,
so every test and demo runs on generated documents instead.  Generated
decisions mirror the structural conventions that the extractors rely on: a
dispositive part with letter-spaced headings, a guilt phrase opening the
factual statement and a connective closing it, followed by a reasoning
section.  Generation is fully determined by the seed.

Three document categories control the failure modes:

* clean         - canonical phrasing; the literal baseline matcher works.
* noisy         - whitespace injected inside the opening phrase (and
                  sometimes the closing one); only tolerant patterns work.
* pathological  - no marker phrases at all.  Flavors: "recoverable" (a
                  factual statement exists for the generation fallback to
                  find), "refusal" (the scripted provider refuses), and
                  "absent" (a procedural decision with no factual statement).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .align import locate_span, normalize_text, similarity
from .evaluate import GoldAnnotation
from .ingest import AdminRecord, VerdictDocument
from .llm import (
    FACT_FIELD,
    STATUS_OK,
    STATUS_SAFETY,
    Exemplar,
    parse_model_output,
    prompt_hash,
    render_prompt,
    tokens_for_chars,
)
from .markers import MarkerSet, default_marker_set

CATEGORY_CLEAN = "clean"
CATEGORY_NOISY = "noisy"
CATEGORY_PATHOLOGICAL = "pathological"

FLAVOR_RECOVERABLE = "recoverable"
FLAVOR_REFUSAL = "refusal"
FLAVOR_ABSENT = "absent"


@dataclass(frozen=True)
class FixtureSpec:
    """Deterministic recipe for a synthetic corpus."""

    n_docs: int
    seed: int
    clean_fraction: float
    noisy_fraction: float
    pathological_fraction: float
    language_profile: str = "neutral-sk"
    # within pathological docs: recoverable, refusal, absent
    pathological_mix: tuple[float, float, float] = (10 / 12, 1 / 12, 1 / 12)

    def __post_init__(self) -> None:
        if self.n_docs <= 0:
            raise ValueError("n_docs must be positive")
        total = self.clean_fraction + self.noisy_fraction + self.pathological_fraction
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"category fractions must sum to 1, got {total}")
        if any(f < 0 for f in (self.clean_fraction, self.noisy_fraction,
                               self.pathological_fraction)):
            raise ValueError("fractions must be non-negative")
        if abs(sum(self.pathological_mix) - 1.0) > 1e-9:
            raise ValueError("pathological_mix must sum to 1")
        if self.language_profile not in PROFILES:
            raise ValueError(f"unknown language profile {self.language_profile!r}")

    @classmethod
    def from_json(cls, path: str | Path) -> "FixtureSpec":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        mix = payload.get("pathological_mix")
        return cls(
            n_docs=int(payload["n_docs"]),
            seed=int(payload["seed"]),
            clean_fraction=float(payload["clean_fraction"]),
            noisy_fraction=float(payload["noisy_fraction"]),
            pathological_fraction=float(payload["pathological_fraction"]),
            language_profile=payload.get("language_profile", "neutral-sk"),
            pathological_mix=tuple(mix) if mix else (10 / 12, 1 / 12, 1 / 12),
        )


@dataclass(frozen=True)
class PlantedDoc:
    """Generation metadata for one document."""

    doc_id: str
    category: str
    flavor: str | None
    gold_start: int | None
    gold_end: int | None
    start_marker: str | None
    end_marker: str | None


@dataclass
class FixtureCorpus:
    spec: FixtureSpec
    docs: list[VerdictDocument]
    gold: dict[str, GoldAnnotation]
    plants: dict[str, PlantedDoc] = field(default_factory=dict)

    def doc(self, doc_id: str) -> VerdictDocument:
        return next(d for d in self.docs if d.doc_id == doc_id)


def _allocate(n: int, fractions: Sequence[float]) -> list[int]:
    """Integer allocation by largest remainder; sums to n exactly."""
    raw = [f * n for f in fractions]
    counts = [int(x) for x in raw]
    remainder = n - sum(counts)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    return counts


_CITIES = ["Vrbove", "Lukov", "Zelenec", "Sumiac", "Kralovce", "Bystra", "Mokrany", "Podhajska"]
_CITIES_SK = ["Vrbové", "Lukov", "Zelenec", "Šumiac", "Kráľovce", "Bystrá", "Mokraňy", "Podhájska"]
_STREETS = ["Stanicna", "Kvetna", "Mlynska", "Polna", "Kratka", "Lipova", "Zahradna"]
_STREETS_SK = ["Staničná", "Kvetná", "Mlynská", "Poľná", "Krátka", "Lipová", "Záhradná"]
_JUDGES = ["Marta Kovalova", "Peter Oravec", "Ivana Mrazova", "Juraj Polak", "Alena Dudova"]
_JUDGES_SK = ["Marta Kováľová", "Peter Oravec", "Ivana Mrázová", "Juraj Polák", "Alena Dudová"]
_ACCUSED = ["Pavol Hruska", "Milan Cerny", "Roman Kral", "Stefan Mlady", "Igor Havran",
            "Marek Dolny", "Viktor Zima", "Ondrej Sykora"]
_ACCUSED_SK = ["Pavol Hruška", "Milan Čierny", "Roman Kráľ", "Štefan Mladý", "Igor Havran",
               "Marek Dolný", "Viktor Zima", "Ondrej Sýkora"]
_VICTIMS = ["Jozef Badura", "Jana Cerna", "Eva Mala", "Tomas Bielik", "Lucia Hruba",
            "Karol Vesely", "Dana Tichá", "Martin Sivák"]
_MONTHS = ["January", "February", "March", "April", "May", "June", "July",
           "August", "September", "October", "November", "December"]
_ITEMS = ["mountain bicycle", "laptop computer", "power drill", "chainsaw",
          "television set", "welding machine"]
_OFFENCES = ["theft", "fraud", "bodily harm", "neglect of compulsory maintenance",
             "endangerment under the influence of an addictive substance"]
_SENTENCES = [
    "eight months of imprisonment, conditionally suspended for a probation period of two years",
    "a fine of six hundred euro and, in default, two months of imprisonment",
    "twelve months of imprisonment, conditionally suspended for a probation period of thirty months",
    "community service in the extent of one hundred and eighty hours",
]
_FILLER = [
    "The court established the facts from the testimony of the injured party and from the documentary evidence in the file.",
    "The accused made use of his right not to testify and the court relied on the evidence secured during the investigation.",
    "The expert opinion on the amount of the damage was not contested by either party.",
    "When setting the sentence the court took into account the previously clean record of the accused.",
    "The injured party was referred with the remainder of the damages claim to civil proceedings.",
    "Costs of the proceedings are borne by the state in accordance with the code of criminal procedure.",
]

PROFILES = {
    "neutral-ascii": {
        "cities": _CITIES, "streets": _STREETS, "judges": _JUDGES,
        "accused": _ACCUSED, "victims": [v.replace("á", "a").replace("í", "i") for v in _VICTIMS],
    },
    "neutral-sk": {
        "cities": _CITIES_SK, "streets": _STREETS_SK, "judges": _JUDGES_SK,
        "accused": _ACCUSED_SK, "victims": _VICTIMS,
    },
}

_WS_INJECTIONS = ["\n", "  ", " \n", "\n ", "\t"]


def _fact_sentence(rng: random.Random, profile: dict, year: int) -> str:
    city = rng.choice(profile["cities"])
    street = rng.choice(profile["streets"])
    victim = rng.choice(profile["victims"])
    day = rng.randint(1, 28)
    month = rng.choice(_MONTHS)
    hour = rng.randint(8, 23)
    minute = rng.choice((5, 10, 15, 20, 30, 40, 45, 50))
    scenario = rng.randrange(6)
    if scenario == 0:
        item = rng.choice(_ITEMS)
        worth = rng.randrange(120, 980, 5)
        extra = rng.randrange(20, 120, 5)
        return (
            f"on {day} {month} {year} at about {hour}:{minute:02d} in {city} on "
            f"{street} street he broke the lock on the cellar door of house no. "
            f"{rng.randint(2, 48)}, entered the cellar and took a {item} worth "
            f"{worth} euro together with hand tools worth {extra} euro, causing "
            f"{victim} damage of {worth + extra} euro in total,"
        )
    if scenario == 1:
        monthly = rng.randrange(80, 260, 10)
        months_owed = rng.randint(3, 9)
        return (
            f"in the period from {month} {year} to {rng.choice(_MONTHS)} {year} in "
            f"{city}, although he was obliged by a final court decision to "
            f"contribute {monthly} euro monthly to the maintenance of his minor "
            f"child, he did not pay any contribution and owes {victim} the amount "
            f"of {monthly * months_owed} euro,"
        )
    if scenario == 2:
        days = rng.randint(7, 21)
        return (
            f"on {day} {month} {year} at about {hour}:{minute:02d} in {city} in "
            f"front of the house at {street} street no. {rng.randint(2, 40)} he "
            f"struck {victim} twice in the face with his fist, knocking him to "
            f"the ground and causing him bruising of the cheek and a cut lip "
            f"with a healing time of about {days} days,"
        )
    if scenario == 3:
        grams = rng.randint(4, 45)
        bags = rng.randint(2, 12)
        return (
            f"from {month} {year} until a house search on {day} "
            f"{rng.choice(_MONTHS)} {year} in {city} he kept in his flat at "
            f"{street} street no. {rng.randint(2, 40)} a total of {bags} plastic "
            f"bags containing {grams} grams of dried cannabis plant material "
            f"intended for his own consumption,"
        )
    if scenario == 4:
        promille = rng.choice(("0.52", "0.61", "0.74", "0.88", "1.02"))
        return (
            f"on {day} {month} {year} at about {hour}:{minute:02d} in {city} he "
            f"drove the passenger car with registration plate "
            f"{rng.choice('BLZKM')}{rng.choice('ABEHKT')}-{rng.randint(100, 999)}"
            f"{rng.choice('ABCDEF')}{rng.choice('HJKL')} along {street} street "
            f"although a breath test carried out by the police patrol showed "
            f"{promille} milligrams of alcohol per litre of his breath,"
        )
    amount = rng.randrange(150, 900, 10)
    return (
        f"in {month} {year} in {city}, presenting himself untruthfully as an "
        f"employee of the power distribution company, he induced {victim} to "
        f"hand over {amount} euro as an alleged meter reading deposit, which "
        f"he kept for himself and used for his own needs,"
    )


def _inject_whitespace(marker: str, rng: random.Random) -> str:
    """Break the literal phrase: whitespace inside the word "guilty" plus a
    couple of extra injections elsewhere."""
    anchor = marker.find("guilty")
    cut = anchor + rng.randint(1, len("guilty") - 1) if anchor >= 0 else rng.randint(1, len(marker) - 1)
    out = marker[:cut] + rng.choice(_WS_INJECTIONS) + marker[cut:]
    for _ in range(rng.randint(0, 2)):
        pos = rng.randint(1, len(out) - 1)
        if out[pos - 1].isspace() or out[pos].isspace():
            continue
        out = out[:pos] + rng.choice(_WS_INJECTIONS) + out[pos:]
    return out


class _DocBuilder:
    def __init__(self) -> None:
        self.parts: list[str] = []
        self.length = 0

    def add(self, text: str) -> int:
        offset = self.length
        self.parts.append(text)
        self.length += len(text)
        return offset

    def text(self) -> str:
        return "".join(self.parts)


def _build_document(index: int, category: str, flavor: str | None,
                    spec: FixtureSpec, rng: random.Random,
                    markers: MarkerSet) -> tuple[VerdictDocument, GoldAnnotation, PlantedDoc]:
    profile = PROFILES[spec.language_profile]
    year = 2018 + index % 5
    city = rng.choice(profile["cities"])
    court = f"District Court {city}"
    docket = f"{1 + index % 9}T/{40 + index}/{year}"
    doc_id = f"vf-{spec.seed}-{index:05d}"
    judge = rng.choice(profile["judges"])
    accused = rng.choice(profile["accused"])

    start_marker: str | None = None
    end_marker: str | None = None
    fact: str | None = None
    gold_span: tuple[int, int] | None = None

    b = _DocBuilder()
    b.add(f"{court}\nCase no. {docket}\n\n")
    b.add("J u d g m e n t\n\n")
    b.add("In the name of the Republic\n\n")
    b.add(
        f"The {court}, by judge {judge}, in the criminal matter against the "
        f"accused {accused}, born {rng.randint(1, 28)} {rng.choice(_MONTHS)} "
        f"{rng.randint(1958, 1999)}, decided at the main hearing held on "
        f"{rng.randint(1, 28)} {rng.choice(_MONTHS)} {year} as follows:\n\n"
    )

    if category in (CATEGORY_CLEAN, CATEGORY_NOISY):
        fact = _fact_sentence(rng, profile, year)
        start_marker = rng.choice(markers.start_markers)
        end_marker = "therefore" if category == CATEGORY_CLEAN else rng.choice(markers.end_markers)
        subject = "The accused" if "they" not in start_marker else "The accused persons"
        b.add(f"{subject} {accused}\n\n")
        rendered_start = start_marker if category == CATEGORY_CLEAN else _inject_whitespace(start_marker, rng)
        b.add(rendered_start + "\n\n")
        fact_offset = b.add(fact)
        gold_span = (fact_offset, fact_offset + len(fact))
        rendered_end = end_marker
        if category == CATEGORY_NOISY and rng.random() < 0.5:
            pos = rng.randint(1, len(rendered_end) - 1)
            rendered_end = rendered_end[:pos] + rng.choice(_WS_INJECTIONS) + rendered_end[pos:]
        b.add("\n\n" + rendered_end + "\n\n")
        b.add(
            f"he committed the offence of {rng.choice(_OFFENCES)} under section "
            f"{rng.randint(156, 289)} paragraph {rng.randint(1, 3)} of the "
            f"criminal code,\n\n"
            f"and is sentenced to {rng.choice(_SENTENCES)}.\n\n"
        )
    elif flavor in (FLAVOR_RECOVERABLE, FLAVOR_REFUSAL):
        fact = _fact_sentence(rng, profile, year)
        b.add(f"The accused {accused}\n\n")
        b.add("has according to the findings of the court committed the following acts:\n\n")
        fact_offset = b.add(fact)
        gold_span = (fact_offset, fact_offset + len(fact))
        b.add(
            f"\n\nby this conduct he fulfilled the elements of the offence of "
            f"{rng.choice(_OFFENCES)} under section {rng.randint(156, 289)} of "
            f"the criminal code and is sentenced to {rng.choice(_SENTENCES)}.\n\n"
        )
    else:  # absent: purely procedural decision, no factual statement
        b.add(
            f"Under section {rng.randint(215, 283)} paragraph 1 of the code of "
            f"criminal procedure the criminal prosecution against the accused "
            f"{accused} is discontinued, because the act has become time-barred.\n\n"
        )

    b.add("R e a s o n i n g\n\n")
    filler = rng.sample(_FILLER, rng.randint(2, 4))
    b.add(" ".join(filler) + "\n")

    doc = VerdictDocument(doc_id, court, docket, year, b.text())
    if fact is not None:
        gold = GoldAnnotation(doc_id, True, fact)
    else:
        gold = GoldAnnotation(doc_id, False, "")
    plant = PlantedDoc(
        doc_id=doc_id,
        category=category,
        flavor=flavor,
        gold_start=gold_span[0] if gold_span else None,
        gold_end=gold_span[1] if gold_span else None,
        start_marker=start_marker,
        end_marker=end_marker,
    )
    return doc, gold, plant


def generate_corpus(spec: FixtureSpec, markers: MarkerSet | None = None) -> FixtureCorpus:
    """Generate a corpus, its gold annotations and the planted metadata."""
    markers = markers or default_marker_set()
    n_clean, n_noisy, n_path = _allocate(
        spec.n_docs, (spec.clean_fraction, spec.noisy_fraction, spec.pathological_fraction)
    )
    n_recover, n_refuse, n_absent = _allocate(n_path, spec.pathological_mix)
    labels: list[tuple[str, str | None]] = (
        [(CATEGORY_CLEAN, None)] * n_clean
        + [(CATEGORY_NOISY, None)] * n_noisy
        + [(CATEGORY_PATHOLOGICAL, FLAVOR_RECOVERABLE)] * n_recover
        + [(CATEGORY_PATHOLOGICAL, FLAVOR_REFUSAL)] * n_refuse
        + [(CATEGORY_PATHOLOGICAL, FLAVOR_ABSENT)] * n_absent
    )
    random.Random(spec.seed).shuffle(labels)

    docs: list[VerdictDocument] = []
    gold: dict[str, GoldAnnotation] = {}
    plants: dict[str, PlantedDoc] = {}
    for index, (category, flavor) in enumerate(labels):
        rng = random.Random(spec.seed * 1_000_003 + index)
        doc, ann, plant = _build_document(index, category, flavor, spec, rng, markers)
        docs.append(doc)
        gold[doc.doc_id] = ann
        plants[doc.doc_id] = plant
    return FixtureCorpus(spec=spec, docs=docs, gold=gold, plants=plants)


@dataclass(frozen=True)
class MutationBand:
    """Target similarity band for one group of imperfect responses."""

    lo: float
    hi: float
    weight: int


@dataclass(frozen=True)
class ReplayBehavior:
    """How the scripted provider behaves across a corpus.

    Fractions apply to documents that carry a factual statement; documents
    without one always get an explicit null report and refusal-flavored
    documents always get a refusal status.  ``mutation_mode`` selects how
    imperfect responses are built: "boundary" extends the true statement with
    trailing source text (stays verbatim, so it survives grounding with a
    controlled quality loss), "edits" injects character substitutions
    (simulating transcription drift in generated text).
    """

    perfect_fraction: float
    mutated_fraction: float
    refuse_fraction: float
    mutation_mode: str = "boundary"
    mutated_bands: tuple[MutationBand, ...] = (MutationBand(0.95, 0.9975, 1),)

    def __post_init__(self) -> None:
        total = self.perfect_fraction + self.mutated_fraction + self.refuse_fraction
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"behavior fractions must sum to 1, got {total}")
        if self.mutation_mode not in ("boundary", "edits"):
            raise ValueError(f"unknown mutation mode {self.mutation_mode!r}")


def _extend_candidate(doc_text: str, g0: int, g1: int, lo: float, hi: float) -> str:
    """Grow a verbatim excerpt past its true end until similarity to the true
    statement falls inside [lo, hi).

    Appending text keeps the true statement as a prefix, so the distance to
    it equals the folded length of the appended tail; the score can be walked
    down in closed form and is verified with the production metric before
    returning.
    """
    gold = doc_text[g0:g1]
    gold_folded_len = len(normalize_text(gold).folded)
    tail = len(doc_text) - g1
    for delta in range(1, tail):
        candidate = doc_text[g0 : g1 + delta]
        folded_len = len(normalize_text(candidate).folded)
        added = folded_len - gold_folded_len
        if added <= 0:
            continue
        score = 1.0 - added / folded_len
        if score < lo:
            break
        if score < hi and lo <= similarity(candidate, gold) < hi:
            return candidate
    raise ValueError(f"cannot place an extension into band [{lo}, {hi})")


_EDIT_ALPHABET = "bcdfghjklmnpqrstvwz"


def _edited_candidate(doc_text: str, g0: int, g1: int, lo: float, hi: float,
                      rng: random.Random) -> str:
    """Inject character substitutions into a true excerpt until its best-span
    similarity against the document falls inside [lo, hi)."""
    gold = doc_text[g0:g1]
    letter_positions = [i for i, ch in enumerate(gold) if ch.isalpha()]
    mid = (lo + hi) / 2
    k = max(1, round(len(gold) * (1 - mid)))
    for attempt in range(200):
        k_try = max(1, k + (attempt % 7) - 3)
        trial_rng = random.Random(rng.randint(0, 2**31) + attempt)
        positions = trial_rng.sample(letter_positions, min(k_try, len(letter_positions)))
        chars = list(gold)
        for pos in positions:
            original = chars[pos].lower()
            replacement = trial_rng.choice([c for c in _EDIT_ALPHABET if c != original])
            chars[pos] = replacement
        candidate = "".join(chars)
        score = locate_span(candidate, doc_text).score
        if lo <= score < hi:
            return candidate
    raise ValueError(f"cannot place edits into band [{lo}, {hi})")


def generate_replay(corpus: FixtureCorpus, behavior: ReplayBehavior,
                    markers: MarkerSet | None = None,
                    exemplars: Sequence[Exemplar] | None = None,
                    seed: int | None = None) -> list[dict]:
    """Scripted provider responses for every document, keyed by prompt hash.

    Deterministic per corpus seed.  The record format matches
    :class:`verdictfacts.llm.ReplayProvider`.
    """
    markers = markers or default_marker_set()
    seed = corpus.spec.seed * 31 + 7 if seed is None else seed
    rng = random.Random(seed)

    eligible = [d for d in corpus.docs
                if corpus.gold[d.doc_id].present
                and corpus.plants[d.doc_id].flavor != FLAVOR_REFUSAL]
    n = len(eligible)
    n_perfect, n_mut, n_refuse = _allocate(
        n, (behavior.perfect_fraction, behavior.mutated_fraction, behavior.refuse_fraction)
    )
    band_weights = [b.weight for b in behavior.mutated_bands]
    scale = sum(band_weights)
    band_counts = (_allocate(n_mut, [w / scale for w in band_weights])
                   if n_mut and scale else [0] * len(band_weights))

    assignment: list[tuple[str, MutationBand | None]] = (
        [("perfect", None)] * n_perfect
        + [(behavior.mutation_mode, b)
           for b, count in zip(behavior.mutated_bands, band_counts)
           for _ in range(count)]
        + [("refuse", None)] * n_refuse
    )
    rng.shuffle(assignment)
    assigned = dict(zip((d.doc_id for d in eligible), assignment))

    records = []
    for index, doc in enumerate(corpus.docs):
        plant = corpus.plants[doc.doc_id]
        prompt = render_prompt(doc, markers, exemplars).text
        digest = prompt_hash(prompt)
        refusal = plant.flavor == FLAVOR_REFUSAL
        if not refusal and corpus.gold[doc.doc_id].present:
            refusal = assigned[doc.doc_id][0] == "refuse"
        if refusal:
            records.append({
                "prompt_hash": digest, "status": STATUS_SAFETY, "raw_output": None,
                "input_tokens": tokens_for_chars(len(prompt)), "output_tokens": 0,
            })
            continue
        if not corpus.gold[doc.doc_id].present:
            payload = json.dumps({FACT_FIELD: None})
        else:
            kind, band_spec = assigned[doc.doc_id]
            if kind == "perfect":
                payload = json.dumps(
                    {FACT_FIELD: doc.raw_text[plant.gold_start:plant.gold_end]},
                    ensure_ascii=False,
                )
            elif kind == "boundary":
                candidate = _extend_candidate(doc.raw_text, plant.gold_start,
                                              plant.gold_end, band_spec.lo, band_spec.hi)
                payload = json.dumps({FACT_FIELD: candidate}, ensure_ascii=False)
            else:  # edits
                doc_rng = random.Random(seed * 65_537 + index)
                candidate = _edited_candidate(doc.raw_text, plant.gold_start,
                                              plant.gold_end, band_spec.lo, band_spec.hi,
                                              doc_rng)
                payload = json.dumps({FACT_FIELD: candidate}, ensure_ascii=False)
        records.append({
            "prompt_hash": digest, "status": STATUS_OK, "raw_output": payload,
            "input_tokens": tokens_for_chars(len(prompt)),
            "output_tokens": tokens_for_chars(len(payload)),
        })
    return records


def hallucination_pairs(corpus: FixtureCorpus, records: Sequence[dict],
                        markers: MarkerSet | None = None,
                        exemplars: Sequence[Exemplar] | None = None,
                        ) -> list[tuple[str, str]]:
    """(generated, source) pairs joined back from a replay fixture."""
    markers = markers or default_marker_set()
    by_hash = {r["prompt_hash"]: r for r in records}
    pairs = []
    for doc in corpus.docs:
        digest = prompt_hash(render_prompt(doc, markers, exemplars).text)
        record = by_hash.get(digest)
        if record is None or record["status"] != STATUS_OK or record["raw_output"] is None:
            continue
        candidate = parse_model_output(record["raw_output"])
        if candidate:
            pairs.append((candidate, doc.raw_text))
    return pairs


def generate_admin_registry(corpus: FixtureCorpus, extra_unmatched: int = 0,
                            seed: int | None = None) -> list[AdminRecord]:
    """Registry rows covering every document plus phantom unmatched rows."""
    seed = corpus.spec.seed * 17 + 3 if seed is None else seed
    rng = random.Random(seed)
    rows = [AdminRecord(d.docket_number, d.court_name, d.decision_year) for d in corpus.docs]
    for i in range(extra_unmatched):
        year = 2018 + rng.randint(0, 4)
        rows.append(AdminRecord(
            docket_number=f"{rng.randint(1, 9)}T/{9000 + i}/{year}",
            court_name=f"District Court {rng.choice(_CITIES)}",
            decision_year=year,
        ))
    return rows


def write_corpus_dir(corpus: FixtureCorpus, out_dir: str | Path) -> dict[str, Path]:
    """Write corpus.jsonl, gold.jsonl and manifest.json under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus_path = out / "corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as handle:
        for doc in corpus.docs:
            handle.write(json.dumps({
                "id": doc.doc_id, "court": doc.court_name, "docket": doc.docket_number,
                "year": doc.decision_year, "text": doc.raw_text,
            }, ensure_ascii=False, sort_keys=True) + "\n")
    gold_path = out / "gold.jsonl"
    with open(gold_path, "w", encoding="utf-8") as handle:
        for doc in corpus.docs:
            ann = corpus.gold[doc.doc_id]
            handle.write(json.dumps({
                "doc_id": ann.doc_id, "present": ann.present, "gold_text": ann.gold_text,
            }, ensure_ascii=False, sort_keys=True) + "\n")
    manifest_path = out / "manifest.json"
    manifest = {
        "spec": {
            "n_docs": corpus.spec.n_docs,
            "seed": corpus.spec.seed,
            "clean_fraction": corpus.spec.clean_fraction,
            "noisy_fraction": corpus.spec.noisy_fraction,
            "pathological_fraction": corpus.spec.pathological_fraction,
            "language_profile": corpus.spec.language_profile,
            "pathological_mix": list(corpus.spec.pathological_mix),
        },
        "documents": [
            {
                "doc_id": p.doc_id, "category": p.category, "flavor": p.flavor,
                "gold_start": p.gold_start, "gold_end": p.gold_end,
                "start_marker": p.start_marker, "end_marker": p.end_marker,
            }
            for p in corpus.plants.values()
        ],
    }
    manifest_path.write_text(json.dumps(manifest, ensure_ascii=False, indent=2),
                             encoding="utf-8")
    return {"corpus": corpus_path, "gold": gold_path, "manifest": manifest_path}
