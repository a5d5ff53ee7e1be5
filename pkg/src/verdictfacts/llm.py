"""Prompt construction, generation providers, cost accounting, output parsing.

The generation side is deliberately thin: one request per document at
temperature 0 against a pluggable provider.  Three providers ship with the
package: a deterministic stub, a record/replay player for offline
reproduction, and a minimal HTTP backend.  Nothing a provider returns is
trusted downstream; the pipeline grounds every candidate against the source
document before it can appear in results.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

from .markers import MarkerSet, default_marker_set

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_TOKEN_LIMIT = "token_limit_exceeded"
STATUS_SAFETY = "safety_flagged"
STATUS_TRANSPORT = "transport_error"

FACT_FIELD = "fact_sentence"


class OutputParseError(ValueError):
    """Model output carried no recognizable structured payload."""


@dataclass(frozen=True)
class ProviderConfig:
    """Generation settings and pricing for cost estimates."""

    model_name: str = "stub"
    temperature: float = 0.0
    max_output_tokens: int = 2048
    input_usd_per_million_tokens: float = 0.10
    output_usd_per_million_tokens: float = 0.40
    chars_per_token: float = 4.0
    max_doc_chars: int | None = None
    endpoint: str | None = None
    max_retries: int = 1

    def __post_init__(self) -> None:
        if self.input_usd_per_million_tokens < 0 or self.output_usd_per_million_tokens < 0:
            raise ValueError("pricing must be non-negative")
        if self.chars_per_token <= 0:
            raise ValueError("chars_per_token must be positive")


@dataclass(frozen=True)
class LlmResult:
    """One provider response: text plus token accounting, or a typed refusal."""

    status: str
    raw_output: str | None = None
    input_tokens: int = 0
    output_tokens: int = 0

    def __post_init__(self) -> None:
        if (self.status == STATUS_OK) != (self.raw_output is not None):
            raise ValueError("raw_output must be present exactly when status is ok")


@dataclass(frozen=True)
class Exemplar:
    """A worked example embedded in the prompt: source excerpt and expected output.

    ``fact_sentence`` of None marks a decision without a factual statement.
    """

    excerpt: str
    fact_sentence: str | None


@dataclass(frozen=True)
class RenderedPrompt:
    text: str
    char_count: int
    doc_truncated: bool


@dataclass(frozen=True)
class PromptSpec:
    """Everything that goes into the rendered prompt, before the document."""

    instruction_text: str
    start_hints: tuple[str, ...]
    end_hints: tuple[str, ...]
    exemplars: tuple[Exemplar, ...]
    output_schema: str

    @classmethod
    def for_markers(cls, markers: MarkerSet,
                    exemplars: Sequence[Exemplar] | None = None) -> "PromptSpec":
        chosen = tuple(exemplars) if exemplars is not None else default_exemplars()
        if not chosen:
            raise ValueError("at least one exemplar is required")
        return cls(
            instruction_text=INSTRUCTION_TEXT,
            start_hints=tuple(markers.start_markers),
            end_hints=tuple(markers.end_markers),
            exemplars=chosen,
            output_schema=OUTPUT_SCHEMA_TEXT,
        )


def tokens_for_chars(chars: int, chars_per_token: float = 4.0) -> int:
    """Character-count token estimate, rounded up."""
    if chars < 0:
        raise ValueError("character counts must be non-negative")
    if chars == 0:
        return 0
    return math.ceil(chars / chars_per_token)


def estimate_cost(doc_chars: int, prompt_chars: int, expected_output_chars: int,
                  config: ProviderConfig) -> float:
    """Estimated USD cost of one request under the configured pricing.

    Input tokens are estimated separately for the fixed prompt and the
    document; output tokens from the expected output length; cost is linear
    in each side.
    """
    if min(doc_chars, prompt_chars, expected_output_chars) < 0:
        raise ValueError("character counts must be non-negative")
    ratio = config.chars_per_token
    input_tokens = tokens_for_chars(doc_chars, ratio) + tokens_for_chars(prompt_chars, ratio)
    output_tokens = tokens_for_chars(expected_output_chars, ratio)
    return (input_tokens * config.input_usd_per_million_tokens
            + output_tokens * config.output_usd_per_million_tokens) / 1_000_000


def _truncate_middle(text: str, max_chars: int) -> str:
    """Keep the head and tail of an oversized document; the dispositive part
    and its markers live near the edges."""
    if len(text) <= max_chars:
        return text
    ellipsis = "\n[...]\n"
    keep = max_chars - len(ellipsis)
    head = keep * 2 // 3
    tail = keep - head
    return text[:head] + ellipsis + text[len(text) - tail:]


def render_prompt(doc, markers: MarkerSet,
                  exemplars: Sequence[Exemplar] | None = None,
                  max_doc_chars: int | None = None) -> RenderedPrompt:
    """Deterministically render instruction, marker hints, exemplars, then the
    document text."""
    spec = PromptSpec.for_markers(markers, exemplars)
    doc_text = doc.raw_text
    truncated = max_doc_chars is not None and len(doc_text) > max_doc_chars
    if truncated:
        doc_text = _truncate_middle(doc_text, max_doc_chars)

    parts = [spec.instruction_text.rstrip(), ""]
    parts.append("Opening phrases that typically introduce the factual statement:")
    parts.extend(f"- {phrase}" for phrase in spec.start_hints)
    parts.append("")
    parts.append("Closing phrases that typically follow the factual statement:")
    parts.extend(f"- {phrase}" for phrase in spec.end_hints)
    parts.append("")
    parts.append(spec.output_schema.rstrip())
    parts.append("")
    for i, exemplar in enumerate(spec.exemplars, start=1):
        parts.append(f"Example {i}")
        parts.append("Decision excerpt:")
        parts.append(exemplar.excerpt.rstrip())
        parts.append("Expected output:")
        expected = exemplar.fact_sentence if exemplar.fact_sentence else None
        parts.append(json.dumps({FACT_FIELD: expected}, ensure_ascii=False))
        parts.append("")
    parts.append("Decision text to process:")
    text = "\n".join(parts) + "\n" + doc_text
    return RenderedPrompt(text=text, char_count=len(text), doc_truncated=truncated)


def build_prompt(doc, markers: MarkerSet,
                 exemplars: Sequence[Exemplar] | None = None,
                 max_doc_chars: int | None = None) -> str:
    """Rendered prompt string; see :func:`render_prompt` for the structure."""
    return render_prompt(doc, markers, exemplars, max_doc_chars).text


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class GenerationProvider(Protocol):
    """Single-method generation interface: prompt in, text plus token counts out."""

    def generate(self, prompt: str) -> LlmResult: ...


class ProviderTransportError(Exception):
    """Transient transport problem talking to a provider."""


class StubProvider:
    """Deterministic in-process provider for tests and demos.

    ``script`` maps a prompt predicate to a response; by default every call
    echoes ``canned`` wrapped in the structured output format.
    """

    def __init__(self, canned: str | None = None,
                 responder: Callable[[str], LlmResult] | None = None,
                 chars_per_token: float = 4.0):
        self.canned = canned
        self.responder = responder
        self.chars_per_token = chars_per_token
        self.calls: list[str] = []

    def generate(self, prompt: str) -> LlmResult:
        self.calls.append(prompt)
        if self.responder is not None:
            return self.responder(prompt)
        payload = json.dumps({FACT_FIELD: self.canned}, ensure_ascii=False)
        return LlmResult(
            status=STATUS_OK,
            raw_output=payload,
            input_tokens=tokens_for_chars(len(prompt), self.chars_per_token),
            output_tokens=tokens_for_chars(len(payload), self.chars_per_token),
        )


class ReplayProvider:
    """Plays back recorded responses keyed by the hash of the exact prompt.

    The fixture is JSONL with records
    ``{prompt_hash, status, raw_output, input_tokens, output_tokens}``.
    Unknown prompts raise by default (a fixture mismatch is a test bug);
    with ``strict=False`` they map to a transport error instead.
    """

    def __init__(self, records: Iterable[dict] | str | Path, strict: bool = True):
        if isinstance(records, (str, Path)):
            records = load_replay_records(records)
        self.by_hash: dict[str, dict] = {}
        for record in records:
            self.by_hash[record["prompt_hash"]] = record
        self.strict = strict
        self.calls: list[str] = []

    def generate(self, prompt: str) -> LlmResult:
        digest = prompt_hash(prompt)
        self.calls.append(digest)
        record = self.by_hash.get(digest)
        if record is None:
            if self.strict:
                raise LookupError(f"no replay record for prompt hash {digest[:12]}...")
            return LlmResult(status=STATUS_TRANSPORT)
        return LlmResult(
            status=record["status"],
            raw_output=record.get("raw_output"),
            input_tokens=int(record.get("input_tokens", 0)),
            output_tokens=int(record.get("output_tokens", 0)),
        )


def load_replay_records(path: str | Path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def write_replay_records(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


class HttpProvider:
    """Minimal JSON-over-HTTP backend.

    POSTs ``{model, prompt, temperature, max_output_tokens}`` and expects
    ``{status, output, input_tokens, output_tokens}`` back.  Refusal statuses
    from the service are passed through; HTTP failures raise
    :class:`ProviderTransportError` so the caller's retry policy applies.
    """

    def __init__(self, config: ProviderConfig, api_key: str | None = None,
                 timeout: float = 60.0):
        if not config.endpoint:
            raise ValueError("HttpProvider needs an endpoint in the provider config")
        self.config = config
        self.api_key = api_key
        self.timeout = timeout

    def generate(self, prompt: str) -> LlmResult:
        import requests

        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        body = {
            "model": self.config.model_name,
            "prompt": prompt,
            "temperature": self.config.temperature,
            "max_output_tokens": self.config.max_output_tokens,
        }
        try:
            response = requests.post(self.config.endpoint, json=body,
                                     headers=headers, timeout=self.timeout)
        except requests.RequestException as exc:
            raise ProviderTransportError(str(exc)) from exc
        if response.status_code != 200:
            raise ProviderTransportError(f"HTTP {response.status_code}")
        payload = response.json()
        status = payload.get("status", STATUS_OK)
        if status not in (STATUS_OK, STATUS_TOKEN_LIMIT, STATUS_SAFETY):
            status = STATUS_TRANSPORT
        raw = payload.get("output") if status == STATUS_OK else None
        if status == STATUS_OK and raw is None:
            raise ProviderTransportError("ok response without output text")
        return LlmResult(
            status=status,
            raw_output=raw,
            input_tokens=int(payload.get("input_tokens", 0)),
            output_tokens=int(payload.get("output_tokens", 0)),
        )


def llm_extract(doc, prompt: str, provider: GenerationProvider,
                max_retries: int = 1) -> LlmResult:
    """Issue one generation request; refusals become statuses, never raises.

    Transport problems are retried up to ``max_retries`` extra times, then
    reported as a transport_error result.
    """
    attempts = 1 + max(0, max_retries)
    for attempt in range(attempts):
        try:
            return provider.generate(prompt)
        except ProviderTransportError as exc:
            logger.warning("provider transport error for %s (attempt %d): %s",
                           doc.doc_id, attempt + 1, exc)
    return LlmResult(status=STATUS_TRANSPORT)


def _iter_json_objects(raw: str) -> Iterable[object]:
    decoder = json.JSONDecoder()
    idx = 0
    while True:
        idx = raw.find("{", idx)
        if idx < 0:
            return
        try:
            obj, end = decoder.raw_decode(raw, idx)
        except ValueError:
            idx += 1
            continue
        yield obj
        idx = end


def _find_fact_field(obj: object) -> tuple[bool, str | None]:
    if isinstance(obj, dict):
        if FACT_FIELD in obj:
            value = obj[FACT_FIELD]
            if value is None or isinstance(value, str):
                return True, value
        for nested in obj.values():
            found, value = _find_fact_field(nested)
            if found:
                return True, value
    elif isinstance(obj, list):
        for nested in obj:
            found, value = _find_fact_field(nested)
            if found:
                return True, value
    return False, None


def parse_model_output(raw: str) -> str | None:
    """Extract the fact-statement field from model output.

    Tolerates the JSON payload being wrapped in prose or code fencing.
    Returns the inner string unmodified, or None when the model explicitly
    reported that no factual statement exists (null or empty field).  Raises
    :class:`OutputParseError` when no payload can be found at all.
    """
    if not raw:
        raise OutputParseError("empty model output")
    for obj in _iter_json_objects(raw):
        found, value = _find_fact_field(obj)
        if found:
            if value is None or value == "":
                return None
            return value
    raise OutputParseError("no structured fact-statement payload in model output")


INSTRUCTION_TEXT = """\
You are an information-extraction system working on criminal court decisions.

Task definition.  Each decision contains a dispositive part that (1) identifies
the case, the court and the accused, (2) announces whether the accused is found
guilty, (3) describes the concrete behavior the accused is found guilty of,
(4) classifies that behavior under a statutory offence, and (5) pronounces the
sentence.  Your task is to return part (3) only: the factual statement, meaning
the single contiguous passage that describes what the accused actually did,
with its dates, places, amounts and other concrete details.  Many decisions
also contain a reasoning section after the dispositive part; nothing in the
reasoning section is ever part of the factual statement, even when it retells
the same events in more detail.

What counts as the factual statement.  It is the authoritative narrative of
the conduct: when and where the accused acted, what exactly he or she did, to
whom, with what object or substance, and with what consequence or damage.  It
typically reads as one long sentence, frequently spanning several lines or
paragraphs, and often ends with a clause quantifying the damage or harm.  It
may consist of several numbered counts; in that case all counts together form
one factual statement and must be returned together, including the numbering.
It never includes the name of the offence, statutory section numbers, the word
announcing guilt, or the sentence imposed.

Rules you must follow:
1. Copy the factual statement exactly as it appears in the decision text,
   character for character.  Do not paraphrase, translate, reorder, summarize
   or correct anything, including typography and spacing mistakes.
2. Preserve the original whitespace, line breaks, capitalization, diacritics,
   punctuation and obvious typos.  Converted documents often contain stray
   line breaks in the middle of words or doubled spaces; keep them as they
   are.  Your output is checked character by character against the source
   document, and any silent correction counts as an error.
3. Return only the factual statement.  Leave out the guilt announcement before
   it and the statutory classification and sentence after it, and omit legal
   evaluations of every kind.
4. The factual statement usually sits between a guilt phrase and a concluding
   connective; the phrase lists below show where it typically begins and ends.
   The opening phrase itself and the closing connective itself are not part of
   the statement.  Note that the phrases may appear in the document with extra
   whitespace or line breaks inserted between their letters; treat such
   variants as the same phrase, but still exclude them from your output.
5. Start your excerpt at the first character of the conduct description that
   follows the opening phrase, and stop immediately before the closing
   connective or, when there is none, immediately before the statutory
   classification.  Do not carry trailing headings, page numbers or footer
   fragments into the excerpt.
6. When the decision concerns several accused persons, return the complete
   factual description covering all of them as printed; do not split it or
   select a single person's part.
7. If the decision genuinely contains no factual statement (for example a
   purely procedural ruling, an acquittal without a conduct description, or a
   decision that only discontinues the prosecution), report that explicitly
   using a null value.  Never invent, reconstruct or borrow text from the
   reasoning section as a substitute.
8. Output must be a single JSON object in the schema given below, with no
   commentary, code fencing or additional keys before or after it."""

OUTPUT_SCHEMA_TEXT = """\
Output schema.  Respond with exactly one JSON object of the form
{"fact_sentence": "<verbatim excerpt>"}
or, when the decision has no factual statement,
{"fact_sentence": null}"""


def default_exemplars() -> tuple[Exemplar, ...]:
    return _DEFAULT_EXEMPLARS


_DEFAULT_EXEMPLARS = (
    Exemplar(
        excerpt=(
            "District Court Vrbove\n"
            "Case no. 4T/112/2020\n\n"
            "J u d g m e n t\n\n"
            "In the name of the Republic\n\n"
            "The District Court Vrbove, sitting with judge Marta Kovalova, in the\n"
            "criminal matter against the accused Pavol Hruska, born 14 March 1981\n"
            "in Vrbove, residing at Kvetna 12, Vrbove, decided as follows:\n\n"
            "The accused Pavol Hruska\n\n"
            "is found guilty that\n\n"
            "on 3 June 2020 at about 22:40 in Vrbove on Stanicna street he forced\n"
            "open the cellar door of house no. 8, entered the cellar and took a\n"
            "mountain bicycle of the make Drake worth 540 euro together with a\n"
            "toolbox worth 85 euro, causing the owner Jozef Badura damage of 625\n"
            "euro in total,\n\n"
            "therefore\n\n"
            "he committed the offence of theft under section 212 paragraph 2 of the\n"
            "criminal code,\n\n"
            "and is sentenced to eight months of imprisonment, the execution of\n"
            "which is conditionally suspended for a probation period of two years.\n\n"
            "R e a s o n i n g\n\n"
            "The court established the facts from the testimony of the injured\n"
            "party and from the seized property recovered at a pawn shop."
        ),
        fact_sentence=(
            "on 3 June 2020 at about 22:40 in Vrbove on Stanicna street he forced\n"
            "open the cellar door of house no. 8, entered the cellar and took a\n"
            "mountain bicycle of the make Drake worth 540 euro together with a\n"
            "toolbox worth 85 euro, causing the owner Jozef Badura damage of 625\n"
            "euro in total,"
        ),
    ),
    Exemplar(
        excerpt=(
            "District Court Lukov\n"
            "Case no. 1T/38/2019\n\n"
            "J u d g m e n t\n\n"
            "The District Court Lukov, by judge Peter Oravec, in the criminal\n"
            "matter against the accused Milan Cerny, born 2 August 1975 in Lukov,\n"
            "decided at the main hearing as follows:\n\n"
            "The accused Milan Cerny\n\n"
            "is  found\nguilty   that\n\n"
            "in the period from January 2019 to April 2019 in Lukov, although he\n"
            "was obliged by a final court decision to contribute 150 euro monthly\n"
            "to the maintenance of his minor son Tomas, he did not pay any\n"
            "contribution and owes the mother Jana Cerna the amount of 600 euro,\n\n"
            "thus\n\n"
            "he committed the offence of neglect of compulsory maintenance under\n"
            "section 207 paragraph 1 of the criminal code,\n\n"
            "and is sentenced to four months of imprisonment suspended for a\n"
            "probation period of eighteen months.\n\n"
            "R e a s o n i n g\n\n"
            "The accused admitted the facts in full and the court saw no reason\n"
            "to doubt his confession."
        ),
        fact_sentence=(
            "in the period from January 2019 to April 2019 in Lukov, although he\n"
            "was obliged by a final court decision to contribute 150 euro monthly\n"
            "to the maintenance of his minor son Tomas, he did not pay any\n"
            "contribution and owes the mother Jana Cerna the amount of 600 euro,"
        ),
    ),
    Exemplar(
        excerpt=(
            "District Court Zelenec\n"
            "Case no. 7T/203/2021\n\n"
            "R e s o l u t i o n\n\n"
            "The District Court Zelenec, by judge Ivana Mrazova, in the criminal\n"
            "matter against the accused Roman Kral, born 21 November 1990,\n"
            "prosecuted for the offence of fraud, decided as follows:\n\n"
            "Under section 281 paragraph 1 of the code of criminal procedure the\n"
            "criminal prosecution is discontinued, because the act is time-barred.\n\n"
            "R e a s o n i n g\n\n"
            "The prosecution was opened more than ten years after the act and the\n"
            "limitation period has expired; the court therefore discontinued the\n"
            "proceedings without examining the merits."
        ),
        fact_sentence=None,
    ),
    Exemplar(
        excerpt=(
            "District Court Mokrany\n"
            "Case no. 6T/77/2022\n\n"
            "J u d g m e n t\n\n"
            "In the name of the Republic\n\n"
            "The District Court Mokrany, by judge Alena Dudova, in the criminal\n"
            "matter against the accused Viktor Zima, born 30 May 1987 in Mokrany,\n"
            "decided at the main hearing held on 9 February 2022 as follows:\n\n"
            "The accused Viktor Zima\n\n"
            "is acknowledged guilty that\n\n"
            "1. on 17 September 2021 at about 14:20 in Mokrany in the self-service\n"
            "store on Mlynska street he took from the shelf two bottles of spirits\n"
            "worth 46 euro and carried them past the checkout without paying,\n\n"
            "2. on 24 September 2021 at about 9:15 in the same store he took a\n"
            "packet of razor blades and three tins of coffee worth 38 euro in\n"
            "total and again left without paying, whereby he caused the operator\n"
            "of the store overall damage of 84 euro,\n\n"
            "thus\n\n"
            "he committed the offence of theft under section 212 paragraph 1 of\n"
            "the criminal code, partly in the stage of an attempt,\n\n"
            "and is sentenced to a fine of four hundred euro and, in default of\n"
            "payment, two months of imprisonment.\n\n"
            "R e a s o n i n g\n\n"
            "The course of events was captured by the store camera system and the\n"
            "accused admitted both visits when confronted with the recordings."
        ),
        fact_sentence=(
            "1. on 17 September 2021 at about 14:20 in Mokrany in the self-service\n"
            "store on Mlynska street he took from the shelf two bottles of spirits\n"
            "worth 46 euro and carried them past the checkout without paying,\n\n"
            "2. on 24 September 2021 at about 9:15 in the same store he took a\n"
            "packet of razor blades and three tins of coffee worth 38 euro in\n"
            "total and again left without paying, whereby he caused the operator\n"
            "of the store overall damage of 84 euro,"
        ),
    ),
)
