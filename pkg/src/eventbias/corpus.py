"""Corpus data model: JSONL ingestion, sentence splitting, tokenization, stats.

A corpus is a list of biography records, each carrying a binary gender label
(F or M), an occupation, and named text sections. The canonical section keys
are ``career`` and ``personal_life``; records may carry either, both, or other
sections, and section names are normalized to lowercase snake_case at load.

All types are value-semantic and immutable after load, so a corpus can be
shared read-only across parallel workers.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import CorpusFormatError

GENDERS = ("F", "M")
CANONICAL_SECTIONS = ("career", "personal_life")

# Tokens are maximal alphanumeric runs: punctuation is dropped and splits,
# hyphenated words split, case is folded.
_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")

_TERMINALS = ".?!"
_CLOSE_QUOTES = "\"'”’)"
_OPEN_QUOTES = "\"'“‘("
# Abbreviations whose trailing period never ends a sentence (stored without
# the final dot; internal dots kept, so "e.g." matches token "e.g").
_ABBREVIATIONS = frozenset({"mr", "mrs", "ms", "dr", "st", "e.g", "i.e"})


@dataclass(frozen=True)
class CelebrityRecord:
    """One biography: identity, binary gender, occupation, named text sections.

    ``extra`` holds unknown top-level JSONL fields verbatim; they are ignored
    by every analysis but preserved so that load/serialize round-trips.
    """

    id: str
    name: str
    gender: str
    occupation: str
    sections: dict[str, str]
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    section: str
    index: int
    text: str
    char_offset: int


@dataclass(frozen=True)
class ValidationReport:
    """Non-fatal observations from a corpus load."""

    n_records: int = 0
    warnings: tuple[str, ...] = ()

    def __str__(self) -> str:
        lines = [f"{self.n_records} records loaded"]
        lines += [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines)


@dataclass(frozen=True)
class Corpus:
    records: tuple[CelebrityRecord, ...]
    report: ValidationReport = field(default=ValidationReport(), compare=False)

    def __iter__(self) -> Iterator[CelebrityRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def record(self, doc_id: str) -> CelebrityRecord:
        try:
            return self._by_id[doc_id]
        except KeyError:
            raise KeyError(f"no record with id {doc_id!r}")

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {r.id: r for r in self.records})

    def occupations(self) -> list[str]:
        return sorted({r.occupation for r in self.records})


@dataclass(frozen=True)
class CorpusStats:
    """Document counts per (occupation, section, gender) plus collected totals.

    ``counts[(occupation, section, gender)]`` is the number of documents of
    that occupation and gender that carry that section. ``collected`` counts
    every record regardless of sections.
    """

    counts: dict[tuple[str, str, str], int]
    collected: dict[tuple[str, str], int]

    def section_total(self, section: str, gender: str) -> int:
        return sum(n for (_, s, g), n in self.counts.items() if s == section and g == gender)

    def collected_total(self, gender: str | None = None) -> int:
        if gender is None:
            return sum(self.collected.values())
        return sum(n for (_, g), n in self.collected.items() if g == gender)

    def sections(self) -> list[str]:
        found = {s for (_, s, _) in self.counts}
        canonical = [s for s in CANONICAL_SECTIONS if s in found]
        return canonical + sorted(found - set(CANONICAL_SECTIONS))

    def occupations(self) -> list[str]:
        return sorted({occ for (occ, _) in self.collected})


def normalize_section_name(name: str) -> str:
    """Lowercase snake_case section key ("Personal Life" -> "personal_life")."""
    return re.sub(r"[\s\-]+", "_", name.strip().lower())


def _parse_record(obj: dict, line_no: int) -> CelebrityRecord:
    for key in ("id", "name", "gender", "occupation", "sections"):
        if key not in obj:
            raise CorpusFormatError(f"missing required field {key!r}", line_no)
    for key in ("id", "name", "gender", "occupation"):
        if not isinstance(obj[key], str):
            raise CorpusFormatError(f"field {key!r} must be a string", line_no)
    if not obj["id"]:
        raise CorpusFormatError("field 'id' must be non-empty", line_no)
    if obj["gender"] not in GENDERS:
        raise CorpusFormatError(
            f"unknown gender {obj['gender']!r}: only the binary labels 'F' and 'M' "
            "are supported (a known limitation of this toolkit)",
            line_no,
        )
    if not isinstance(obj["sections"], dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in obj["sections"].items()
    ):
        raise CorpusFormatError("field 'sections' must map strings to strings", line_no)
    sections = {}
    for key, text in obj["sections"].items():
        norm = normalize_section_name(key)
        if norm in sections:
            raise CorpusFormatError(f"sections {key!r} and another key collide on {norm!r}", line_no)
        sections[norm] = text
    extra = {k: v for k, v in obj.items() if k not in ("id", "name", "gender", "occupation", "sections")}
    return CelebrityRecord(
        id=obj["id"],
        name=obj["name"],
        gender=obj["gender"],
        occupation=obj["occupation"],
        sections=sections,
        extra=extra,
    )


def load_corpus(path: str | Path) -> Corpus:
    """Load a Corpus JSONL file (one record object per line, UTF-8).

    Raises :class:`CorpusFormatError` naming the offending line on malformed
    JSON, schema violations, unknown gender values, or duplicate ids. Records
    keep file order. Non-fatal observations (records missing both canonical
    sections, empty section texts) are collected into ``corpus.report``.
    """
    records: list[CelebrityRecord] = []
    notes: list[str] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"malformed JSON ({exc.msg})", line_no) from exc
            if not isinstance(obj, dict):
                raise CorpusFormatError("each line must be a JSON object", line_no)
            record = _parse_record(obj, line_no)
            if record.id in seen:
                raise CorpusFormatError(
                    f"duplicate id {record.id!r} (first seen on line {seen[record.id]})", line_no
                )
            seen[record.id] = line_no
            if not any(s in record.sections for s in CANONICAL_SECTIONS):
                notes.append(f"record {record.id!r} has no career or personal_life section")
            for sec, text in record.sections.items():
                if not text.strip():
                    notes.append(f"record {record.id!r} section {sec!r} is empty")
            records.append(record)
    return Corpus(records=tuple(records), report=ValidationReport(len(records), tuple(notes)))


def record_to_json(record: CelebrityRecord) -> str:
    """Serialize one record to its JSONL line (compact, UTF-8, stable key order)."""
    obj = {
        "id": record.id,
        "name": record.name,
        "gender": record.gender,
        "occupation": record.occupation,
        "sections": record.sections,
    }
    obj.update(record.extra)
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def save_corpus(corpus: Corpus | Iterable[CelebrityRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in corpus:
            fh.write(record_to_json(record) + "\n")


def _token_before(text: str, idx: int) -> str:
    """The whitespace-delimited token ending just before ``idx``."""
    start = idx
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start:idx].lstrip("".join(_OPEN_QUOTES))


def split_sentences(text: str, doc_id: str = "", section: str = "") -> list[Sentence]:
    """Deterministic rule-based sentence split.

    A sentence ends at a run of ``.?!`` (plus any closing quotes) that is
    followed by whitespace and an uppercase letter or opening quote, unless
    the word before a period is a known abbreviation (Mr., Mrs., Ms., Dr.,
    St., e.g., i.e.) or a single-letter initial. Offsets index into ``text``
    so every sentence satisfies ``text[s.char_offset:][:len(s.text)] == s.text``.
    """
    sentences: list[Sentence] = []
    n = len(text)
    i = 0
    while i < n and text[i].isspace():
        i += 1
    start = i
    while i < n:
        ch = text[i]
        if ch in _TERMINALS:
            j = i
            while j + 1 < n and text[j + 1] in _TERMINALS:
                j += 1
            k = j
            while k + 1 < n and text[k + 1] in _CLOSE_QUOTES:
                k += 1
            m = k + 1
            if m < n and text[m].isspace():
                while m < n and text[m].isspace():
                    m += 1
                next_ok = m < n and (text[m].isupper() or text[m] in _OPEN_QUOTES)
                abbrev = False
                if ch == "." and i == j:
                    word = _token_before(text, i).lower()
                    abbrev = word in _ABBREVIATIONS or len(word) == 1
                if next_ok and not abbrev:
                    sentences.append(Sentence(doc_id, section, len(sentences), text[start : k + 1], start))
                    start = m
                i = m
                continue
            i = k + 1
            continue
        i += 1
    tail = text[start:].rstrip()
    if tail:
        sentences.append(Sentence(doc_id, section, len(sentences), tail, start))
    return sentences


def iter_sentences(
    corpus: Corpus | Iterable[CelebrityRecord], section: str | None = None
) -> Iterator[Sentence]:
    """Yield sentences of every record, optionally restricted to one section."""
    for record in corpus:
        for sec in sorted(record.sections):
            if section is not None and sec != section:
                continue
            yield from split_sentences(record.sections[sec], doc_id=record.id, section=sec)


def tokenize(text: str) -> list[str]:
    """Lowercased tokens: split on whitespace and punctuation, punctuation dropped."""
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(text)]


def tokenize_spans(text: str) -> list[tuple[str, int, int]]:
    """Like :func:`tokenize` but yields (surface, start, end) with original casing."""
    return [(m.group(0), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def corpus_stats(corpus: Corpus | Iterable[CelebrityRecord]) -> CorpusStats:
    """Count documents per occupation, section, and gender (Table-style stats)."""
    counts: dict[tuple[str, str, str], int] = {}
    collected: dict[tuple[str, str], int] = {}
    for record in corpus:
        collected[(record.occupation, record.gender)] = (
            collected.get((record.occupation, record.gender), 0) + 1
        )
        for sec in record.sections:
            key = (record.occupation, sec, record.gender)
            counts[key] = counts.get(key, 0) + 1
    return CorpusStats(counts=counts, collected=collected)


def filter_records(
    corpus: Corpus | Iterable[CelebrityRecord],
    section: str | None = None,
    occupation: str | None = None,
    gender: str | None = None,
) -> list[CelebrityRecord]:
    """Records carrying ``section`` and matching the occupation/gender filters."""
    out = []
    for record in corpus:
        if section is not None and section not in record.sections:
            continue
        if occupation is not None and record.occupation != occupation:
            continue
        if gender is not None and record.gender != gender:
            continue
        out.append(record)
    return out
