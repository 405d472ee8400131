"""Event trigger detection, rule-based lemmatization, per-gender frequency tables.

Two detection routes produce the same :class:`EventMention` shape: the
built-in lexicon detector (a token whose lemma is a designated trigger lemma
is a mention) and :func:`ingest_annotations`, which imports the output of an
external extractor from Annotation JSONL and validates every span against the
corpus text.
"""

from __future__ import annotations

import json
import random
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Corpus, Sentence, filter_records, split_sentences, tokenize_spans
from .errors import AnnotationFormatError, ConfigError

EVENT_TYPES = ("Life", "Transportation", "Personnel", "Conflict", "Justice", "Transaction", "Contact")

# Irregular forms resolved before any suffix rule fires. Includes identity
# pins for words a suffix rule would otherwise mangle ("wedding" is an event
# lemma in its own right, "found" means establishing, not the past of find).
_IRREGULAR = {
    "am": "be", "is": "be", "are": "be", "was": "be", "were": "be", "been": "be", "being": "be",
    "has": "have", "had": "have", "having": "have",
    "does": "do", "did": "do", "done": "do", "doing": "do",
    "goes": "go", "went": "go", "gone": "go", "going": "go",
    "said": "say", "saying": "say",
    "made": "make", "making": "make",
    "took": "take", "taken": "take", "taking": "take",
    "gave": "give", "given": "give", "giving": "give",
    "got": "get", "gotten": "get", "getting": "get",
    "came": "come", "coming": "come",
    "saw": "see", "seen": "see", "seeing": "see",
    "met": "meet", "meeting": "meeting", "meetings": "meeting",
    "won": "win", "winning": "win",
    "wrote": "write", "written": "write", "writing": "write",
    "sang": "sing", "sung": "sing", "singing": "sing",
    "ran": "run", "running": "run",
    "led": "lead", "leading": "lead",
    "left": "leave", "leaving": "leave",
    "held": "hold", "holding": "hold",
    "began": "begin", "begun": "begin", "beginning": "begin",
    "grew": "grow", "grown": "grow", "growing": "grow",
    "knew": "know", "known": "know", "knowing": "know",
    "heard": "hear", "hearing": "hear",
    "felt": "feel", "feeling": "feel",
    "fell": "fall", "fallen": "fall", "falling": "fall",
    "thought": "think", "thinking": "think",
    "taught": "teach", "teaching": "teach",
    "spoke": "speak", "spoken": "speak", "speaking": "speak",
    "told": "tell", "telling": "tell",
    "sold": "sell", "selling": "sell",
    "bought": "buy", "buying": "buy",
    "brought": "bring", "bringing": "bring",
    "broke": "break", "broken": "break", "breaking": "break",
    "drew": "draw", "drawn": "draw", "drawing": "draw",
    "flew": "fly", "flown": "fly", "flying": "fly",
    "rose": "rise", "risen": "rise", "rising": "rise",
    "spent": "spend", "spending": "spend",
    "lost": "lose", "losing": "lose",
    "paid": "pay", "paying": "pay",
    "born": "bear", "borne": "bear", "bore": "bear", "bearing": "bear",
    "died": "die", "dying": "die", "dies": "die",
    "tied": "tie", "tying": "tie", "ties": "tie",
    "lied": "lie", "lying": "lie", "lies": "lie",
    "eloped": "elope", "eloping": "elope", "elopes": "elope",
    "married": "marry", "marries": "marry", "marrying": "marry",
    "annulled": "annul", "annulling": "annul", "annuls": "annul",
    "wedding": "wedding", "weddings": "wedding",
    "wed": "wed", "wedded": "wed",
    "found": "found", "founded": "found", "founding": "found",
    "focused": "focus", "focusing": "focus", "focuses": "focus",
    "children": "child", "men": "man", "women": "woman", "wives": "wife",
    "lives": "live", "living": "live", "lived": "live",
    "his": "his", "hers": "hers", "its": "its", "this": "this", "thus": "thus",
    "news": "news", "series": "series", "politics": "politics", "business": "business",
}

# Lemmas the suffix stripper may target when deciding between a bare stem,
# an undoubled stem, and a silent-e restoration. Trigger lexicons extend it.
_GENERAL_LEMMAS = frozenset({
    "be", "have", "do", "go", "say", "make", "take", "give", "get", "come", "see",
    "know", "use", "call", "want", "show", "put", "keep", "seem", "need", "become",
    "believe", "happen", "change", "offer", "remember", "love", "consider", "wait",
    "stay", "remain", "stop", "plan", "refer", "prefer", "occur", "control", "cancel",
    "receive", "reach", "agree", "require", "manage", "share", "note", "base", "raise",
    "increase", "reduce", "single", "double", "wonder", "watch", "listen", "follow",
    "treat", "need", "feed", "succeed", "proceed",
})

_VOWELS = "aeiouy"


def _restore(stem: str, base: frozenset[str]) -> str:
    """Recover a lemma from a suffix-stripped stem (undoubling, silent e)."""
    if stem in base:
        return stem
    if stem + "e" in base:
        return stem + "e"
    if len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS:
        undoubled = stem[:-1]
        if undoubled in base:
            return undoubled
        # keep ll/ss/zz (call, pass, buzz); undouble the rest (stop, plan)
        return stem if stem[-1] in "lsz" else undoubled
    if stem[-1] in "cgvzu" and not stem.endswith("ng"):
        return stem + "e"
    if stem.endswith("s") and not stem.endswith("ss"):
        return stem + "e"
    if stem.endswith("at") and len(stem) >= 5:
        return stem + "e"
    return stem


def lemmatize(token: str, base: frozenset[str] | None = None) -> str:
    """Deterministic English lemma of a single token.

    Applies the irregular exception table first, then suffix rules
    (-ies/-ied -> y, -es/-ed/-ing stripping with consonant-undoubling and
    silent-e restoration). ``base`` is the vocabulary of known lemmas used to
    arbitrate ambiguous strips; it defaults to a general list and is widened
    with the active trigger lexicon during detection. Idempotent on its own
    output.
    """
    t = token.lower()
    if base is None:
        base = _GENERAL_LEMMAS
    if t in _IRREGULAR:
        return _IRREGULAR[t]
    if t in base:
        return t
    if len(t) >= 5 and t.endswith(("ies", "ied")):
        return t[:-3] + "y"
    if len(t) >= 5 and t.endswith(("ches", "shes", "sses", "xes", "zes", "oes")):
        return t[:-2]
    if len(t) >= 4 and t.endswith("s") and not t.endswith(("ss", "us", "is")):
        return t[:-1]
    if len(t) >= 4 and t.endswith("ed"):
        return _restore(t[:-2], base)
    if len(t) >= 5 and t.endswith("ing"):
        stem = t[:-3]
        if not any(v in stem for v in _VOWELS):
            return t
        return _restore(stem, base)
    return t


@dataclass(frozen=True)
class EventMention:
    """A detected trigger word with full provenance into the corpus."""

    doc_id: str
    section: str
    sentence_index: int
    start: int
    end: int
    surface: str
    lemma: str
    source: str = "lexicon"

    @property
    def char_span(self) -> tuple[int, int]:
        return (self.start, self.end)

    def position(self) -> tuple[str, str, int, int, int]:
        return (self.doc_id, self.section, self.sentence_index, self.start, self.end)


@dataclass(frozen=True)
class FrequencyTable:
    """Per-gender event dictionary: lemma -> occurrence count."""

    gender: str
    counts: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __contains__(self, lemma: str) -> bool:
        return lemma in self.counts

    def __getitem__(self, lemma: str) -> int:
        return self.counts[lemma]

    def merged(self, other: "FrequencyTable") -> "FrequencyTable":
        """Associative, commutative merge of two same-gender tables."""
        if other.gender != self.gender:
            raise ValueError("cannot merge tables of different genders")
        counts = dict(self.counts)
        for lemma, n in other.counts.items():
            counts[lemma] = counts.get(lemma, 0) + n
        return FrequencyTable(self.gender, counts)


@dataclass(frozen=True)
class TriggerLexicon:
    """Designated event trigger lemmas, optionally tagged with an event type."""

    entries: frozenset[str]
    type_map: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        bad = {t for t in self.type_map.values() if t not in EVENT_TYPES}
        if bad:
            raise ConfigError(f"unknown event type tags {sorted(bad)}; expected one of {EVENT_TYPES}")

    def __contains__(self, lemma: str) -> bool:
        return lemma in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def load_lexicon(path: str | Path) -> TriggerLexicon:
    """Read a lexicon file: one lemma per line, optional tab-separated type tag."""
    entries: set[str] = set()
    type_map: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        lemma = parts[0].strip().lower()
        if not lemma:
            continue
        entries.add(lemma)
        if len(parts) > 1 and parts[1].strip():
            type_map[lemma] = parts[1].strip()
    return TriggerLexicon(entries=frozenset(entries), type_map=type_map)


def default_lexicon() -> TriggerLexicon:
    from .resources import bundled_path

    return load_lexicon(bundled_path("lexicon"))


def tag_event_type(lemma: str, lexicon: TriggerLexicon) -> str | None:
    """Event type tag of a lemma, or None when the lexicon does not tag it."""
    return lexicon.type_map.get(lemma)


def detect_events(sentences: Iterable[Sentence], lexicon: TriggerLexicon) -> list[EventMention]:
    """Detect trigger mentions: one per token whose lemma is a lexicon entry.

    Mentions come back ordered by (doc, section, sentence, start) regardless
    of the input sentence order.
    """
    if len(lexicon) == 0:
        raise ConfigError("trigger lexicon is empty; nothing could ever be detected")
    base = _GENERAL_LEMMAS | lexicon.entries
    mentions = []
    for sentence in sentences:
        for surface, start, end in tokenize_spans(sentence.text):
            lemma = lemmatize(surface, base)
            if lemma in lexicon.entries:
                mentions.append(
                    EventMention(
                        doc_id=sentence.doc_id,
                        section=sentence.section,
                        sentence_index=sentence.index,
                        start=start,
                        end=end,
                        surface=surface,
                        lemma=lemma,
                        source="lexicon",
                    )
                )
    mentions.sort(key=lambda m: m.position())
    return mentions


def detect_corpus(
    corpus: Corpus, lexicon: TriggerLexicon, section: str | None = None, workers: int = 1
) -> list[EventMention]:
    """Run the lexicon detector over every record (optionally one section).

    ``workers > 1`` fans the per-document work out to a thread pool; results
    are identical to the serial run because mentions are merged by sort key.
    """

    def _one(record):
        sents = []
        for sec in sorted(record.sections):
            if section is not None and sec != section:
                continue
            sents.extend(split_sentences(record.sections[sec], doc_id=record.id, section=sec))
        return detect_events(sents, lexicon)

    if workers <= 1:
        chunks = [_one(r) for r in corpus]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_one, list(corpus)))
    mentions = [m for chunk in chunks for m in chunk]
    mentions.sort(key=lambda m: m.position())
    return mentions


_ANNOTATION_FIELDS = ("doc_id", "section", "sentence_index", "start", "end", "surface", "lemma")


def ingest_annotations(path: str | Path, corpus: Corpus) -> list[EventMention]:
    """Import externally produced mentions from Annotation JSONL.

    Every line is validated against the corpus: the doc and section must
    exist, the sentence index must be in range for this package's sentence
    splitting, the span must lie inside the sentence, and the recorded
    surface must equal the sentence slice byte-for-byte.
    """
    mentions = []
    sentence_cache: dict[tuple[str, str], list] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AnnotationFormatError(f"malformed JSON ({exc.msg})", line_no) from exc
            for key in _ANNOTATION_FIELDS:
                if key not in obj:
                    raise AnnotationFormatError(f"missing field {key!r}", line_no)
            try:
                record = corpus.record(obj["doc_id"])
            except KeyError:
                raise AnnotationFormatError(f"unknown doc_id {obj['doc_id']!r}", line_no)
            section = obj["section"]
            if section not in record.sections:
                raise AnnotationFormatError(
                    f"doc {record.id!r} has no section {section!r}", line_no
                )
            key = (record.id, section)
            if key not in sentence_cache:
                sentence_cache[key] = split_sentences(
                    record.sections[section], doc_id=record.id, section=section
                )
            sentences = sentence_cache[key]
            idx = obj["sentence_index"]
            if not isinstance(idx, int) or not 0 <= idx < len(sentences):
                raise AnnotationFormatError(
                    f"sentence index {idx!r} out of range for doc {record.id!r} "
                    f"section {section!r} ({len(sentences)} sentences)",
                    line_no,
                )
            text = sentences[idx].text
            start, end = obj["start"], obj["end"]
            if not (isinstance(start, int) and isinstance(end, int) and 0 <= start < end <= len(text)):
                raise AnnotationFormatError(
                    f"span ({start!r}, {end!r}) out of bounds for sentence of length {len(text)}",
                    line_no,
                )
            if text[start:end] != obj["surface"]:
                raise AnnotationFormatError(
                    f"surface {obj['surface']!r} does not match sentence slice {text[start:end]!r}",
                    line_no,
                )
            lemma = obj["lemma"]
            if not isinstance(lemma, str) or not lemma or lemma != lemma.lower():
                raise AnnotationFormatError(f"lemma {lemma!r} must be non-empty lowercase", line_no)
            mentions.append(
                EventMention(
                    doc_id=record.id,
                    section=section,
                    sentence_index=idx,
                    start=start,
                    end=end,
                    surface=obj["surface"],
                    lemma=lemma,
                    source="external",
                )
            )
    mentions.sort(key=lambda m: m.position())
    return mentions


def write_annotations(mentions: Sequence[EventMention], path: str | Path) -> None:
    """Write mentions as Annotation JSONL (compact, field order fixed)."""
    with open(path, "w", encoding="utf-8") as fh:
        for m in mentions:
            obj = {
                "doc_id": m.doc_id,
                "section": m.section,
                "sentence_index": m.sentence_index,
                "start": m.start,
                "end": m.end,
                "surface": m.surface,
                "lemma": m.lemma,
            }
            fh.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")


def _balanced_ids(records, seed: int) -> set[str]:
    """Deterministically downsample to min(F, M) records per occupation."""
    rng = random.Random(seed)
    keep: set[str] = set()
    by_occ: dict[str, dict[str, list[str]]] = {}
    for r in records:
        by_occ.setdefault(r.occupation, {"F": [], "M": []})[r.gender].append(r.id)
    for occ in sorted(by_occ):
        f_ids = sorted(by_occ[occ]["F"])
        m_ids = sorted(by_occ[occ]["M"])
        n = min(len(f_ids), len(m_ids))
        keep.update(rng.sample(f_ids, n))
        keep.update(rng.sample(m_ids, n))
    return keep


def build_frequency_tables(
    mentions: Iterable[EventMention],
    corpus: Corpus,
    section_filter: str,
    occupation_filter: str | None = None,
    balance: bool = False,
    seed: int = 0,
) -> tuple[FrequencyTable, FrequencyTable]:
    """Aggregate mention counts per lemma per gender within one corpus slice.

    Returns ``(male_table, female_table)``. With ``balance=True`` the larger
    gender group is first downsampled to the smaller one's size (per
    occupation, deterministic in ``seed``) so both dictionaries describe the
    same number of celebrities.
    """
    records = filter_records(corpus, section=section_filter, occupation=occupation_filter)
    if not records:
        warnings.warn(
            f"no documents carry section {section_filter!r}"
            + (f" for occupation {occupation_filter!r}" if occupation_filter else ""),
            stacklevel=2,
        )
        return FrequencyTable("M", {}), FrequencyTable("F", {})
    keep = _balanced_ids(records, seed) if balance else {r.id for r in records}
    gender_of = {r.id: r.gender for r in records}
    counts: dict[str, dict[str, int]] = {"M": {}, "F": {}}
    for m in mentions:
        if m.section != section_filter or m.doc_id not in keep:
            continue
        table = counts[gender_of[m.doc_id]]
        table[m.lemma] = table.get(m.lemma, 0) + 1
    return FrequencyTable("M", counts["M"]), FrequencyTable("F", counts["F"])
