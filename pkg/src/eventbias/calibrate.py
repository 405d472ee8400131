"""Detector calibration via template substitution.

Raw frequency differences can come from the detector rather than the corpus:
a model that finds "married" more reliably in male-voiced sentences inflates
the male count. To measure that, sentences where the detector found a target
event become *templates*: their name, pronoun, and gendered-attribute spans
are marked, each template is manually verified, and then re-instantiated
with 50 female and 50 male first names (100 synthetic sentences per
template, pronouns and attributes swapped whenever the name changes the
gender). Detection recall per gender over these all-positive instances then
corrects each raw count: corrected = count / recall, applied only when the
two genders' recalls differ by more than a gate (default 0.05).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Collection, Iterable, Mapping, Sequence

from .corpus import Corpus, split_sentences, tokenize_spans
from .detect import EventMention, FrequencyTable, TriggerLexicon, detect_events, lemmatize
from .errors import CalibrationError, ConfigError, TemplateError
from .rank import RankedEvents, rank_events

PRONOUN_KINDS = ("subject", "object", "poss_det", "poss_pron", "reflexive")

GENDERS = ("F", "M")


@dataclass(frozen=True)
class SwapTable:
    """Bidirectional pronoun and gender-attribute swap pairs.

    Pronoun pairs are keyed by grammatical kind, which is what keeps the
    female surface "her" invertible: an object span swaps to "him", a
    possessive-determiner span to "his", and the male-to-female direction
    recovers the right form from the span's kind. Attribute pairs map
    surfaces both ways; when several female forms share a male form
    (miss/mrs/ms -> mr) the first listed wins on the way back.
    """

    pronouns: dict[str, tuple[str, str]]
    attributes_f2m: dict[str, str]
    attributes_m2f: dict[str, str]

    def female_pronouns(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for kind, (f, _) in self.pronouns.items():
            out.setdefault(f, []).append(kind)
        return out

    def male_pronouns(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for kind, (_, m) in self.pronouns.items():
            out.setdefault(m, []).append(kind)
        return out

    def attribute_surfaces(self, gender: str) -> set[str]:
        return set(self.attributes_f2m if gender == "F" else self.attributes_m2f)

    def swap_pronoun(self, kind: str, target_gender: str) -> str:
        pair = self.pronouns[kind]
        return pair[1] if target_gender == "M" else pair[0]

    def swap_attribute(self, surface_lower: str, target_gender: str) -> str:
        table = self.attributes_f2m if target_gender == "M" else self.attributes_m2f
        try:
            return table[surface_lower]
        except KeyError:
            raise TemplateError(f"no swap entry for gender attribute {surface_lower!r}")


@dataclass(frozen=True)
class NameList:
    female: tuple[str, ...]
    male: tuple[str, ...]

    def __post_init__(self):
        overlap = {n.lower() for n in self.female} & {n.lower() for n in self.male}
        if overlap:
            raise ConfigError(f"name lists must be disjoint; shared: {sorted(overlap)}")


@dataclass(frozen=True)
class TemplateSentence:
    """A verified sentence containing a target event, with substitution spans.

    Spans are (start, end) character offsets into ``text``; pronoun spans
    carry their grammatical kind. ``verified`` starts False out of harvesting
    and must be flipped (via the review file) before the template may
    generate synthetic data.
    """

    template_id: str
    source_doc: str
    source_gender: str
    target_event: str
    text: str
    name_spans: tuple[tuple[int, int], ...] = ()
    pronoun_spans: tuple[tuple[int, int, str], ...] = ()
    attribute_spans: tuple[tuple[int, int], ...] = ()
    verified: bool = False
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        spans = [(s, e) for s, e in self.name_spans]
        spans += [(s, e) for s, e, _ in self.pronoun_spans]
        spans += [(s, e) for s, e in self.attribute_spans]
        spans.sort()
        for (s1, e1), (s2, _) in zip(spans, spans[1:]):
            if s2 < e1:
                raise TemplateError(f"overlapping spans in template {self.template_id!r}")
        for s, e in spans:
            if not 0 <= s < e <= len(self.text):
                raise TemplateError(f"span ({s}, {e}) out of bounds in template {self.template_id!r}")
        for _, _, kind in self.pronoun_spans:
            if kind not in PRONOUN_KINDS:
                raise TemplateError(f"unknown pronoun kind {kind!r}")


@dataclass(frozen=True)
class SyntheticInstance:
    """One generated sentence with its automatic ground-truth label."""

    template_id: str
    instance_id: str
    substituted_text: str
    assigned_name: str
    assigned_gender: str
    expected_event: str
    name_spans: tuple[tuple[int, int], ...] = ()
    pronoun_spans: tuple[tuple[int, int, str], ...] = ()
    attribute_spans: tuple[tuple[int, int], ...] = ()

    def to_template(self, source_doc: str = "") -> TemplateSentence:
        """View this instance as a (verified) template, enabling re-substitution."""
        return TemplateSentence(
            template_id=self.template_id,
            source_doc=source_doc or self.template_id,
            source_gender=self.assigned_gender,
            target_event=self.expected_event,
            text=self.substituted_text,
            name_spans=self.name_spans,
            pronoun_spans=self.pronoun_spans,
            attribute_spans=self.attribute_spans,
            verified=True,
        )


@dataclass(frozen=True)
class RecallRecord:
    lemma: str
    gender: str
    n_instances: int
    n_detected: int

    def __post_init__(self):
        if self.n_instances <= 0:
            raise CalibrationError(f"no instances for {self.lemma!r}/{self.gender}")
        if not 0 <= self.n_detected <= self.n_instances:
            raise CalibrationError(
                f"detected count {self.n_detected} out of range for {self.n_instances} instances"
            )

    @property
    def recall(self) -> float:
        return self.n_detected / self.n_instances

    @property
    def recall_fraction(self) -> Fraction:
        return Fraction(self.n_detected, self.n_instances)


def load_swap_table(path: str | Path) -> SwapTable:
    """Read a swap table file: kind<TAB>female_form<TAB>male_form per line."""
    pronouns: dict[str, tuple[str, str]] = {}
    f2m: dict[str, str] = {}
    m2f: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip().lower() for p in line.split("\t")]
        if len(parts) != 3 or not all(parts):
            raise ConfigError(f"bad swap table line: {raw!r}")
        kind, female, male = parts
        if kind == "attr":
            f2m.setdefault(female, male)
            m2f.setdefault(male, female)
        elif kind in PRONOUN_KINDS:
            if kind in pronouns:
                raise ConfigError(f"duplicate pronoun kind {kind!r}")
            pronouns[kind] = (female, male)
        else:
            raise ConfigError(f"unknown swap kind {kind!r}")
    missing = [k for k in PRONOUN_KINDS if k not in pronouns]
    if missing:
        raise ConfigError(f"swap table lacks pronoun kinds: {missing}")
    return SwapTable(pronouns=pronouns, attributes_f2m=f2m, attributes_m2f=m2f)


def load_name_list(path: str | Path) -> NameList:
    """Read a name list file: Name<TAB>F|M per line."""
    female: list[str] = []
    male: list[str] = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) != 2 or parts[1] not in GENDERS or not parts[0]:
            raise ConfigError(f"bad name list line: {raw!r}")
        (female if parts[1] == "F" else male).append(parts[0])
    return NameList(female=tuple(female), male=tuple(male))


def default_swap_table() -> SwapTable:
    from .resources import bundled_path

    return load_swap_table(bundled_path("swaps"))


def default_name_list() -> NameList:
    from .resources import bundled_path

    return load_name_list(bundled_path("names"))


def _next_word_token(tokens: Sequence[tuple[str, int, int]], idx: int) -> str | None:
    return tokens[idx + 1][0] if idx + 1 < len(tokens) else None


def _pronoun_kind(
    surface_lower: str,
    tokens: Sequence[tuple[str, int, int]],
    idx: int,
    source_gender: str,
    verb_lexicon: Collection[str],
) -> tuple[str | None, bool]:
    """Kind of a pronoun token, plus whether a heuristic had to guess.

    The ambiguous surfaces are female "her" (object vs possessive determiner)
    and male "his" (determiner vs standalone possessive): the possessive
    reading wins when a following word exists and is not a verb, otherwise
    the non-determiner reading wins.
    """
    if source_gender == "F":
        fixed = {"she": "subject", "hers": "poss_pron", "herself": "reflexive"}
        if surface_lower in fixed:
            return fixed[surface_lower], False
        if surface_lower == "her":
            nxt = _next_word_token(tokens, idx)
            if nxt is not None and lemmatize(nxt) not in verb_lexicon:
                return "poss_det", True
            return "object", True
    else:
        fixed = {"he": "subject", "him": "object", "himself": "reflexive"}
        if surface_lower in fixed:
            return fixed[surface_lower], False
        if surface_lower == "his":
            nxt = _next_word_token(tokens, idx)
            if nxt is not None and lemmatize(nxt) not in verb_lexicon:
                return "poss_det", True
            return "poss_pron", True
    return None, False


def build_template(
    text: str,
    template_id: str,
    source_doc: str,
    source_gender: str,
    target_event: str,
    celebrity_name: str,
    swaps: SwapTable | None = None,
    verb_lexicon: Collection[str] | None = None,
) -> TemplateSentence:
    """Locate name, pronoun, and attribute spans in one sentence."""
    swaps = swaps or default_swap_table()
    if verb_lexicon is None:
        from .detect import default_lexicon

        verb_lexicon = default_lexicon().entries
    name_parts = {p.lower() for p in celebrity_name.split() if p}
    own_pronouns = (
        swaps.female_pronouns() if source_gender == "F" else swaps.male_pronouns()
    )
    attr_surfaces = swaps.attribute_surfaces(source_gender)
    tokens = tokenize_spans(text)
    name_spans: list[tuple[int, int]] = []
    pronoun_spans: list[tuple[int, int, str]] = []
    attribute_spans: list[tuple[int, int]] = []
    flags: list[str] = []
    for idx, (surface, start, end) in enumerate(tokens):
        lower = surface.lower()
        if lower in name_parts:
            name_spans.append((start, end))
            continue
        if lower in own_pronouns:
            kind, guessed = _pronoun_kind(lower, tokens, idx, source_gender, verb_lexicon)
            if kind is None:
                continue
            pronoun_spans.append((start, end, kind))
            if guessed:
                flags.append(f"pronoun {surface!r} at {start} resolved to {kind} by next-token rule")
            continue
        if lower in attr_surfaces:
            attribute_spans.append((start, end))
    return TemplateSentence(
        template_id=template_id,
        source_doc=source_doc,
        source_gender=source_gender,
        target_event=target_event,
        text=text,
        name_spans=tuple(name_spans),
        pronoun_spans=tuple(pronoun_spans),
        attribute_spans=tuple(attribute_spans),
        verified=False,
        flags=tuple(flags),
    )


def harvest_templates(
    corpus: Corpus,
    mentions: Iterable[EventMention],
    target_event: str,
    swaps: SwapTable | None = None,
    verb_lexicon: Collection[str] | None = None,
) -> list[TemplateSentence]:
    """One unverified template per sentence where the target event was detected.

    Sentences come from the same splitter the detector used, so span indices
    line up. The result is meant to be written to a review file, verified by
    a human, and read back before synthetic generation.
    """
    hits: dict[tuple[str, str, int], EventMention] = {}
    for m in mentions:
        if m.lemma == target_event:
            hits.setdefault((m.doc_id, m.section, m.sentence_index), m)
    if not hits:
        warnings.warn(f"no sentences contain a detected {target_event!r} mention", stacklevel=2)
        return []
    templates = []
    sentence_cache: dict[tuple[str, str], list] = {}
    for doc_id, section, sentence_index in sorted(hits):
        record = corpus.record(doc_id)
        key = (doc_id, section)
        if key not in sentence_cache:
            sentence_cache[key] = split_sentences(
                record.sections[section], doc_id=doc_id, section=section
            )
        sentence = sentence_cache[key][sentence_index]
        templates.append(
            build_template(
                text=sentence.text,
                template_id=f"{doc_id}:{section}:{sentence_index}:{target_event}",
                source_doc=doc_id,
                source_gender=record.gender,
                target_event=target_event,
                celebrity_name=record.name,
                swaps=swaps,
                verb_lexicon=verb_lexicon,
            )
        )
    return templates


def _match_case(original: str, replacement: str) -> str:
    if original.isupper() and len(original) > 1:
        return replacement.upper()
    if original[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def substitute(
    template: TemplateSentence,
    name: str,
    target_gender: str,
    swaps: SwapTable | None = None,
    instance_id: str = "",
) -> SyntheticInstance:
    """Instantiate a verified template with a name and a target gender.

    Every name span becomes ``name``. When the target gender differs from the
    template's source gender, every pronoun span is swapped according to its
    kind and every attribute span through the swap table, preserving the
    original token's capitalization. Same-gender substitution leaves pronouns
    and attributes untouched. The returned instance carries updated spans, so
    swapping back through :meth:`SyntheticInstance.to_template` restores the
    original text byte-for-byte.
    """
    if not template.verified:
        raise TemplateError(
            f"template {template.template_id!r} is not verified; run the review step first"
        )
    if not name or not name.strip():
        raise TemplateError("substitution name must be non-blank")
    if target_gender not in GENDERS:
        raise TemplateError(f"target gender must be F or M, not {target_gender!r}")
    swaps = swaps or default_swap_table()
    swap_needed = target_gender != template.source_gender

    ops: list[tuple[int, int, str, str, str | None]] = []
    for start, end in template.name_spans:
        ops.append((start, end, name, "name", None))
    for start, end, kind in template.pronoun_spans:
        surface = template.text[start:end]
        repl = _match_case(surface, swaps.swap_pronoun(kind, target_gender)) if swap_needed else surface
        ops.append((start, end, repl, "pronoun", kind))
    for start, end in template.attribute_spans:
        surface = template.text[start:end]
        repl = (
            _match_case(surface, swaps.swap_attribute(surface.lower(), target_gender))
            if swap_needed
            else surface
        )
        ops.append((start, end, repl, "attr", None))
    ops.sort(key=lambda op: op[0])

    parts: list[str] = []
    new_name: list[tuple[int, int]] = []
    new_pron: list[tuple[int, int, str]] = []
    new_attr: list[tuple[int, int]] = []
    cursor = 0
    out_len = 0
    for start, end, repl, tag, kind in ops:
        parts.append(template.text[cursor:start])
        out_len += start - cursor
        new_start = out_len
        parts.append(repl)
        out_len += len(repl)
        if tag == "name":
            new_name.append((new_start, out_len))
        elif tag == "pronoun":
            new_pron.append((new_start, out_len, kind))
        else:
            new_attr.append((new_start, out_len))
        cursor = end
    parts.append(template.text[cursor:])
    return SyntheticInstance(
        template_id=template.template_id,
        instance_id=instance_id,
        substituted_text="".join(parts),
        assigned_name=name,
        assigned_gender=target_gender,
        expected_event=template.target_event,
        name_spans=tuple(new_name),
        pronoun_spans=tuple(new_pron),
        attribute_spans=tuple(new_attr),
    )


def generate_synthetic(
    template: TemplateSentence,
    names: NameList | None = None,
    swaps: SwapTable | None = None,
) -> list[SyntheticInstance]:
    """Exactly 100 instances per template: the 50 female names, then the 50 male.

    Name order follows the name list, so output is deterministic. Templates
    without a name span still yield 100 instances: the same-gender half is an
    unmodified copy of the template text, the other half gets the pronoun and
    attribute swap.
    """
    names = names or default_name_list()
    if len(names.female) != 50 or len(names.male) != 50:
        raise ConfigError(
            f"name list must hold exactly 50 female and 50 male names, "
            f"found {len(names.female)}F/{len(names.male)}M"
        )
    instances = []
    for i, name in enumerate(names.female):
        instances.append(substitute(template, name, "F", swaps, f"{template.template_id}#{i:03d}"))
    for i, name in enumerate(names.male, start=50):
        instances.append(substitute(template, name, "M", swaps, f"{template.template_id}#{i:03d}"))
    return instances


Detector = Callable[[str], Collection[str]]


def as_detector(detector: "TriggerLexicon | Detector") -> Detector:
    """Normalize a detector argument to a text -> detected-lemmas callable."""
    if isinstance(detector, TriggerLexicon):

        def _detect(text: str) -> set[str]:
            sentences = split_sentences(text)
            return {m.lemma for m in detect_events(sentences, detector)}

        return _detect
    return detector


def detection_recall(
    detector: "TriggerLexicon | Detector",
    instances: Sequence[SyntheticInstance],
    lemma: str,
) -> tuple[RecallRecord, RecallRecord]:
    """Per-gender detection recall over synthetic instances of one event.

    Every instance is a ground-truth positive by construction, so recall is
    simply detected/total per gender. Returns ``(female_record, male_record)``.
    """
    detect = as_detector(detector)
    counts = {"F": [0, 0], "M": [0, 0]}
    for inst in instances:
        if inst.expected_event != lemma:
            raise CalibrationError(
                f"instance {inst.instance_id!r} expects {inst.expected_event!r}, not {lemma!r}"
            )
        counts[inst.assigned_gender][0] += 1
        if lemma in detect(inst.substituted_text):
            counts[inst.assigned_gender][1] += 1
    for gender in GENDERS:
        if counts[gender][0] == 0:
            raise CalibrationError(f"no {gender} instances for {lemma!r}")
    records = {
        g: RecallRecord(lemma=lemma, gender=g, n_instances=counts[g][0], n_detected=counts[g][1])
        for g in GENDERS
    }
    for g in GENDERS:
        if records[g].n_detected == 0:
            warnings.warn(
                f"detector found no {lemma!r} in any {g} instance; flag for review", stacklevel=2
            )
    return records["F"], records["M"]


def calibrate_frequency(raw_count: int, recall: float) -> float:
    """Estimate the true frequency of an event from its detection recall."""
    if raw_count < 1:
        raise ValueError("raw_count must be >= 1")
    if recall <= 0:
        raise CalibrationError(
            f"cannot calibrate a count with zero recall (raw_count={raw_count}); "
            "the event must be excluded or its templates reviewed"
        )
    if recall > 1:
        raise ValueError("recall cannot exceed 1")
    return raw_count / recall


def calibrated_ranking(
    male_table: FrequencyTable,
    female_table: FrequencyTable,
    recalls: Iterable[RecallRecord],
    k: int,
    gate: float = 0.05,
    min_count: int = 1,
    smoothing: float = 0.0,
) -> RankedEvents:
    """Re-rank events after recall calibration.

    For every event whose two genders' recalls differ by more than ``gate``,
    each gender's count is replaced by count/recall (exact rational) before
    the odds ratios are recomputed; all other events keep their raw counts.
    Gated events with zero recall on a side that has a nonzero count cannot
    be calibrated and are excluded from the ranking with a diagnostic.
    """
    by_event: dict[str, dict[str, RecallRecord]] = {}
    for rec in recalls:
        by_event.setdefault(rec.lemma, {})[rec.gender] = rec

    gate_fraction = None if math.isinf(gate) else Fraction(gate).limit_denominator(10**9)
    adjusted: dict[str, tuple[Fraction, Fraction]] = {}
    excluded: list[str] = []
    for lemma, recs in sorted(by_event.items()):
        if gate_fraction is None:
            break
        if "F" not in recs or "M" not in recs:
            continue
        gap = abs(recs["F"].recall_fraction - recs["M"].recall_fraction)
        if gap <= gate_fraction:
            continue
        raw_m = male_table.counts.get(lemma, 0)
        raw_f = female_table.counts.get(lemma, 0)
        if (raw_m > 0 and recs["M"].n_detected == 0) or (raw_f > 0 and recs["F"].n_detected == 0):
            excluded.append(lemma)
            continue
        adj_m = Fraction(raw_m) / recs["M"].recall_fraction if raw_m else Fraction(0)
        adj_f = Fraction(raw_f) / recs["F"].recall_fraction if raw_f else Fraction(0)
        adjusted[lemma] = (adj_m, adj_f)
    if excluded:
        warnings.warn(
            f"events excluded from the calibrated ranking (zero recall on a counted side): {excluded}",
            stacklevel=2,
        )
        male_table = FrequencyTable(
            male_table.gender, {l: c for l, c in male_table.counts.items() if l not in excluded}
        )
        female_table = FrequencyTable(
            female_table.gender, {l: c for l, c in female_table.counts.items() if l not in excluded}
        )
    return rank_events(
        male_table, female_table, k, min_count=min_count, smoothing=smoothing, adjusted=adjusted
    )


def template_to_dict(template: TemplateSentence) -> dict:
    return {
        "template_id": template.template_id,
        "source_doc": template.source_doc,
        "source_gender": template.source_gender,
        "target_event": template.target_event,
        "text": template.text,
        "name_spans": [list(s) for s in template.name_spans],
        "pronoun_spans": [list(s) for s in template.pronoun_spans],
        "attribute_spans": [list(s) for s in template.attribute_spans],
        "verified": template.verified,
        "flags": list(template.flags),
    }


def template_from_dict(obj: Mapping) -> TemplateSentence:
    try:
        return TemplateSentence(
            template_id=obj["template_id"],
            source_doc=obj["source_doc"],
            source_gender=obj["source_gender"],
            target_event=obj["target_event"],
            text=obj["text"],
            name_spans=tuple((int(s), int(e)) for s, e in obj.get("name_spans", [])),
            pronoun_spans=tuple((int(s), int(e), str(k)) for s, e, k in obj.get("pronoun_spans", [])),
            attribute_spans=tuple((int(s), int(e)) for s, e in obj.get("attribute_spans", [])),
            verified=bool(obj.get("verified", False)),
            flags=tuple(obj.get("flags", [])),
        )
    except KeyError as exc:
        raise TemplateError(f"review file entry is missing field {exc.args[0]!r}")


def write_review_file(templates: Iterable[TemplateSentence], path: str | Path) -> None:
    """Emit harvested templates for manual verification (JSONL)."""
    with open(path, "w", encoding="utf-8") as fh:
        for t in templates:
            fh.write(json.dumps(template_to_dict(t), ensure_ascii=False, separators=(",", ":")) + "\n")


def read_review_file(path: str | Path) -> list[TemplateSentence]:
    templates = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TemplateError(f"review file line {line_no}: malformed JSON ({exc.msg})")
            templates.append(template_from_dict(obj))
    return templates
