"""Percentile significance analysis and detector quality evaluation.

The percentile check guards against cherry-picking rare events: every
extracted event is located in its own gender's frequency-sorted event list
(competition ranking, ties share the best rank) and, when present, in the
opposite gender's list. Detector evaluation compares predicted mentions to a
gold set with span-exact matching.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Corpus
from .detect import EventMention, FrequencyTable
from .rank import RankedEvents


@dataclass(frozen=True)
class PercentileRow:
    lemma: str
    gender: str
    own_percentile: float
    opposite_percentile: float | None


@dataclass(frozen=True)
class PercentileReport:
    rows: tuple[PercentileRow, ...]
    own_band: float = 10.0
    opposite_band: float = 40.0

    @property
    def all_within_own_band(self) -> bool:
        return all(r.own_percentile <= self.own_band for r in self.rows)

    @property
    def all_within_opposite_band(self) -> bool:
        present = [r.opposite_percentile for r in self.rows if r.opposite_percentile is not None]
        return all(p <= self.opposite_band for p in present)


@dataclass(frozen=True)
class EvalMetrics:
    """Span-exact detector scores. Ratios are in [0, 1]; report them x100."""

    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float | None:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else None

    @property
    def recall(self) -> float | None:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else None

    @property
    def f1(self) -> float | None:
        p, r = self.precision, self.recall
        if p is None or r is None or (p + r) == 0:
            return None
        return 2 * p * r / (p + r)


def frequency_percentile(lemma: str, table: FrequencyTable) -> float | None:
    """Competition-ranked percentile of a lemma in its frequency table.

    Rank 1 is the most frequent event; ties share the best rank. The value is
    100 * rank / (number of distinct events), so smaller means more frequent.
    Returns None when the lemma is absent.
    """
    if lemma not in table:
        return None
    count = table[lemma]
    rank = 1 + sum(1 for c in table.counts.values() if c > count)
    return 100.0 * rank / len(table.counts)


def percentile_report(
    ranked: RankedEvents,
    male_table: FrequencyTable,
    female_table: FrequencyTable,
    own_band: float = 10.0,
    opposite_band: float = 40.0,
) -> PercentileReport:
    """Locate every extracted event in both gender's frequency distributions."""
    rows = []
    for entries, gender, own, opposite in (
        (ranked.top_female, "F", female_table, male_table),
        (ranked.top_male, "M", male_table, female_table),
    ):
        for entry in entries:
            own_pct = frequency_percentile(entry.lemma, own)
            if own_pct is None:
                raise ValueError(
                    f"{entry.lemma!r} was extracted for gender {gender} but is missing "
                    "from that gender's table; ranked lists and tables disagree"
                )
            rows.append(
                PercentileRow(
                    lemma=entry.lemma,
                    gender=gender,
                    own_percentile=own_pct,
                    opposite_percentile=frequency_percentile(entry.lemma, opposite),
                )
            )
    return PercentileReport(rows=tuple(rows), own_band=own_band, opposite_band=opposite_band)


def evaluate_detector(
    gold: Iterable[EventMention], predicted: Iterable[EventMention]
) -> EvalMetrics:
    """Span-exact precision/recall/F1 of predicted mentions against gold."""
    gold_keys = {m.position() for m in gold}
    pred_keys = {m.position() for m in predicted}
    tp = len(gold_keys & pred_keys)
    return EvalMetrics(tp=tp, fp=len(pred_keys - gold_keys), fn=len(gold_keys - pred_keys))


def evaluate_detector_relaxed(
    gold: Iterable[EventMention], predicted: Iterable[EventMention]
) -> EvalMetrics:
    """Relaxed matching: same lemma in the same sentence counts as a hit."""
    gold_keys = {(m.doc_id, m.section, m.sentence_index, m.lemma) for m in gold}
    pred_keys = {(m.doc_id, m.section, m.sentence_index, m.lemma) for m in predicted}
    tp = len(gold_keys & pred_keys)
    return EvalMetrics(tp=tp, fp=len(pred_keys - gold_keys), fn=len(gold_keys - pred_keys))


def evaluate_by_gender(
    gold: Sequence[EventMention], predicted: Sequence[EventMention], corpus: Corpus
) -> dict[str, EvalMetrics]:
    """Detector scores split by the gender of the mention's document."""
    out = {}
    for gender in ("F", "M"):
        ids = {r.id for r in corpus if r.gender == gender}
        out[gender] = evaluate_detector(
            [m for m in gold if m.doc_id in ids],
            [m for m in predicted if m.doc_id in ids],
        )
    return out
