"""Odds Ratio computation and extraction of the top-k gender-distinct events.

For an event e, the odds ratio is the odds of drawing e from the male event
dictionary divided by the odds of drawing it from the female one:

    OR(e) = [m_e / (total_m - m_e)] / [f_e / (total_f - f_e)]

where each denominator sums the counts of every *other* event in that
dictionary. OR > 1 leans male, OR < 1 leans female. Ratios are computed in
exact rational arithmetic and only converted to float at the boundary.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .detect import FrequencyTable
from .errors import DegenerateTableError

MALE_EXCLUSIVE = "male_exclusive"
FEMALE_EXCLUSIVE = "female_exclusive"


@dataclass(frozen=True)
class OddsRatioEntry:
    lemma: str
    male_count: int
    female_count: int
    odds_ratio: float | str
    calibrated: bool = False


@dataclass(frozen=True)
class RankedEvents:
    """Top-k lists per gender: ``top_male`` descending OR, ``top_female`` ascending."""

    top_male: tuple[OddsRatioEntry, ...]
    top_female: tuple[OddsRatioEntry, ...]
    k: int
    male_exclusive: tuple[OddsRatioEntry, ...] = ()
    female_exclusive: tuple[OddsRatioEntry, ...] = ()


def _odds_ratio_fraction(
    male_count: Fraction,
    male_total: Fraction,
    female_count: Fraction,
    female_total: Fraction,
    lemma: str,
) -> Fraction:
    male_rest = male_total - male_count
    female_rest = female_total - female_count
    if male_rest <= 0 or female_rest <= 0:
        raise DegenerateTableError(
            f"cannot compute an odds ratio for {lemma!r}: a table has no other events "
            "(remaining total is zero)"
        )
    if male_count <= 0 or female_count <= 0:
        raise ValueError(f"{lemma!r} needs a positive count in both tables")
    return (male_count / male_rest) / (female_count / female_rest)


def odds_ratio(male_table: FrequencyTable, female_table: FrequencyTable, lemma: str) -> float:
    """Odds ratio of one event across the two gender dictionaries.

    The lemma must be present with count >= 1 in both tables and each table
    must contain at least one other event; otherwise the ratio is undefined
    (exclusive events are handled by :func:`rank_events`, which reports them
    with a sentinel instead of a number).
    """
    for table, side in ((male_table, "male"), (female_table, "female")):
        if lemma not in table:
            raise KeyError(f"{lemma!r} is missing from the {side} table (exclusive event)")
    return float(
        _odds_ratio_fraction(
            Fraction(male_table[lemma]),
            Fraction(male_table.total),
            Fraction(female_table[lemma]),
            Fraction(female_table.total),
            lemma,
        )
    )


def _tiebreak(entry: OddsRatioEntry) -> tuple[int, str]:
    # Ties broken by higher combined count, then lemma.
    return (-(entry.male_count + entry.female_count), entry.lemma)


def rank_events(
    male_table: FrequencyTable,
    female_table: FrequencyTable,
    k: int,
    min_count: int = 1,
    smoothing: float = 0.0,
    adjusted: Mapping[str, tuple[Fraction, Fraction]] | None = None,
) -> RankedEvents:
    """Rank events by odds ratio and split off the k most skewed per gender.

    Events present in both tables with both counts >= ``min_count`` are
    ranked; events seen for only one gender are returned in the exclusive
    lists unless ``smoothing`` > 0, in which case the Haldane-Anscombe
    correction (adding ``smoothing`` to all four odds cells) pulls them into
    the ranking. ``adjusted`` optionally overrides (male, female) counts with
    exact rationals; it is how recall calibration feeds corrected
    frequencies through the same ranking path.

    If fewer than 2k events are rankable the lists shrink (disjointness wins
    over length) and a warning is emitted.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    adjusted = adjusted or {}
    smooth = Fraction(smoothing).limit_denominator(10**6) if smoothing else Fraction(0)

    def counts_of(lemma: str) -> tuple[Fraction, Fraction]:
        if lemma in adjusted:
            return adjusted[lemma]
        return (
            Fraction(male_table.counts.get(lemma, 0)),
            Fraction(female_table.counts.get(lemma, 0)),
        )

    lemmas = sorted(set(male_table.counts) | set(female_table.counts))
    male_total = sum((counts_of(l)[0] for l in lemmas), Fraction(0))
    female_total = sum((counts_of(l)[1] for l in lemmas), Fraction(0))

    ranked: list[tuple[Fraction, OddsRatioEntry]] = []
    male_only: list[OddsRatioEntry] = []
    female_only: list[OddsRatioEntry] = []
    for lemma in lemmas:
        raw_m = male_table.counts.get(lemma, 0)
        raw_f = female_table.counts.get(lemma, 0)
        in_both = raw_m >= min_count and raw_f >= min_count
        rankable = in_both or (smooth > 0 and max(raw_m, raw_f) >= min_count)
        if rankable:
            adj_m, adj_f = counts_of(lemma)
            # Haldane-Anscombe adds `smooth` to all four odds cells, so the
            # remaining-total cell (total - count) also gains one `smooth`.
            ratio = _odds_ratio_fraction(
                adj_m + smooth,
                male_total + 2 * smooth,
                adj_f + smooth,
                female_total + 2 * smooth,
                lemma,
            ) if smooth else _odds_ratio_fraction(adj_m, male_total, adj_f, female_total, lemma)
            entry = OddsRatioEntry(
                lemma=lemma,
                male_count=raw_m,
                female_count=raw_f,
                odds_ratio=float(ratio),
                calibrated=lemma in adjusted,
            )
            ranked.append((ratio, entry))
        elif raw_m >= min_count:
            male_only.append(OddsRatioEntry(lemma, raw_m, raw_f, MALE_EXCLUSIVE))
        elif raw_f >= min_count:
            female_only.append(OddsRatioEntry(lemma, raw_m, raw_f, FEMALE_EXCLUSIVE))

    ranked.sort(key=lambda pair: (-pair[0], *_tiebreak(pair[1])))
    n = len(ranked)
    if n < 2 * k:
        warnings.warn(f"only {n} rankable events for k={k}; lists will be shorter", stacklevel=2)
    m_take = min(k, (n + 1) // 2)
    f_take = min(k, n - m_take)
    top_male = tuple(entry for _, entry in ranked[:m_take])
    # Ascending OR with the same tie-break, so gender-swapping the input
    # tables maps top_male onto top_female element-for-element.
    female_pairs = sorted(ranked[n - f_take :], key=lambda pair: (pair[0], *_tiebreak(pair[1])))
    top_female = tuple(entry for _, entry in female_pairs)
    male_only.sort(key=lambda e: (-e.male_count, e.lemma))
    female_only.sort(key=lambda e: (-e.female_count, e.lemma))
    return RankedEvents(
        top_male=top_male,
        top_female=top_female,
        k=k,
        male_exclusive=tuple(male_only),
        female_exclusive=tuple(female_only),
    )
