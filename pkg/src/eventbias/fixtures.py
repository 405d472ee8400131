"""Deterministic synthetic corpus for tests, demos, and quick CLI runs.

Sixty biographies (30 F, 30 M) with career and personal-life sections whose
event mentions are planted with known counts: wedding/divorce/marriage/
elope/celebrate dominate the female career texts, war/arrest/sue/protest/
argue the male ones, a low dose of each appears on the opposite side, and 52
near-balanced background events pad the distributions. The construction
guarantees that the five injected events per gender are simultaneously the
most gender-skewed by odds ratio and the most frequent in their own gender's
dictionary (top 10 percent), while the opposite gender still sees them
inside the top 40 percent.

Everything is arithmetic on indices; no randomness anywhere.
"""

from __future__ import annotations

from pathlib import Path

from .corpus import CelebrityRecord, Corpus, ValidationReport, save_corpus

N_PER_GENDER = 30

FEMALE_DOMINANT = ("wedding", "divorce", "marriage", "elope", "celebrate")
MALE_DOMINANT = ("war", "arrest", "sue", "protest", "argue")
DOMINANT_TOTALS = (60, 54, 48, 42, 36)
# Counts the dominant events of one gender receive in the other gender's docs.
OPPOSITE_TOTALS = (6, 6, 5, 4, 4)

BACKGROUND = (
    "work", "move", "join", "sign", "write", "publish", "read", "travel", "visit",
    "open", "close", "start", "begin", "continue", "lead", "direct", "produce",
    "record", "perform", "teach", "study", "graduate", "train", "found", "launch",
    "release", "announce", "report", "describe", "state", "claim", "support",
    "vote", "win", "lose", "earn", "spend", "buy", "sell", "pay", "donate",
    "serve", "help", "meet", "talk", "speak", "tell", "play", "act", "appear",
    "host", "interview",
)

_PAST = {
    "work": "worked", "move": "moved", "join": "joined", "sign": "signed",
    "write": "wrote", "publish": "published", "read": "read", "travel": "traveled",
    "visit": "visited", "open": "opened", "close": "closed", "start": "started",
    "begin": "began", "continue": "continued", "lead": "led", "direct": "directed",
    "produce": "produced", "record": "recorded", "perform": "performed",
    "teach": "taught", "study": "studied", "graduate": "graduated", "train": "trained",
    "found": "founded", "launch": "launched", "release": "released",
    "announce": "announced", "report": "reported", "describe": "described",
    "state": "stated", "claim": "claimed", "support": "supported", "vote": "voted",
    "win": "won", "lose": "lost", "earn": "earned", "spend": "spent", "buy": "bought",
    "sell": "sold", "pay": "paid", "donate": "donated", "serve": "served",
    "help": "helped", "meet": "met", "talk": "talked", "speak": "spoke",
    "tell": "told", "play": "played", "act": "acted", "appear": "appeared",
    "host": "hosted", "interview": "interviewed", "celebrate": "celebrated",
    "sue": "sued", "protest": "protested", "argue": "argued",
}

_FEMALE_FIRST = (
    "Alma", "Bree", "Cleo", "Dina", "Elsa", "Fern", "Gail", "Hope", "Iris", "June",
    "Kate", "Lena", "Mona", "Nell", "Opal", "Page", "Quin", "Rhea", "Sage", "Tess",
    "Una", "Vera", "Wren", "Xena", "Yara", "Zola", "Avis", "Beth", "Cloe", "Dale",
)
_MALE_FIRST = (
    "Abel", "Bart", "Cole", "Dean", "Earl", "Ford", "Glen", "Hugh", "Ivan", "Jude",
    "Kent", "Lyle", "Milo", "Nils", "Otis", "Penn", "Quil", "Rolf", "Seth", "Tate",
    "Ugo", "Vern", "Wade", "Xan", "Yves", "Zeke", "Amos", "Boyd", "Carl", "Drew",
)
_SURNAMES = (
    "Ashford", "Birchwood", "Caldwell", "Dunmore", "Ellery", "Fairbank", "Granholm",
    "Hollis", "Ingram", "Jessop", "Kirkwood", "Lindqvist", "Mercer", "Norwood",
    "Oakhurst", "Pemberton", "Quitman", "Redgrave", "Selwyn", "Thornbury",
    "Underhill", "Vance", "Westbrook", "Yarrow", "Zeller", "Ashby", "Bexley",
    "Crowther", "Delmore", "Eastgate",
)


def _per_doc(total: int, doc_index: int) -> int:
    base, rem = divmod(total, N_PER_GENDER)
    return base + (1 if doc_index < rem else 0)


def _opposite_docs() -> dict[int, list[int]]:
    """Which doc indices carry each opposite-side event (by dominant index)."""
    spans: dict[int, list[int]] = {}
    cursor = 0
    for i, total in enumerate(OPPOSITE_TOTALS):
        spans[i] = list(range(cursor, cursor + total))
        cursor += total
    return spans


_NOUN_EVENTS = {"wedding", "marriage", "war", "birth"}


def _event_sentence(lemma: str, gender: str, year: int, surname: str) -> str:
    subj = "She" if gender == "F" else "He"
    if lemma in _NOUN_EVENTS:
        return f"The {lemma} was in {year}."
    if lemma == "divorce":
        spouse = "her first husband" if gender == "F" else "his first wife"
        return f"{subj} divorced {spouse} in {year}."
    if lemma == "elope":
        return f"{surname} eloped in {year}."
    if lemma == "arrest":
        return f"{subj} was arrested in {year}."
    return f"{subj} {_PAST[lemma]} in {year}."


def _career_text(gender: str, j: int, first: str, surname: str, occupation: str) -> str:
    own = FEMALE_DOMINANT if gender == "F" else MALE_DOMINANT
    other = MALE_DOMINANT if gender == "F" else FEMALE_DOMINANT
    role = {"writer": "a writer", "acting": "an actress" if gender == "F" else "an actor"}[occupation]
    sentences = [f"{first} {surname} was {role}."]
    tick = 0

    def year() -> int:
        nonlocal tick
        tick += 1
        return 1950 + (j * 3 + tick * 7) % 60

    for lemma, total in zip(own, DOMINANT_TOTALS):
        for _ in range(_per_doc(total, j)):
            sentences.append(_event_sentence(lemma, gender, year(), surname))
    opposite_docs = _opposite_docs()
    for i, lemma in enumerate(other):
        if j in opposite_docs[i]:
            sentences.append(_event_sentence(lemma, gender, year(), surname))
    offset = 0 if gender == "F" else 1
    for i, lemma in enumerate(BACKGROUND):
        count = 2 + (i + offset) % 4
        hits = sum(1 for t in range(count) if (i * 7 + t) % N_PER_GENDER == j)
        for _ in range(hits):
            sentences.append(_event_sentence(lemma, gender, year(), surname))
    return " ".join(sentences)


def _personal_text(gender: str, j: int) -> str:
    subj = "She" if gender == "F" else "He"
    sentences = [f"{subj} lived in the city."]
    if j < 10:
        child = "her daughter" if gender == "F" else "his son"
        sentences.append(f"The birth of {child} was in {1980 + j}.")
    return " ".join(sentences)


def fixture_records() -> list[CelebrityRecord]:
    records = []
    for gender, firsts, prefix in (("F", _FEMALE_FIRST, "f"), ("M", _MALE_FIRST, "m")):
        for j in range(N_PER_GENDER):
            occupation = "writer" if j < 20 else "acting"
            first = firsts[j]
            surname = _SURNAMES[j]
            sections = {"career": _career_text(gender, j, first, surname, occupation)}
            if j < 28:
                sections["personal_life"] = _personal_text(gender, j)
            records.append(
                CelebrityRecord(
                    id=f"{prefix}{j + 1:02d}",
                    name=f"{first} {surname}",
                    gender=gender,
                    occupation=occupation,
                    sections=sections,
                )
            )
    return records


def fixture_corpus() -> Corpus:
    records = fixture_records()
    return Corpus(records=tuple(records), report=ValidationReport(len(records), ()))


def planned_career_counts(gender: str) -> dict[str, int]:
    """The exact career-section counts the generator plants for one gender."""
    own = FEMALE_DOMINANT if gender == "F" else MALE_DOMINANT
    other = MALE_DOMINANT if gender == "F" else FEMALE_DOMINANT
    counts = dict(zip(own, DOMINANT_TOTALS))
    counts.update(zip(other, OPPOSITE_TOTALS))
    offset = 0 if gender == "F" else 1
    for i, lemma in enumerate(BACKGROUND):
        counts[lemma] = 2 + (i + offset) % 4
    return counts


def write_fixture_corpus(path: str | Path) -> None:
    save_corpus(fixture_records(), path)


def write_demo_embeddings(path: str | Path) -> None:
    """A 2-d embedding file aligned with the fixture's injected bias.

    Female attribute words sit on one axis, male attribute words on the
    other; female-dominant events lean toward the female axis and vice
    versa, so WEAT on the fixture ranking comes out positive.
    """
    from .detect import default_lexicon
    from .weat import DEFAULT_FEMALE_ATTRIBUTES, DEFAULT_MALE_ATTRIBUTES

    lines = []
    for token in DEFAULT_FEMALE_ATTRIBUTES:
        lines.append(f"{token} 1.0 0.0")
    for token in DEFAULT_MALE_ATTRIBUTES:
        lines.append(f"{token} 0.0 1.0")
    for token in FEMALE_DOMINANT:
        lines.append(f"{token} 0.95 0.31")
    for token in MALE_DOMINANT:
        lines.append(f"{token} 0.31 0.95")
    placed = set(DEFAULT_FEMALE_ATTRIBUTES) | set(DEFAULT_MALE_ATTRIBUTES)
    placed |= set(FEMALE_DOMINANT) | set(MALE_DOMINANT)
    for token in sorted(default_lexicon().entries - placed):
        lines.append(f"{token} 0.71 0.71")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(description="Write the bundled synthetic fixture files.")
    parser.add_argument("corpus_path", help="where to write the 60-doc corpus JSONL")
    parser.add_argument("--embeddings", help="also write the 2-d demo embedding file here")
    args = parser.parse_args(argv)
    write_fixture_corpus(args.corpus_path)
    if args.embeddings:
        write_demo_embeddings(args.embeddings)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
