"""Word Embedding Association Test scoring over event lists or raw text.

Given two target token lists (female-associated events E_f and
male-associated events E_m) and two attribute lists (A female, B male), the
per-word association is

    s(w, A, B) = mean_{a in A} cos(w, a) - mean_{b in B} cos(w, b)

and the raw test statistic is S = sum_{E_f} s - sum_{E_m} s, so positive
values mean female events sit closer to female attributes. The normalized
effect size (mean difference over the pooled standard deviation of s across
both target lists) is also reported; it is the bounded variant whose range
is [-2, 2].

The starred variant scores every distinct non-stop-word token of the raw
section texts instead of the extracted events.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus, filter_records, tokenize
from .errors import EmbeddingFormatError, EmbeddingLookupError

DEFAULT_FEMALE_ATTRIBUTES = ("female", "woman", "girl", "sister", "she", "her", "hers", "daughter")
DEFAULT_MALE_ATTRIBUTES = ("male", "man", "boy", "brother", "he", "him", "his", "son")


@dataclass(frozen=True)
class AttributeLists:
    female: tuple[str, ...] = DEFAULT_FEMALE_ATTRIBUTES
    male: tuple[str, ...] = DEFAULT_MALE_ATTRIBUTES


@dataclass(frozen=True)
class EmbeddingTable:
    dimension: int
    vectors: dict[str, np.ndarray]

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __getitem__(self, token: str) -> np.ndarray:
        try:
            return self.vectors[token]
        except KeyError:
            raise EmbeddingLookupError(f"no embedding for token {token!r}")

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True)
class WeatResult:
    raw_score: float
    effect_size: float
    per_word: dict[str, float]
    skipped_tokens: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "raw_score": self.raw_score,
            "effect_size": self.effect_size,
            "per_word": {t: self.per_word[t] for t in sorted(self.per_word)},
            "skipped_tokens": list(self.skipped_tokens),
        }


def load_embeddings(path: str | Path, vocab: Iterable[str] | None = None) -> EmbeddingTable:
    """Load a text-format vector file: each line is a token followed by d floats.

    The first line fixes the dimension; later lines that disagree raise
    :class:`EmbeddingFormatError` with their line number. When ``vocab`` is
    given, only those tokens are kept (memory control for big files).
    Duplicate tokens keep the last occurrence, with a warning.
    """
    wanted = {t.lower() for t in vocab} if vocab is not None else None
    vectors: dict[str, np.ndarray] = {}
    dimension: int | None = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2 or not parts[0]:
                if not line.strip():
                    continue
                raise EmbeddingFormatError("expected a token followed by floats", line_no)
            token = parts[0].lower()
            if dimension is None:
                dimension = len(parts) - 1
            elif len(parts) - 1 != dimension:
                raise EmbeddingFormatError(
                    f"expected {dimension} components, found {len(parts) - 1}", line_no
                )
            if wanted is not None and token not in wanted:
                continue
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(f"non-numeric component for token {token!r}", line_no)
            if token in vectors:
                warnings.warn(f"duplicate embedding for {token!r} at line {line_no}; keeping last", stacklevel=2)
            vectors[token] = vec
    if dimension is None:
        raise EmbeddingFormatError("embedding file contains no vectors")
    return EmbeddingTable(dimension=dimension, vectors=vectors)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity of two equal-length nonzero vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine similarity is undefined for a zero vector")
    return float(np.dot(u, v) / (nu * nv))


def _attribute_vectors(tokens: Sequence[str], emb: EmbeddingTable, side: str) -> list[np.ndarray]:
    present = [emb[t] for t in tokens if t in emb]
    missing = [t for t in tokens if t not in emb]
    if missing:
        warnings.warn(f"{side} attribute tokens without embeddings skipped: {missing}", stacklevel=3)
    if not present:
        raise EmbeddingLookupError(f"no {side} attribute token has an embedding: {list(tokens)}")
    return present


def association(w: str, attrs_a: Sequence[str], attrs_b: Sequence[str], emb: EmbeddingTable) -> float:
    """s(w, A, B): mean cosine of w to list A minus mean cosine to list B."""
    wv = emb[w]
    a_vecs = _attribute_vectors(attrs_a, emb, "A-side")
    b_vecs = _attribute_vectors(attrs_b, emb, "B-side")
    mean_a = float(np.mean([cosine(wv, a) for a in a_vecs]))
    mean_b = float(np.mean([cosine(wv, b) for b in b_vecs]))
    return mean_a - mean_b


def weat_score(
    female_targets: Sequence[str],
    male_targets: Sequence[str],
    attrs_a: Sequence[str],
    attrs_b: Sequence[str],
    emb: EmbeddingTable,
) -> WeatResult:
    """Score two target lists against the attribute lists.

    Tokens without embeddings are skipped (and listed), never zero-vectored.
    Raises :class:`EmbeddingLookupError` if an entire target list would be
    skipped.
    """
    skipped = sorted({t for t in (*female_targets, *male_targets) if t not in emb})
    f_kept = [t for t in female_targets if t in emb]
    m_kept = [t for t in male_targets if t in emb]
    for kept, given, side in ((f_kept, female_targets, "female"), (m_kept, male_targets, "male")):
        if not given:
            raise ValueError(f"{side} target list is empty")
        if not kept:
            raise EmbeddingLookupError(
                f"every {side} target token lacks an embedding: {sorted(set(given))}"
            )
    per_word = {t: association(t, attrs_a, attrs_b, emb) for t in sorted(set(f_kept) | set(m_kept))}
    f_scores = np.array([per_word[t] for t in f_kept])
    m_scores = np.array([per_word[t] for t in m_kept])
    raw = float(f_scores.sum() - m_scores.sum())
    pooled = np.concatenate([f_scores, m_scores])
    spread = float(np.std(pooled))
    if spread == 0.0:
        effect = 0.0
    else:
        effect = float((f_scores.mean() - m_scores.mean()) / spread)
    return WeatResult(raw_score=raw, effect_size=effect, per_word=per_word, skipped_tokens=tuple(skipped))


def gendered_token_sets(
    corpus: Corpus,
    section: str,
    stop_words: Iterable[str],
    occupation: str | None = None,
) -> tuple[list[str], list[str]]:
    """Distinct non-stop-word tokens of each gender's raw text in one slice.

    Returns ``(female_tokens, male_tokens)``, each sorted for determinism.
    """
    stop = {s.lower() for s in stop_words}
    out: dict[str, set[str]] = {"F": set(), "M": set()}
    for record in filter_records(corpus, section=section, occupation=occupation):
        tokens = tokenize(record.sections[section])
        out[record.gender].update(t for t in tokens if t not in stop)
    return sorted(out["F"]), sorted(out["M"])


def weat_star(
    corpus: Corpus,
    section: str,
    stop_words: Iterable[str],
    attrs_a: Sequence[str],
    attrs_b: Sequence[str],
    emb: EmbeddingTable,
    occupation: str | None = None,
) -> WeatResult:
    """WEAT over all distinct non-stop-word tokens of the raw texts."""
    female_tokens, male_tokens = gendered_token_sets(corpus, section, stop_words, occupation)
    return weat_score(female_tokens, male_tokens, attrs_a, attrs_b, emb)
