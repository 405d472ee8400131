"""Acceptance gate: one test per criterion, each at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one line per
criterion. Every expected value here is either an analytically derived
constant or recomputed inside the test by an independent oracle.
"""

import dataclasses
import json
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from conftest import run_cli, verify_review_file

from eventbias import analyze, calibrate, weat
from eventbias.calibrate import build_template, calibrate_frequency, default_swap_table, generate_synthetic, substitute
from eventbias.detect import EventMention, FrequencyTable
from eventbias.rank import odds_ratio


def _pass(name: str) -> None:
    print(f"[PASS] {name}")


def test_odds_ratio_exact_oracle_and_reciprocal():
    """1000 random tables: exact rational oracle within 1e-12, reciprocal within 1e-12, < 5 s."""
    rng = random.Random(20240)
    started = time.perf_counter()
    for _ in range(1000):
        n = rng.randint(2, 20)
        lemmas = [f"e{i}" for i in range(n)]
        male = {l: rng.randint(1, 100) for l in lemmas}
        female = {l: rng.randint(1, 100) for l in lemmas}
        lemma = rng.choice(lemmas)
        # independent oracle: explicit sums over the *other* events, exact rationals
        oracle = (
            Fraction(male[lemma], sum(c for l, c in male.items() if l != lemma))
            / Fraction(female[lemma], sum(c for l, c in female.items() if l != lemma))
        )
        m_table, f_table = FrequencyTable("M", male), FrequencyTable("F", female)
        got = odds_ratio(m_table, f_table, lemma)
        assert abs(got - float(oracle)) <= 1e-12 * max(1.0, float(oracle))
        swapped = odds_ratio(FrequencyTable("M", female), FrequencyTable("F", male), lemma)
        assert abs(swapped - 1.0 / got) <= 1e-12 * max(1.0, swapped)
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"OR oracle sweep took {elapsed:.2f}s"
    _pass(f"odds-ratio oracle: 1000 tables within 1e-12, reciprocal holds, {elapsed:.2f}s")


def test_calibration_arithmetic(corpus_path, tmp_path):
    """(80, 0.8) -> 100; recall-1 identity; monotone; gate=inf byte-identical to rank."""
    assert calibrate_frequency(80, 0.8) == pytest.approx(100.0, abs=1e-12)
    assert calibrate_frequency(57, 1.0) == 57.0
    rng = random.Random(77)
    for _ in range(100):
        count = rng.randint(1, 1000)
        low, high = sorted((rng.uniform(0.01, 1.0), rng.uniform(0.01, 1.0)))
        assert calibrate_frequency(count, low) >= calibrate_frequency(count, high) >= count

    run_cli("rank", "--corpus", corpus_path, "--out", tmp_path)
    review = tmp_path / "review.jsonl"
    run_cli("calibrate", "--corpus", corpus_path, "--out", tmp_path,
            "--review-file", review, "--window", "5")
    verify_review_file(review)
    code, _ = run_cli("calibrate", "--corpus", corpus_path, "--out", tmp_path,
                      "--review-file", review, "--window", "5", "--gate", "inf")
    assert code == 0
    ranked = (tmp_path / "ranked.tsv").read_bytes()
    calibrated = (tmp_path / "calibrated.tsv").read_bytes()
    assert ranked == calibrated
    _pass("calibration arithmetic: Eq-style quotient, identity, monotonicity, gate=inf byte-identical")


def test_weat_hand_cases_and_oracle():
    """Synthetic 2-d case raw S = 2.0; antisymmetries and naive-oracle match within 1e-9."""
    emb = weat.EmbeddingTable(2, {
        "wed": np.array([1.0, 0.0]), "war": np.array([0.0, 1.0]),
        "a1": np.array([1.0, 0.0]), "a2": np.array([1.0, 0.0]),
        "b1": np.array([0.0, 1.0]), "b2": np.array([0.0, 1.0]),
    })
    got = weat.weat_score(["wed"], ["war"], ["a1", "a2"], ["b1", "b2"], emb)
    assert abs(got.raw_score - 2.0) <= 1e-9

    import math

    def naive_cos(u, v):
        dot = sum(x * y for x, y in zip(u, v))
        return dot / (math.sqrt(sum(x * x for x in u)) * math.sqrt(sum(y * y for y in v)))

    def naive_weat(f, m, a, b, vecs):
        def s(w):
            return sum(naive_cos(vecs[w], vecs[t]) for t in a) / len(a) - sum(
                naive_cos(vecs[w], vecs[t]) for t in b
            ) / len(b)

        return sum(s(w) for w in f) - sum(s(w) for w in m)

    rng = random.Random(9)
    for _ in range(100):
        def tokens(prefix, lo, hi):
            return [f"{prefix}{i}" for i in range(rng.randint(lo, hi))]

        f, m = tokens("f", 1, 5), tokens("m", 1, 5)
        a, b = tokens("a", 1, 4), tokens("b", 1, 4)
        vecs = {}
        for t in f + m + a + b:
            v = [rng.uniform(-1, 1) for _ in range(3)]
            while all(abs(x) < 1e-6 for x in v):
                v = [rng.uniform(-1, 1) for _ in range(3)]
            vecs[t] = v
        emb = weat.EmbeddingTable(3, {k: np.array(v) for k, v in vecs.items()})
        base = weat.weat_score(f, m, a, b, emb).raw_score
        assert abs(base + weat.weat_score(f, m, b, a, emb).raw_score) <= 1e-9
        assert abs(base + weat.weat_score(m, f, a, b, emb).raw_score) <= 1e-9
        assert abs(base - naive_weat(f, m, a, b, vecs)) <= 1e-9
    _pass("WEAT: 2-d case raw S = 2.0, antisymmetries and double-loop oracle within 1e-9")


def test_detector_score_consistency():
    """Precision 95.3 and recall 87.1 imply F1 = 91.0 within 0.05."""
    tp = 953 * 871
    metrics = analyze.EvalMetrics(tp=tp, fp=871_000 - tp, fn=953_000 - tp)
    assert 100 * metrics.precision == pytest.approx(95.3, abs=1e-9)
    assert 100 * metrics.recall == pytest.approx(87.1, abs=1e-9)
    assert abs(100 * metrics.f1 - 91.0) <= 0.05
    _pass("detector score consistency: P=95.3, R=87.1 -> F1=91.0 within 0.05")


def test_substitution_fidelity():
    """she->he and her->his at recorded spans, no residual female pronouns,
    F->M->F byte-exact, exactly 100 instances (50 F + 50 M)."""
    text = (
        "At the age of 17, Mercer worked at a department store. "
        "To make money, she bred show cats. "
        "In January 1991, she married her second husband and joined his real estate business."
    )
    template = dataclasses.replace(
        build_template(text, "t1", "doc", "F", "marry", "Ada Mercer"), verified=True
    )
    swapped = substitute(template, "Mike", "M")
    for start, end, kind in template.pronoun_spans:
        before = text[start:end].lower()
        assert before in ("she", "her")
    female_forms = {"she", "her", "hers", "herself"}
    for start, end, kind in swapped.pronoun_spans:
        token = swapped.substituted_text[start:end].lower()
        assert token not in female_forms
        assert token == {"subject": "he", "poss_det": "his", "object": "him",
                         "poss_pron": "his", "reflexive": "himself"}[kind]
    tokens = set(swapped.substituted_text.lower().replace(".", " ").replace(",", " ").split())
    assert not (tokens & female_forms)

    restored = substitute(swapped.to_template(), "Mercer", "F")
    assert restored.substituted_text == text

    instances = generate_synthetic(template)
    assert len(instances) == 100
    assert sum(1 for i in instances if i.assigned_gender == "F") == 50
    assert sum(1 for i in instances if i.assigned_gender == "M") == 50
    _pass("substitution fidelity: span swaps exact, round-trip byte-exact, 100 = 50 F + 50 M")


def _run_pipeline(corpus_path, embeddings_path, out_dir: Path, workers: int) -> float:
    """One full pipeline pass; returns elapsed seconds."""
    review = out_dir / "review.jsonl"
    started = time.perf_counter()
    steps = [
        ("ingest", "--corpus", corpus_path, "--out", out_dir),
        ("detect", "--corpus", corpus_path, "--out", out_dir, "--workers", str(workers)),
        ("rank", "--corpus", corpus_path, "--out", out_dir, "--workers", str(workers)),
    ]
    for step in steps:
        code, _ = run_cli(*step)
        assert code == 0, step
    code, _ = run_cli("calibrate", "--corpus", corpus_path, "--out", out_dir,
                      "--review-file", review, "--workers", str(workers))
    assert code == 1  # harvest pass
    verify_review_file(review)
    for step in (
        ("calibrate", "--corpus", corpus_path, "--out", out_dir,
         "--review-file", review, "--workers", str(workers)),
        ("percentile", "--corpus", corpus_path, "--out", out_dir, "--workers", str(workers)),
        ("weat", "--corpus", corpus_path, "--embeddings", embeddings_path, "--out", out_dir,
         "--workers", str(workers)),
        ("report", "--corpus", corpus_path, "--embeddings", embeddings_path, "--out", out_dir,
         "--workers", str(workers)),
    ):
        code, _ = run_cli(*step)
        assert code == 0, step
    return time.perf_counter() - started


def test_end_to_end_fixture(corpus_path, embeddings_path, tmp_path):
    """Injected events rank on the correct sides, own-gender percentiles sit in
    the top 10% band, the pipeline finishes < 10 s, and serial and parallel
    runs are byte-identical."""
    serial_dir = tmp_path / "serial"
    parallel_dir = tmp_path / "parallel"
    serial_elapsed = _run_pipeline(corpus_path, embeddings_path, serial_dir, workers=1)
    parallel_elapsed = _run_pipeline(corpus_path, embeddings_path, parallel_dir, workers=4)
    assert serial_elapsed < 10.0, f"serial pipeline took {serial_elapsed:.2f}s"
    assert parallel_elapsed < 10.0, f"parallel pipeline took {parallel_elapsed:.2f}s"

    ranked_lines = (serial_dir / "ranked.tsv").read_text().splitlines()
    lemmas = [line.split("\t")[0] for line in ranked_lines[1:]]
    male, female = set(lemmas[:5]), set(lemmas[5:])
    assert {"wedding", "divorce", "marriage"} <= female
    assert {"war", "arrest", "sue"} <= male

    pct_rows = (serial_dir / "percentile.csv").read_text().splitlines()[1:]
    assert len(pct_rows) == 10
    for row in pct_rows:
        _, own_pct, _, _ = row.split(",")
        assert float(own_pct) <= 10.0, row

    # repeated runs and serial-versus-parallel runs produce identical bytes
    rerun_dir = tmp_path / "rerun"
    _run_pipeline(corpus_path, embeddings_path, rerun_dir, workers=1)
    artifacts = [
        "stats.tsv", "mentions.jsonl", "ranked.tsv", "exclusives.tsv",
        "calibrated.tsv", "recall.csv", "percentile.csv", "weat.json", "report.md",
    ]
    for name in artifacts:
        serial_bytes = (serial_dir / name).read_bytes()
        assert serial_bytes == (parallel_dir / name).read_bytes(), f"{name} differs serial vs parallel"
        assert serial_bytes == (rerun_dir / name).read_bytes(), f"{name} differs across reruns"
    _pass(
        "end-to-end fixture: correct sides, top-10% band, "
        f"{serial_elapsed:.2f}s serial / {parallel_elapsed:.2f}s parallel, byte-identical"
    )


def test_evaluation_swap_property():
    """evaluate_detector(g, p) and evaluate_detector(p, g) exchange P and R exactly."""
    rng = random.Random(4242)
    for _ in range(200):
        universe = [
            EventMention(f"d{rng.randint(0, 4)}", "career", rng.randint(0, 6),
                         start := rng.randint(0, 40), start + 3, "xxx", "x")
            for _ in range(rng.randint(0, 15))
        ]
        gold = [m for m in universe if rng.random() < 0.55]
        predicted = [m for m in universe if rng.random() < 0.55]
        forward = analyze.evaluate_detector(gold, predicted)
        backward = analyze.evaluate_detector(predicted, gold)
        assert forward.precision == backward.recall
        assert forward.recall == backward.precision
    _pass("evaluation swap property: 200 random mention sets exchange P and R exactly")
