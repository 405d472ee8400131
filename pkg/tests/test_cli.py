import json
from pathlib import Path

import pytest

from conftest import run_cli, verify_review_file

from eventbias import fixtures


def read(path: Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def ranked_lemmas(tsv_text: str) -> list[str]:
    return [line.split("\t")[0] for line in tsv_text.splitlines()[1:]]


class TestIngest:
    def test_fixture_stats_layout(self, corpus_path, tmp_path):
        code, out = run_cli("ingest", "--corpus", corpus_path, "--out", tmp_path)
        assert code == 0
        assert "60 records loaded" in out
        lines = read(tmp_path / "stats.tsv").splitlines()
        assert lines[0].split("\t") == [
            "occupation", "career_F", "career_M", "personal_life_F",
            "personal_life_M", "collected_F", "collected_M",
        ]
        assert lines[-1].split("\t") == ["all", "30", "30", "28", "28", "30", "30"]

    def test_malformed_corpus_exits_nonzero_with_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": "a", "name": "A", "gender": "F", "occupation": "x", "sections": {}}\nnot json\n')
        code, _ = run_cli("ingest", "--corpus", bad, "--out", tmp_path / "out")
        assert code == 1
        assert "line 2" in capsys.readouterr().err

    def test_empty_corpus_is_zero_stats_success(self, tmp_path):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        code, out = run_cli("ingest", "--corpus", empty, "--out", tmp_path / "out")
        assert code == 0
        assert "warning: corpus is empty" in out
        assert read(tmp_path / "out" / "stats.tsv").splitlines()[-1].startswith("all\t0")

    def test_missing_corpus_flag(self, tmp_path, capsys):
        code, _ = run_cli("ingest", "--out", tmp_path)
        assert code == 1
        assert "--corpus" in capsys.readouterr().err


class TestRank:
    def test_injected_events_on_correct_sides(self, corpus_path, tmp_path):
        code, _ = run_cli("rank", "--corpus", corpus_path, "--out", tmp_path)
        assert code == 0
        lemmas = ranked_lemmas(read(tmp_path / "ranked.tsv"))
        male, female = lemmas[:5], lemmas[5:]
        assert {"wedding", "divorce"} <= set(female)
        assert {"war", "arrest"} <= set(male)
        assert len(lemmas) == 10

    def test_k10_gives_longer_lists(self, corpus_path, tmp_path):
        code, _ = run_cli("rank", "--corpus", corpus_path, "--out", tmp_path, "--k", "10")
        assert code == 0
        assert len(ranked_lemmas(read(tmp_path / "ranked.tsv"))) == 20

    def test_type_tags_in_output(self, corpus_path, tmp_path):
        run_cli("rank", "--corpus", corpus_path, "--out", tmp_path)
        rows = {line.split("\t")[0]: line.split("\t") for line in read(tmp_path / "ranked.tsv").splitlines()[1:]}
        assert rows["wedding"][4] == "Life"
        assert rows["war"][4] == "Conflict"
        assert all(row[5] == "false" for row in rows.values())

    def test_empty_corpus_header_only(self, tmp_path):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        code, _ = run_cli("rank", "--corpus", empty, "--out", tmp_path / "out")
        assert code == 0
        assert read(tmp_path / "out" / "ranked.tsv") == (
            "lemma\tmale_count\tfemale_count\todds_ratio\ttype_tag\tcalibrated\n"
        )

    def test_byte_identical_across_runs_and_workers(self, corpus_path, tmp_path):
        run_cli("rank", "--corpus", corpus_path, "--out", tmp_path / "a")
        run_cli("rank", "--corpus", corpus_path, "--out", tmp_path / "b")
        run_cli("rank", "--corpus", corpus_path, "--out", tmp_path / "c", "--workers", "4")
        first = read(tmp_path / "a" / "ranked.tsv")
        assert first == read(tmp_path / "b" / "ranked.tsv")
        assert first == read(tmp_path / "c" / "ranked.tsv")

    def test_config_file_with_flag_override(self, corpus_path, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text(f"corpus = {corpus_path}\nk = 2\nout = {tmp_path / 'cfgout'}\n")
        code, _ = run_cli("rank", "--config", config)
        assert code == 0
        assert len(ranked_lemmas(read(tmp_path / "cfgout" / "ranked.tsv"))) == 4
        code, _ = run_cli("rank", "--config", config, "--k", "3")
        assert code == 0
        assert len(ranked_lemmas(read(tmp_path / "cfgout" / "ranked.tsv"))) == 6

    def test_unknown_config_key_rejected(self, corpus_path, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text("corpsu = x\n")
        code, _ = run_cli("rank", "--config", config, "--corpus", corpus_path)
        assert code == 1
        assert "unknown key" in capsys.readouterr().err


class TestDetect:
    def test_mentions_jsonl_round_trips_through_eval(self, corpus_path, tmp_path):
        code, _ = run_cli("detect", "--corpus", corpus_path, "--out", tmp_path)
        assert code == 0
        mentions = [json.loads(l) for l in read(tmp_path / "mentions.jsonl").splitlines()]
        assert mentions
        assert set(mentions[0]) == {"doc_id", "section", "sentence_index", "start", "end", "surface", "lemma"}
        # the emitted file is valid as both gold and predicted annotations
        code, out = run_cli(
            "eval", "--corpus", corpus_path, "--out", tmp_path,
            "--gold", tmp_path / "mentions.jsonl", "--predicted", tmp_path / "mentions.jsonl",
        )
        assert code == 0
        assert "all\t" in out and "\t100.0\t100.0\t100.0" in out

    def test_emit_sentences(self, corpus_path, tmp_path):
        code, _ = run_cli(
            "detect", "--corpus", corpus_path, "--out", tmp_path,
            "--emit-sentences", tmp_path / "sentences.jsonl",
        )
        assert code == 0
        rows = [json.loads(l) for l in read(tmp_path / "sentences.jsonl").splitlines()]
        assert rows[0]["doc_id"] == "f01"
        assert all(set(r) == {"doc_id", "section", "index", "text", "char_offset"} for r in rows[:5])

    def test_external_annotations_validated(self, corpus_path, tmp_path, capsys):
        ann = tmp_path / "ann.jsonl"
        ann.write_text(
            json.dumps({
                "doc_id": "f01", "section": "career", "sentence_index": 0,
                "start": 0, "end": 4, "surface": "XXXX", "lemma": "x",
            }) + "\n"
        )
        code, _ = run_cli("detect", "--corpus", corpus_path, "--annotations", ann, "--out", tmp_path)
        assert code == 1
        assert "does not match" in capsys.readouterr().err


class TestCalibrate:
    def test_first_run_harvests_review_file(self, corpus_path, tmp_path):
        review = tmp_path / "review.jsonl"
        code, out = run_cli(
            "calibrate", "--corpus", corpus_path, "--out", tmp_path,
            "--review-file", review, "--window", "5",
        )
        assert code == 1
        assert "Review them" in out
        assert review.exists()
        entries = [json.loads(l) for l in read(review).splitlines()]
        assert entries and all(e["verified"] is False for e in entries)

    def test_zero_verified_templates_is_error(self, corpus_path, tmp_path, capsys):
        review = tmp_path / "review.jsonl"
        run_cli("calibrate", "--corpus", corpus_path, "--out", tmp_path,
                "--review-file", review, "--window", "5")
        code, _ = run_cli("calibrate", "--corpus", corpus_path, "--out", tmp_path,
                          "--review-file", review, "--window", "5")
        assert code == 1
        assert "verified" in capsys.readouterr().err

    def test_equal_recalls_reproduce_rank_byte_identically(self, corpus_path, tmp_path):
        run_cli("rank", "--corpus", corpus_path, "--out", tmp_path)
        review = tmp_path / "review.jsonl"
        run_cli("calibrate", "--corpus", corpus_path, "--out", tmp_path,
                "--review-file", review, "--window", "5")
        verify_review_file(review)
        code, _ = run_cli("calibrate", "--corpus", corpus_path, "--out", tmp_path,
                          "--review-file", review, "--window", "5")
        assert code == 0
        assert read(tmp_path / "ranked.tsv") == read(tmp_path / "calibrated.tsv")
        recall_rows = read(tmp_path / "recall.csv").splitlines()[1:]
        assert recall_rows and all(row.endswith("1.0") for row in recall_rows)

    def test_detector_blind_to_female_divorce_shifts_or(self, corpus_path, tmp_path):
        run_cli("rank", "--corpus", corpus_path, "--out", tmp_path)
        review = tmp_path / "review.jsonl"
        run_cli("calibrate", "--corpus", corpus_path, "--out", tmp_path,
                "--review-file", review, "--window", "5")
        verify_review_file(review)
        instances = tmp_path / "instances.jsonl"
        code, _ = run_cli("calibrate", "--corpus", corpus_path, "--out", tmp_path,
                          "--review-file", review, "--window", "5",
                          "--emit-instances", instances)
        assert code == 0
        # external detector that misses 30% of female divorce instances
        detections = tmp_path / "detections.jsonl"
        with open(detections, "w") as fh:
            for line in read(instances).splitlines():
                inst = json.loads(line)
                miss = (
                    inst["expected_event"] == "divorce"
                    and inst["assigned_gender"] == "F"
                    and int(inst["instance_id"].rsplit("#", 1)[1]) < 15
                )
                fh.write(json.dumps({"instance_id": inst["instance_id"], "detected": not miss}) + "\n")
        code, _ = run_cli("calibrate", "--corpus", corpus_path, "--out", tmp_path,
                          "--review-file", review, "--window", "5",
                          "--instance-detections", detections)
        assert code == 0

        def or_of(path, lemma):
            for line in read(path).splitlines()[1:]:
                parts = line.split("\t")
                if parts[0] == lemma:
                    return float(parts[3]), parts[5]
            raise AssertionError(f"{lemma} not found in {path}")

        raw_or, raw_flag = or_of(tmp_path / "ranked.tsv", "divorce")
        cal_or, cal_flag = or_of(tmp_path / "calibrated.tsv", "divorce")
        assert (raw_flag, cal_flag) == ("false", "true")
        assert cal_or < raw_or  # female count inflated by 1/0.7 pushes OR down

    def test_infinite_gate_reproduces_rank(self, corpus_path, tmp_path):
        run_cli("rank", "--corpus", corpus_path, "--out", tmp_path)
        review = tmp_path / "review.jsonl"
        run_cli("calibrate", "--corpus", corpus_path, "--out", tmp_path,
                "--review-file", review, "--window", "5")
        verify_review_file(review)
        code, _ = run_cli("calibrate", "--corpus", corpus_path, "--out", tmp_path,
                          "--review-file", review, "--window", "5", "--gate", "inf")
        assert code == 0
        assert read(tmp_path / "ranked.tsv") == read(tmp_path / "calibrated.tsv")


class TestWeat:
    def test_hand_case_through_cli(self, tmp_path, corpus_path):
        emb = tmp_path / "emb.txt"
        lines = ["wed 1 0", "war 0 1"]
        lines += [f"{t} 1 0" for t in ("female", "woman", "girl", "sister", "she", "her", "hers", "daughter")]
        lines += [f"{t} 0 1" for t in ("male", "man", "boy", "brother", "he", "him", "his", "son")]
        emb.write_text("\n".join(lines) + "\n")
        f_list = tmp_path / "f.txt"
        m_list = tmp_path / "m.txt"
        f_list.write_text("wed\n")
        m_list.write_text("war\n")
        code, _ = run_cli("weat", "--corpus", corpus_path, "--embeddings", emb,
                          "--events-female", f_list, "--events-male", m_list,
                          "--out", tmp_path)
        assert code == 0
        payload = json.loads(read(tmp_path / "weat.json"))
        assert payload["events"]["raw_score"] == pytest.approx(2.0, abs=1e-9)

    def test_fixture_weat_positive(self, corpus_path, embeddings_path, tmp_path):
        code, out = run_cli("weat", "--corpus", corpus_path, "--embeddings", embeddings_path,
                            "--out", tmp_path)
        assert code == 0
        payload = json.loads(read(tmp_path / "weat.json"))
        assert payload["events"]["raw_score"] > 0
        assert payload["events"]["female_targets"] == ["elope", "wedding", "marriage", "divorce", "celebrate"]
        # identical embedded token sets on both sides of the raw text
        assert payload["raw_text"]["raw_score"] == pytest.approx(0.0, abs=1e-9)


class TestPercentile:
    def test_csv_and_bands(self, corpus_path, tmp_path):
        code, out = run_cli("percentile", "--corpus", corpus_path, "--out", tmp_path)
        assert code == 0
        lines = read(tmp_path / "percentile.csv").splitlines()
        assert lines[0] == "lemma,own_pct,opposite_pct,gender"
        assert len(lines) == 11
        assert "own-gender top 10% band: holds" in out
        assert "opposite top 40% band: holds" in out


class TestEval:
    def write_annotations(self, path, rows):
        path.write_text("".join(json.dumps(r) + "\n" for r in rows))
        return path

    def test_partial_overlap_scores(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        corpus.write_text(json.dumps({
            "id": "c1", "name": "A B", "gender": "F", "occupation": "chef",
            "sections": {"career": "She married him. He left town. They met again."},
        }) + "\n")
        a = {"doc_id": "c1", "section": "career", "sentence_index": 0,
             "start": 4, "end": 11, "surface": "married", "lemma": "marry"}
        b = {"doc_id": "c1", "section": "career", "sentence_index": 1,
             "start": 3, "end": 7, "surface": "left", "lemma": "leave"}
        c = {"doc_id": "c1", "section": "career", "sentence_index": 2,
             "start": 5, "end": 8, "surface": "met", "lemma": "meet"}
        gold = self.write_annotations(tmp_path / "gold.jsonl", [a, b])
        pred = self.write_annotations(tmp_path / "pred.jsonl", [a, c])
        code, out = run_cli("eval", "--corpus", corpus, "--gold", gold, "--predicted", pred,
                            "--out", tmp_path)
        assert code == 0
        all_row = [l for l in out.splitlines() if l.startswith("all\t")][0]
        assert all_row.split("\t") == ["all", "1", "1", "1", "50.0", "50.0", "50.0"]
        f_row = [l for l in out.splitlines() if l.startswith("F\t")][0]
        assert f_row.split("\t")[1:4] == ["1", "1", "1"]


class TestReport:
    def test_bundle_deterministic(self, corpus_path, embeddings_path, tmp_path):
        for name in ("a", "b"):
            code, _ = run_cli("report", "--corpus", corpus_path,
                              "--embeddings", embeddings_path, "--out", tmp_path / name)
            assert code == 0
        for filename in ("report.md", "ranked.tsv", "percentile.csv", "stats.tsv", "weat.json", "exclusives.tsv"):
            assert read(tmp_path / "a" / filename) == read(tmp_path / "b" / filename), filename

    def test_report_without_embeddings_carries_notice(self, corpus_path, tmp_path):
        code, _ = run_cli("report", "--corpus", corpus_path, "--out", tmp_path)
        assert code == 0
        report = read(tmp_path / "report.md")
        assert "No embedding file configured" in report
        assert not (tmp_path / "weat.json").exists()
        assert "| wedding | Life |" in report

    def test_failure_leaves_no_partial_outputs(self, corpus_path, tmp_path):
        bad_emb = tmp_path / "bad.txt"
        bad_emb.write_text("a 1 0\nb 1\n")
        out_dir = tmp_path / "out"
        code, _ = run_cli("report", "--corpus", corpus_path, "--embeddings", bad_emb,
                          "--out", out_dir)
        assert code == 1
        assert not out_dir.exists() or not list(out_dir.iterdir())
