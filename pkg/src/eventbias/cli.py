"""Command-line pipeline: ingest, detect, rank, calibrate, weat, percentile, eval, report.

Configuration comes from an optional flat key=value file plus command-line
flags (flags win). Every run is deterministic for a fixed configuration and
input set: all randomness flows from the single seed, iteration orders are
sorted, and outputs are written atomically (temp file plus rename) so a
failing command never leaves a partial file behind.

Exit codes: 0 success, 1 validation/configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

from . import analyze, calibrate, detect, rank, weat
from .corpus import Corpus, CorpusStats, corpus_stats, load_corpus, split_sentences
from .errors import ConfigError, TemplateError, ToolkitError
from .resources import bundled_path, read_token_list

SUBCOMMANDS = ("ingest", "detect", "rank", "calibrate", "weat", "percentile", "eval", "report")


@dataclass
class PipelineConfig:
    corpus: str | None = None
    annotations: str | None = None
    lexicon: str | None = None
    section: str = "career"
    occupation: str | None = None
    k: int = 5
    min_count: int = 1
    gate: float = 0.05
    window: int = 50
    names: str | None = None
    swaps: str | None = None
    attributes_female: str | None = None
    attributes_male: str | None = None
    stopwords: str | None = None
    embeddings: str | None = None
    out: str = "eventbias_out"
    seed: int = 0
    balance: bool = False
    smoothing: float = 0.0
    workers: int = 1

    def validate(self) -> None:
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.min_count < 1:
            raise ConfigError("min_count must be >= 1")
        if self.gate < 0:
            raise ConfigError("gate must be >= 0 (use 'inf' to disable calibration)")
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.smoothing < 0:
            raise ConfigError("smoothing must be >= 0")


_INT_KEYS = {"k", "min_count", "window", "seed", "workers"}
_FLOAT_KEYS = {"gate", "smoothing"}
_BOOL_KEYS = {"balance"}


def load_config_file(path: str | Path) -> dict:
    """Parse a flat key = value config file (# starts a comment)."""
    known = {f.name for f in fields(PipelineConfig)}
    out: dict = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {line_no}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"config line {line_no}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                out[key] = int(value)
            elif key in _FLOAT_KEYS:
                out[key] = float(value)
            elif key in _BOOL_KEYS:
                out[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                out[key] = value
        except ValueError:
            raise ConfigError(f"config line {line_no}: bad value {value!r} for {key!r}")
    return out


def _merge_config(args: argparse.Namespace) -> PipelineConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for f in fields(PipelineConfig):
        flag = getattr(args, f.name, None)
        if flag is not None and flag is not False:
            values[f.name] = flag
    config = PipelineConfig(**values)
    config.validate()
    return config


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _require(config: PipelineConfig, *keys: str) -> None:
    for key in keys:
        if getattr(config, key) is None:
            raise ConfigError(f"--{key.replace('_', '-')} (or config key {key!r}) is required")


def _load_inputs(config: PipelineConfig) -> tuple[Corpus, detect.TriggerLexicon]:
    _require(config, "corpus")
    corpus = load_corpus(config.corpus)
    lexicon = detect.load_lexicon(config.lexicon) if config.lexicon else detect.default_lexicon()
    return corpus, lexicon


def _mentions_for(config: PipelineConfig, corpus: Corpus, lexicon) -> list[detect.EventMention]:
    if config.annotations:
        return detect.ingest_annotations(config.annotations, corpus)
    return detect.detect_corpus(corpus, lexicon, section=None, workers=config.workers)


def _format_ratio(value: float | str) -> str:
    return value if isinstance(value, str) else repr(value)


def _ranked_tsv(entries, lexicon) -> str:
    lines = ["lemma\tmale_count\tfemale_count\todds_ratio\ttype_tag\tcalibrated"]
    for e in entries:
        tag = detect.tag_event_type(e.lemma, lexicon) or ""
        lines.append(
            f"{e.lemma}\t{e.male_count}\t{e.female_count}\t{_format_ratio(e.odds_ratio)}"
            f"\t{tag}\t{str(e.calibrated).lower()}"
        )
    return "\n".join(lines) + "\n"


def _stats_table(stats: CorpusStats) -> str:
    lines = ["occupation\tcareer_F\tcareer_M\tpersonal_life_F\tpersonal_life_M\tcollected_F\tcollected_M"]
    occs = stats.occupations()
    for occ in occs:
        row = [occ]
        for section in ("career", "personal_life"):
            for gender in ("F", "M"):
                row.append(str(stats.counts.get((occ, section, gender), 0)))
        for gender in ("F", "M"):
            row.append(str(stats.collected.get((occ, gender), 0)))
        lines.append("\t".join(row))
    total_row = ["all"]
    for section in ("career", "personal_life"):
        for gender in ("F", "M"):
            total_row.append(str(stats.section_total(section, gender)))
    for gender in ("F", "M"):
        total_row.append(str(stats.collected_total(gender)))
    lines.append("\t".join(total_row))
    return "\n".join(lines) + "\n"


def _percentile_csv(report: analyze.PercentileReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lemma", "own_pct", "opposite_pct", "gender"])
    for row in report.rows:
        opp = "" if row.opposite_percentile is None else repr(row.opposite_percentile)
        writer.writerow([row.lemma, repr(row.own_percentile), opp, row.gender])
    return buf.getvalue()


def _recall_csv(records: list[calibrate.RecallRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lemma", "gender", "n_instances", "n_detected", "recall"])
    for rec in sorted(records, key=lambda r: (r.lemma, r.gender)):
        writer.writerow([rec.lemma, rec.gender, rec.n_instances, rec.n_detected, repr(rec.recall)])
    return buf.getvalue()


def _ranking(config: PipelineConfig, corpus: Corpus, lexicon):
    mentions = _mentions_for(config, corpus, lexicon)
    male_table, female_table = detect.build_frequency_tables(
        mentions,
        corpus,
        section_filter=config.section,
        occupation_filter=config.occupation,
        balance=config.balance,
        seed=config.seed,
    )
    return mentions, male_table, female_table


# ---------------------------------------------------------------- subcommands


def cmd_ingest(config: PipelineConfig, stdout) -> int:
    _require(config, "corpus")
    corpus = load_corpus(config.corpus)
    stats = corpus_stats(corpus)
    table = _stats_table(stats)
    print(str(corpus.report), file=stdout)
    print(table, end="", file=stdout)
    atomic_write_text(Path(config.out) / "stats.tsv", table)
    if len(corpus) == 0:
        print("warning: corpus is empty", file=stdout)
    return 0


def cmd_detect(config: PipelineConfig, stdout, emit_sentences: str | None = None) -> int:
    corpus, lexicon = _load_inputs(config)
    mentions = _mentions_for(config, corpus, lexicon)
    out = Path(config.out) / "mentions.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.with_name(out.name + ".tmp")
    detect.write_annotations(mentions, tmp)
    os.replace(tmp, out)
    if emit_sentences:
        lines = []
        for record in corpus:
            for section in sorted(record.sections):
                for s in split_sentences(record.sections[section], record.id, section):
                    lines.append(
                        json.dumps(
                            {
                                "doc_id": s.doc_id,
                                "section": s.section,
                                "index": s.index,
                                "text": s.text,
                                "char_offset": s.char_offset,
                            },
                            ensure_ascii=False,
                            separators=(",", ":"),
                        )
                    )
        atomic_write_text(Path(emit_sentences), "\n".join(lines) + ("\n" if lines else ""))
    print(f"{len(mentions)} mentions -> {out}", file=stdout)
    return 0


def cmd_rank(config: PipelineConfig, stdout) -> int:
    corpus, lexicon = _load_inputs(config)
    _, male_table, female_table = _ranking(config, corpus, lexicon)
    if not male_table.counts and not female_table.counts:
        warnings.warn("no events detected in the configured slice")
        ranked_text = "lemma\tmale_count\tfemale_count\todds_ratio\ttype_tag\tcalibrated\n"
        exclusives_text = ranked_text
    else:
        ranked = rank.rank_events(
            male_table, female_table, config.k, config.min_count, config.smoothing
        )
        ranked_text = _ranked_tsv(list(ranked.top_male) + list(ranked.top_female), lexicon)
        exclusives_text = _ranked_tsv(
            list(ranked.male_exclusive) + list(ranked.female_exclusive), lexicon
        )
    atomic_write_text(Path(config.out) / "ranked.tsv", ranked_text)
    atomic_write_text(Path(config.out) / "exclusives.tsv", exclusives_text)
    print(ranked_text, end="", file=stdout)
    return 0


def _candidate_events(config: PipelineConfig, male_table, female_table) -> list[str]:
    """The most skewed events per gender, up to the configured window each."""
    ranked = rank.rank_events(male_table, female_table, config.window, config.min_count)
    lemmas = [e.lemma for e in ranked.top_male] + [e.lemma for e in ranked.top_female]
    return sorted(set(lemmas))


def _instances_jsonl(instances: list[calibrate.SyntheticInstance]) -> str:
    lines = []
    for inst in instances:
        lines.append(
            json.dumps(
                {
                    "instance_id": inst.instance_id,
                    "template_id": inst.template_id,
                    "text": inst.substituted_text,
                    "assigned_name": inst.assigned_name,
                    "assigned_gender": inst.assigned_gender,
                    "expected_event": inst.expected_event,
                },
                ensure_ascii=False,
                separators=(",", ":"),
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def _load_instance_detections(path: str) -> dict[str, bool]:
    out: dict[str, bool] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                out[obj["instance_id"]] = bool(obj["detected"])
            except (json.JSONDecodeError, KeyError, TypeError):
                raise ConfigError(
                    f"instance detections line {line_no}: expected "
                    '{"instance_id": ..., "detected": true|false}'
                )
    return out


def cmd_calibrate(
    config: PipelineConfig,
    stdout,
    review_file: str,
    emit_instances: str | None = None,
    instance_detections: str | None = None,
) -> int:
    corpus, lexicon = _load_inputs(config)
    mentions, male_table, female_table = _ranking(config, corpus, lexicon)
    swaps = calibrate.load_swap_table(config.swaps) if config.swaps else calibrate.default_swap_table()
    names = calibrate.load_name_list(config.names) if config.names else calibrate.default_name_list()

    review_path = Path(review_file)
    if not review_path.exists():
        candidates = _candidate_events(config, male_table, female_table)
        templates = []
        for lemma in candidates:
            templates.extend(
                calibrate.harvest_templates(corpus, mentions, lemma, swaps, lexicon.entries)
            )
        calibrate.write_review_file(templates, review_path)
        print(
            f"harvested {len(templates)} candidate templates for {len(candidates)} events "
            f"into {review_path}.\nReview them, set \"verified\": true on the correct ones, "
            "and rerun this command.",
            file=stdout,
        )
        return 1
    templates = calibrate.read_review_file(review_path)
    verified = [t for t in templates if t.verified]
    if not verified:
        raise TemplateError(
            f"no template in {review_path} is verified; set \"verified\": true on the "
            "correct ones before calibrating"
        )

    instances: list[calibrate.SyntheticInstance] = []
    for template in verified:
        instances.extend(calibrate.generate_synthetic(template, names, swaps))
    if emit_instances:
        atomic_write_text(Path(emit_instances), _instances_jsonl(instances))
        print(f"{len(instances)} synthetic instances -> {emit_instances}", file=stdout)

    by_event: dict[str, list[calibrate.SyntheticInstance]] = {}
    for inst in instances:
        by_event.setdefault(inst.expected_event, []).append(inst)

    if instance_detections:
        hits = _load_instance_detections(instance_detections)

        def detected(inst: calibrate.SyntheticInstance) -> bool:
            if inst.instance_id not in hits:
                raise ConfigError(f"no detection result for instance {inst.instance_id!r}")
            return hits[inst.instance_id]

    else:
        detector = calibrate.as_detector(lexicon)

        def detected(inst: calibrate.SyntheticInstance) -> bool:
            return inst.expected_event in detector(inst.substituted_text)

    records: list[calibrate.RecallRecord] = []
    for lemma in sorted(by_event):
        counts = {"F": [0, 0], "M": [0, 0]}
        for inst in by_event[lemma]:
            counts[inst.assigned_gender][0] += 1
            counts[inst.assigned_gender][1] += int(detected(inst))
        for gender in ("F", "M"):
            if counts[gender][0]:
                records.append(
                    calibrate.RecallRecord(
                        lemma=lemma,
                        gender=gender,
                        n_instances=counts[gender][0],
                        n_detected=counts[gender][1],
                    )
                )

    ranked = calibrate.calibrated_ranking(
        male_table,
        female_table,
        records,
        k=config.k,
        gate=config.gate,
        min_count=config.min_count,
        smoothing=config.smoothing,
    )
    calibrated_text = _ranked_tsv(list(ranked.top_male) + list(ranked.top_female), lexicon)
    atomic_write_text(Path(config.out) / "calibrated.tsv", calibrated_text)
    atomic_write_text(Path(config.out) / "recall.csv", _recall_csv(records))
    print(calibrated_text, end="", file=stdout)
    return 0


def _weat_payload(
    config: PipelineConfig, corpus: Corpus, lexicon, female_events: list[str], male_events: list[str]
) -> dict:
    _require(config, "embeddings")
    attrs_a = (
        read_token_list(config.attributes_female)
        if config.attributes_female
        else list(weat.DEFAULT_FEMALE_ATTRIBUTES)
    )
    attrs_b = (
        read_token_list(config.attributes_male)
        if config.attributes_male
        else list(weat.DEFAULT_MALE_ATTRIBUTES)
    )
    stop_words = read_token_list(config.stopwords or bundled_path("stopwords"))
    female_tokens, male_tokens = weat.gendered_token_sets(
        corpus, config.section, stop_words, config.occupation
    )
    vocab = set(female_events) | set(male_events) | set(attrs_a) | set(attrs_b)
    vocab |= set(female_tokens) | set(male_tokens)
    emb = weat.load_embeddings(config.embeddings, vocab=vocab)
    events_result = weat.weat_score(female_events, male_events, attrs_a, attrs_b, emb)
    star_result = weat.weat_score(female_tokens, male_tokens, attrs_a, attrs_b, emb)
    return {
        "attributes": {"female": attrs_a, "male": attrs_b},
        "events": {
            "female_targets": female_events,
            "male_targets": male_events,
            **events_result.to_dict(),
        },
        "raw_text": star_result.to_dict(),
    }


def cmd_weat(
    config: PipelineConfig,
    stdout,
    events_female: str | None = None,
    events_male: str | None = None,
) -> int:
    corpus, lexicon = _load_inputs(config)
    if events_female or events_male:
        if not (events_female and events_male):
            raise ConfigError("--events-female and --events-male must be given together")
        female_events = read_token_list(events_female)
        male_events = read_token_list(events_male)
    else:
        _, male_table, female_table = _ranking(config, corpus, lexicon)
        ranked = rank.rank_events(
            male_table, female_table, config.k, config.min_count, config.smoothing
        )
        female_events = [e.lemma for e in ranked.top_female]
        male_events = [e.lemma for e in ranked.top_male]
    payload = _weat_payload(config, corpus, lexicon, female_events, male_events)
    text = json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
    atomic_write_text(Path(config.out) / "weat.json", text)
    print(
        f"WEAT events raw={payload['events']['raw_score']!r} "
        f"effect={payload['events']['effect_size']!r}; "
        f"raw-text raw={payload['raw_text']['raw_score']!r} "
        f"effect={payload['raw_text']['effect_size']!r}",
        file=stdout,
    )
    return 0


def cmd_percentile(config: PipelineConfig, stdout) -> int:
    corpus, lexicon = _load_inputs(config)
    _, male_table, female_table = _ranking(config, corpus, lexicon)
    ranked = rank.rank_events(male_table, female_table, config.k, config.min_count, config.smoothing)
    report = analyze.percentile_report(ranked, male_table, female_table)
    text = _percentile_csv(report)
    atomic_write_text(Path(config.out) / "percentile.csv", text)
    print(text, end="", file=stdout)
    print(
        f"own-gender top {report.own_band:g}% band: "
        f"{'holds' if report.all_within_own_band else 'violated'}; "
        f"opposite top {report.opposite_band:g}% band: "
        f"{'holds' if report.all_within_opposite_band else 'violated'}",
        file=stdout,
    )
    return 0


def _metrics_rows(label: str, metrics: analyze.EvalMetrics) -> str:
    def pct(value: float | None) -> str:
        return "" if value is None else repr(round(100 * value, 1))

    return (
        f"{label}\t{metrics.tp}\t{metrics.fp}\t{metrics.fn}"
        f"\t{pct(metrics.precision)}\t{pct(metrics.recall)}\t{pct(metrics.f1)}"
    )


def cmd_eval(config: PipelineConfig, stdout, gold: str, predicted: str, relaxed: bool = False) -> int:
    _require(config, "corpus")
    corpus = load_corpus(config.corpus)
    gold_mentions = detect.ingest_annotations(gold, corpus)
    pred_mentions = detect.ingest_annotations(predicted, corpus)
    evaluate = analyze.evaluate_detector_relaxed if relaxed else analyze.evaluate_detector
    overall = evaluate(gold_mentions, pred_mentions)
    lines = ["scope\ttp\tfp\tfn\tprecision\trecall\tf1", _metrics_rows("all", overall)]
    for gender, metrics in sorted(analyze.evaluate_by_gender(gold_mentions, pred_mentions, corpus).items()):
        lines.append(_metrics_rows(gender, metrics))
    text = "\n".join(lines) + "\n"
    atomic_write_text(Path(config.out) / "metrics.tsv", text)
    print(text, end="", file=stdout)
    return 0


def cmd_report(config: PipelineConfig, stdout) -> int:
    corpus, lexicon = _load_inputs(config)
    stats = corpus_stats(corpus)
    _, male_table, female_table = _ranking(config, corpus, lexicon)
    ranked = rank.rank_events(male_table, female_table, config.k, config.min_count, config.smoothing)
    pct_report = analyze.percentile_report(ranked, male_table, female_table)

    weat_payload = None
    if config.embeddings:
        female_events = [e.lemma for e in ranked.top_female]
        male_events = [e.lemma for e in ranked.top_male]
        weat_payload = _weat_payload(config, corpus, lexicon, female_events, male_events)

    def md_events(entries) -> list[str]:
        lines = ["| lemma | type | male count | female count | odds ratio |", "|---|---|---|---|---|"]
        for e in entries:
            tag = detect.tag_event_type(e.lemma, lexicon) or ""
            mark = "*" if e.calibrated else ""
            lines.append(
                f"| {e.lemma}{mark} | {tag} | {e.male_count} | {e.female_count} "
                f"| {_format_ratio(e.odds_ratio)} |"
            )
        return lines

    md: list[str] = ["# Event gender skew report", ""]
    md.append(f"Slice: section `{config.section}`"
              + (f", occupation `{config.occupation}`" if config.occupation else ", all occupations")
              + f", k={config.k}.")
    md += ["", "## Corpus", "", "```", _stats_table(stats).rstrip("\n"), "```", ""]
    md += [f"## Top {config.k} female-leaning events", ""]
    md += md_events(ranked.top_female)
    md += ["", f"## Top {config.k} male-leaning events", ""]
    md += md_events(ranked.top_male)
    md += ["", "## Percentile check", ""]
    md.append(
        f"- own-gender top {pct_report.own_band:g}% band: "
        f"{'holds' if pct_report.all_within_own_band else 'violated'}"
    )
    md.append(
        f"- opposite-gender top {pct_report.opposite_band:g}% band: "
        f"{'holds' if pct_report.all_within_opposite_band else 'violated'}"
    )
    md += ["", "## WEAT", ""]
    if weat_payload is None:
        md.append("No embedding file configured; WEAT section skipped.")
    else:
        ev, star = weat_payload["events"], weat_payload["raw_text"]
        md.append(f"- events: raw score {ev['raw_score']!r}, effect size {ev['effect_size']!r}")
        md.append(f"- raw text: raw score {star['raw_score']!r}, effect size {star['effect_size']!r}")
    md.append("")

    out_dir = Path(config.out)
    atomic_write_text(out_dir / "stats.tsv", _stats_table(stats))
    atomic_write_text(
        out_dir / "ranked.tsv", _ranked_tsv(list(ranked.top_male) + list(ranked.top_female), lexicon)
    )
    atomic_write_text(
        out_dir / "exclusives.tsv",
        _ranked_tsv(list(ranked.male_exclusive) + list(ranked.female_exclusive), lexicon),
    )
    atomic_write_text(out_dir / "percentile.csv", _percentile_csv(pct_report))
    if weat_payload is not None:
        atomic_write_text(
            out_dir / "weat.json",
            json.dumps(weat_payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        )
    atomic_write_text(out_dir / "report.md", "\n".join(md))
    print(f"report bundle -> {out_dir}", file=stdout)
    return 0


# ------------------------------------------------------------------- parsing


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file; flags override it")
    parser.add_argument("--corpus", help="corpus JSONL path")
    parser.add_argument("--annotations", help="annotation JSONL from an external detector")
    parser.add_argument("--lexicon", help="trigger lexicon file (default: bundled)")
    parser.add_argument("--section", help="section slice (default career)")
    parser.add_argument("--occupation", help="restrict to one occupation")
    parser.add_argument("--k", type=int, help="events per gender in top lists (default 5)")
    parser.add_argument("--min-count", dest="min_count", type=int, help="minimum count per side")
    parser.add_argument("--gate", type=float, help="recall-gap gate for calibration (default 0.05)")
    parser.add_argument("--window", type=int, help="top skewed events to calibrate (default 50)")
    parser.add_argument("--names", help="substitution name list (default: bundled 50F+50M)")
    parser.add_argument("--swaps", help="pronoun/attribute swap table (default: bundled)")
    parser.add_argument("--attributes-female", dest="attributes_female", help="female attribute tokens")
    parser.add_argument("--attributes-male", dest="attributes_male", help="male attribute tokens")
    parser.add_argument("--stopwords", help="stop-word list (default: bundled)")
    parser.add_argument("--embeddings", help="embedding text file (token + floats per line)")
    parser.add_argument("--out", help="output directory (default eventbias_out)")
    parser.add_argument("--seed", type=int, help="seed for balanced sampling")
    parser.add_argument("--balance", action="store_true", default=None,
                        help="downsample to equal gender counts per occupation")
    parser.add_argument("--smoothing", type=float, help="Haldane-Anscombe smoothing (e.g. 0.5)")
    parser.add_argument("--workers", type=int, help="parallel workers for detection")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eventbias",
        description="Corpus-level analysis of gender-skewed event mentions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub_ingest = sub.add_parser("ingest", help="validate a corpus and print its statistics")
    sub_detect = sub.add_parser("detect", help="detect event mentions (or validate external ones)")
    sub_detect.add_argument("--emit-sentences", dest="emit_sentences",
                            help="also dump the sentence split as JSONL (parity surface)")
    sub_rank = sub.add_parser("rank", help="rank events by odds ratio")
    sub_cal = sub.add_parser("calibrate", help="recall-calibrate the ranking via templates")
    sub_cal.add_argument("--review-file", dest="review_file", required=True,
                         help="template review JSONL; harvested on first run")
    sub_cal.add_argument("--emit-instances", dest="emit_instances",
                         help="write generated synthetic instances as JSONL")
    sub_cal.add_argument("--instance-detections", dest="instance_detections",
                         help="per-instance detection results from an external model")
    sub_weat = sub.add_parser("weat", help="embedding association scores for events and raw text")
    sub_weat.add_argument("--events-female", dest="events_female", help="token file for E_f")
    sub_weat.add_argument("--events-male", dest="events_male", help="token file for E_m")
    sub_pct = sub.add_parser("percentile", help="frequency percentiles of the extracted events")
    sub_eval = sub.add_parser("eval", help="score a detector against gold annotations")
    sub_eval.add_argument("--gold", required=True, help="gold annotation JSONL")
    sub_eval.add_argument("--predicted", required=True, help="predicted annotation JSONL")
    sub_eval.add_argument("--relaxed", action="store_true",
                          help="match on lemma+sentence instead of exact spans")
    sub_report = sub.add_parser("report", help="write the combined markdown/CSV bundle")

    for p in (sub_ingest, sub_detect, sub_rank, sub_cal, sub_weat, sub_pct, sub_eval, sub_report):
        _add_common(p)
    return parser


def main(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _merge_config(args)
        if args.command == "ingest":
            return cmd_ingest(config, stdout)
        if args.command == "detect":
            return cmd_detect(config, stdout, emit_sentences=args.emit_sentences)
        if args.command == "rank":
            return cmd_rank(config, stdout)
        if args.command == "calibrate":
            return cmd_calibrate(
                config,
                stdout,
                review_file=args.review_file,
                emit_instances=args.emit_instances,
                instance_detections=args.instance_detections,
            )
        if args.command == "weat":
            return cmd_weat(config, stdout, events_female=args.events_female, events_male=args.events_male)
        if args.command == "percentile":
            return cmd_percentile(config, stdout)
        if args.command == "eval":
            return cmd_eval(config, stdout, gold=args.gold, predicted=args.predicted, relaxed=args.relaxed)
        if args.command == "report":
            return cmd_report(config, stdout)
        parser.error(f"unknown command {args.command!r}")
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 2
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
