"""Corpus-level analysis of gender-skewed event mentions.

The pipeline: load a biography corpus (JSONL), detect event trigger words
(built-in lexicon or imported annotations), build per-gender frequency
dictionaries, rank events by odds ratio, calibrate raw counts against
detector recall measured on template-substituted synthetic sentences, score
embedding associations with WEAT, and check result significance with
frequency percentiles.
"""

from .analyze import (
    EvalMetrics,
    PercentileReport,
    PercentileRow,
    evaluate_by_gender,
    evaluate_detector,
    evaluate_detector_relaxed,
    frequency_percentile,
    percentile_report,
)
from .calibrate import (
    NameList,
    RecallRecord,
    SwapTable,
    SyntheticInstance,
    TemplateSentence,
    build_template,
    calibrate_frequency,
    calibrated_ranking,
    default_name_list,
    default_swap_table,
    detection_recall,
    generate_synthetic,
    harvest_templates,
    load_name_list,
    load_swap_table,
    read_review_file,
    substitute,
    write_review_file,
)
from .corpus import (
    CelebrityRecord,
    Corpus,
    CorpusStats,
    Sentence,
    corpus_stats,
    filter_records,
    iter_sentences,
    load_corpus,
    normalize_section_name,
    save_corpus,
    split_sentences,
    tokenize,
    tokenize_spans,
)
from .detect import (
    EventMention,
    FrequencyTable,
    TriggerLexicon,
    build_frequency_tables,
    default_lexicon,
    detect_corpus,
    detect_events,
    ingest_annotations,
    lemmatize,
    load_lexicon,
    tag_event_type,
    write_annotations,
)
from .rank import (
    FEMALE_EXCLUSIVE,
    MALE_EXCLUSIVE,
    OddsRatioEntry,
    RankedEvents,
    odds_ratio,
    rank_events,
)
from .weat import (
    AttributeLists,
    EmbeddingTable,
    WeatResult,
    association,
    cosine,
    gendered_token_sets,
    load_embeddings,
    weat_score,
    weat_star,
)

__version__ = "0.1.0"
