"""Lexicon-based sentiment time series, elastic-net prediction, attribution."""

from .aggregation import (
    AggregationConfig,
    MeasureSet,
    across_documents,
    across_time,
    build_measures,
    diff_measures,
    fill_dates,
    fill_measures,
    global_measures,
    measure_stats,
    measures_from_sentiment,
    merge_dimensions,
    peak_dates,
    read_measures_csv,
    scale_measures,
    subset_measures,
    write_measures_csv,
)
from .attribution import Attributions, attributions, export_attributions
from .corpus import (
    Corpus,
    DocumentRecord,
    add_features,
    build_corpus,
    drop_features,
    read_corpus_csv,
    read_corpus_jsonl,
    summarize_corpus,
)
from .errors import ConfigError, DataError, NumericalError, SentiseriesError
from .lexicons import (
    Lexicon,
    LexiconSet,
    ValenceTable,
    build_lexicon_set,
    builtin_lexicon,
    builtin_valence,
    load_lexicon_file,
    load_valence_file,
)
from .model import (
    FittedModel,
    IterResults,
    ModelConfig,
    align_target,
    calibrate_cv,
    calibrate_ic,
    discard_degenerate,
    elastic_net_fit,
    fit_model,
    fit_model_iter,
    iteration_count,
    lambda_path,
    loss_data,
    predict,
    rolling_origin_folds,
)
from .sentiment import (
    SentimentTable,
    aggregate_sentences,
    compute_sentiment,
    merge_sentiment,
    peak_docs,
    validate_external_sentiment,
)
from .tokenizer import TokenizedDocument, tokenize, tokenize_sentences
from .weights import across_doc_weights, time_weights, within_weights

__version__ = "0.1.0"
