"""Lexicon-based sentiment scoring at document and sentence level.

Three scorers cover the supported algorithms: plain unigram matching,
bigram valence shifting (the word right before a hit rescales it), and
cluster valence shifting (shifters in a window around each polarized word
set the sign and strength via negator/amplifier/deamplifier counts).
Scores per lexicon are spread into lexicon x feature columns by the
document feature weights. Scoring a document is pure, so documents can be
processed in parallel without changing the output.
"""

from __future__ import annotations

import datetime as dt
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from .corpus import Corpus
from .errors import DataError
from .lexicons import (
    ADVERSATIVE,
    AMPLIFIER,
    DEAMPLIFIER,
    NEGATOR,
    SEPARATOR,
    Lexicon,
    LexiconSet,
    ValenceTable,
)
from .tokenizer import TokenizedDocument, from_pretokenized, tokenize, tokenize_sentences
from .weights import combine_weights, idf_weight, within_weights

AMPLIFY_STEP = 0.80
ADVERSATIVE_STEP = 0.25
DOC_WINDOW_BEFORE = 4
SENTENCE_WINDOW_BEFORE = 5
WINDOW_AFTER = 2


class SentimentTable:
    """Per-document or per-sentence scores for every lexicon x feature pair.

    Wraps a DataFrame with key columns (id[, sentence_id][, date],
    word_count) followed by numeric score columns. Score columns are named
    ``lexicon--feature`` when features are involved, else just the lexicon.
    """

    def __init__(self, data: pd.DataFrame, level: str = "document"):
        if level not in ("document", "sentence"):
            raise DataError(f"invalid sentiment level {level!r}")
        self.data = data.reset_index(drop=True)
        self.level = level

    @property
    def key_columns(self) -> list[str]:
        keys = ["id"]
        if self.level == "sentence":
            keys.append("sentence_id")
        return keys

    @property
    def has_dates(self) -> bool:
        return "date" in self.data.columns

    @property
    def score_columns(self) -> list[str]:
        reserved = {"id", "sentence_id", "date", "word_count"}
        return [c for c in self.data.columns if c not in reserved]

    def __len__(self) -> int:
        return len(self.data)

    def __repr__(self) -> str:
        return (
            f"SentimentTable(level={self.level!r}, rows={len(self.data)}, "
            f"scores={len(self.score_columns)})"
        )


def _resolve_dispatch(
    lexicons, languages: list[str] | None
) -> tuple[dict[str | None, LexiconSet], list[tuple[str | None, LexiconSet]]]:
    """Normalize the lexicon argument into a language -> set dispatch map."""
    if isinstance(lexicons, LexiconSet):
        return {None: lexicons}, [(None, lexicons)]
    if not isinstance(lexicons, Mapping):
        raise DataError("lexicons must be a LexiconSet or a language dispatch map")
    dispatch = dict(lexicons)
    seen: set[str] = set()
    for lang, lexset in dispatch.items():
        if not isinstance(lexset, LexiconSet):
            raise DataError(f"dispatch entry {lang!r} is not a LexiconSet")
        for name in lexset.names:
            if name in seen:
                raise DataError(f"lexicon name {name!r} appears in multiple dispatch entries")
            seen.add(name)
    if languages is None:
        raise DataError("language dispatch map given but the corpus has no language codes")
    unknown = sorted(set(languages) - set(dispatch))
    if unknown:
        raise DataError(f"no lexicons for language codes {unknown}")
    return dispatch, list(dispatch.items())


def _unit_weights(
    how: str,
    q_d: int,
    lexicon: Lexicon,
    tokens: Sequence[str],
    idf_stats: tuple[int, Counter] | None,
) -> np.ndarray:
    if how == "proportionalPol":
        n_pol = sum(1 for t in tokens if t in lexicon.entries)
        return within_weights(how, q_d, n_pol=n_pol)
    if how == "TFIDF":
        if idf_stats is None:
            raise DataError("TFIDF weighting needs corpus-level idf statistics")
        n_units, doc_freq = idf_stats
        idf = [idf_weight(n_units, doc_freq[t]) for t in tokens]
        return within_weights(how, q_d, idf=idf)
    return within_weights(how, q_d)


def _unigram_score(tokens, lexicon: Lexicon, omega) -> float:
    total = 0.0
    for i, tok in enumerate(tokens):
        s = lexicon.entries.get(tok)
        if s is not None:
            total += omega[i] * s
    return total


def _bigram_score(tokens, lexicon: Lexicon, valence: ValenceTable, omega) -> float:
    total = 0.0
    for i, tok in enumerate(tokens):
        s = lexicon.entries.get(tok)
        if s is None:
            continue
        v = 1.0
        if i > 0:
            prev = tokens[i - 1]
            # lexicon membership wins over shifter status
            if prev not in lexicon.entries and prev in valence.entries:
                v = valence.entries[prev]
        total += omega[i] * v * s
    return total


def iter_clusters(
    tokens,
    lexicon: Lexicon,
    sentence_mode: bool,
    breaks: Sequence[int] = (),
):
    """Yield (anchor, lo, hi) half-open cluster windows, left to right.

    Each cluster spans up to 4 tokens before (5 in sentence mode) and 2
    after its anchor, truncated at tokens claimed by the previous cluster
    and, in sentence mode, at comma boundaries. Lexicon words landing in a
    previous cluster's window are absorbed by it and do not anchor a
    cluster of their own, so the windows never overlap.
    """
    q = len(tokens)
    before = SENTENCE_WINDOW_BEFORE if sentence_mode else DOC_WINDOW_BEFORE
    breaks = sorted(breaks)
    next_free = 0
    for j in range(q):
        if j < next_free:
            continue
        if tokens[j] not in lexicon.entries:
            continue
        seg_lo, seg_hi = 0, q
        for b in breaks:
            if b <= j:
                seg_lo = b
            else:
                seg_hi = b
                break
        lo = max(next_free, j - before, seg_lo)
        hi = min(q, j + WINDOW_AFTER + 1, seg_hi)
        next_free = hi
        yield j, lo, hi


def _cluster_score(
    tokens,
    lexicon: Lexicon,
    valence: ValenceTable,
    omega,
    sentence_mode: bool,
    breaks: Sequence[int] = (),
) -> float:
    """Sum of cluster scores around each polarized word (see iter_clusters)."""
    total = 0.0
    for j, lo, hi in iter_clusters(tokens, lexicon, sentence_mode, breaks):
        s_j = lexicon.entries[tokens[j]]
        n_neg = n_amp = n_deamp = 0
        adv_before = adv_after = 0
        absorbed = 0.0
        for m in range(lo, hi):
            if m == j:
                continue
            s_m = lexicon.entries.get(tokens[m])
            if s_m is not None:
                if m > j:
                    absorbed += omega[m] * s_m
                continue
            kind = valence.type_of(tokens[m])
            if kind == NEGATOR:
                n_neg += 1
            elif kind == AMPLIFIER:
                n_amp += 1
            elif kind == DEAMPLIFIER:
                n_deamp += 1
            elif kind == ADVERSATIVE and sentence_mode:
                if m < j:
                    adv_before += 1
                else:
                    adv_after += 1
        odd_neg = n_neg % 2 == 1
        n = 1 if odd_neg else 0
        n_sign = -1.0 if odd_neg else 1.0
        inner = AMPLIFY_STEP * (n_amp - 2 * n_amp * n - n_deamp)
        if sentence_mode:
            inner *= 1.0 + ADVERSATIVE_STEP * (adv_before - adv_after)
        total += n_sign * (1.0 + max(inner, -1.0)) * omega[j] * s_j + absorbed
    return total


def score_tokens(
    tokens: Sequence[str],
    lexicon: Lexicon,
    valence: ValenceTable | None,
    omega,
    sentence_mode: bool = False,
    breaks: Sequence[int] = (),
) -> float:
    """Score one token unit with the algorithm implied by the valence table."""
    if len(tokens) == 0:
        return 0.0
    if valence is None:
        return _unigram_score(tokens, lexicon, omega)
    if valence.mode == "bigram":
        return _bigram_score(tokens, lexicon, valence, omega)
    return _cluster_score(tokens, lexicon, valence, omega, sentence_mode, breaks)


def _tokenize_source(
    texts: Sequence[str],
    do_sentence: bool,
    tokens_override,
) -> list[TokenizedDocument]:
    if tokens_override is not None:
        if len(tokens_override) != len(texts):
            raise DataError("tokens override length must match the document count")
        return [from_pretokenized(t, sentence_level=do_sentence) for t in tokens_override]
    if do_sentence:
        return [tokenize_sentences(t) for t in texts]
    return [tokenize(t) for t in texts]


def _idf_statistics(
    tokenized: list[TokenizedDocument], do_sentence: bool
) -> tuple[int, Counter]:
    """Unit count and per-token document (or sentence) frequency."""
    doc_freq: Counter = Counter()
    n_units = 0
    for doc in tokenized:
        if do_sentence:
            for start, stop in doc.sentences or ():
                n_units += 1
                doc_freq.update(set(doc.tokens[start:stop]))
        else:
            n_units += 1
            doc_freq.update(set(doc.tokens))
    return n_units, doc_freq


def _score_doc(
    doc: TokenizedDocument,
    lexset: LexiconSet,
    how: str,
    do_sentence: bool,
    idf_stats,
) -> list[dict[str, float]]:
    """Scores per unit (one dict per sentence, or a single dict)."""
    units: list[tuple[int, int]]
    if do_sentence:
        units = list(doc.sentences or ())
    else:
        units = [(0, len(doc.tokens))]
    out = []
    for start, stop in units:
        tokens = doc.tokens[start:stop]
        breaks = [b - start for b in doc.comma_breaks if start < b < stop]
        scores: dict[str, float] = {}
        for lexicon in lexset.lexicons:
            if len(tokens) == 0:
                scores[lexicon.name] = 0.0
                continue
            omega = _unit_weights(how, len(tokens), lexicon, tokens, idf_stats)
            scores[lexicon.name] = score_tokens(
                tokens,
                lexicon,
                lexset.valence,
                omega,
                sentence_mode=do_sentence,
                breaks=breaks,
            )
        out.append(scores)
    return out


def compute_sentiment(
    source,
    lexicons,
    how: str = "proportional",
    do_sentence: bool = False,
    tokens=None,
    n_jobs: int = 1,
) -> SentimentTable:
    """Compute the sentiment table for a corpus or a plain list of texts.

    ``lexicons`` is a LexiconSet, or a language -> LexiconSet dispatch map
    for multi-language corpora (score columns of lexicons in another
    language than the document are zero). ``tokens`` optionally supplies
    pre-tokenized input, one entry per document. ``n_jobs`` > 1 scores
    documents in a thread pool; output is identical to serial execution.
    """
    is_corpus = isinstance(source, Corpus)
    if is_corpus:
        texts = [rec.text for rec in source.records]
        languages = source.languages
    else:
        texts = [str(t) for t in source]
        if not texts:
            raise DataError("no texts to score")
        languages = None
    dispatch, entries = _resolve_dispatch(lexicons, languages)
    tokenized = _tokenize_source(texts, do_sentence, tokens)
    idf_stats = _idf_statistics(tokenized, do_sentence) if how == "TFIDF" else None

    all_lexicon_names = [name for _, lexset in entries for name in lexset.names]

    def worker(idx: int) -> list[dict[str, float]]:
        lang = languages[idx] if languages is not None else None
        lexset = dispatch[lang] if lang in dispatch else dispatch[None]
        unit_scores = _score_doc(tokenized[idx], lexset, how, do_sentence, idf_stats)
        # widen to the full column set; other-language lexicons stay zero
        return [
            {name: scores.get(name, 0.0) for name in all_lexicon_names}
            for scores in unit_scores
        ]

    indices = range(len(texts))
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            scored = list(pool.map(worker, indices))
    else:
        scored = [worker(i) for i in indices]

    rows = []
    for idx, unit_scores in enumerate(scored):
        doc = tokenized[idx]
        units = list(doc.sentences or ()) if do_sentence else [(0, len(doc.tokens))]
        rec = source.records[idx] if is_corpus else None
        doc_id = rec.id if is_corpus else f"text{idx + 1}"
        for unit_no, ((start, stop), scores) in enumerate(zip(units, unit_scores), start=1):
            row: dict[str, object] = {"id": doc_id}
            if do_sentence:
                row["sentence_id"] = unit_no
            if is_corpus:
                row["date"] = rec.date
            row["word_count"] = stop - start
            if is_corpus:
                for name in all_lexicon_names:
                    for feat in source.feature_names:
                        row[f"{name}{SEPARATOR}{feat}"] = scores[name] * rec.features[feat]
            else:
                row.update(scores)
            rows.append(row)
    frame = pd.DataFrame(rows)
    return SentimentTable(frame, level="sentence" if do_sentence else "document")


def aggregate_sentences(
    table: SentimentTable,
    how_docs: str = "equal_weight",
    do_ignore_zeros: bool = True,
    alpha_exp_docs: float = 0.1,
) -> SentimentTable:
    """Collapse a sentence-level table into document-level scores.

    Sentences are combined with across-document weights computed over
    sentence token counts; with ``do_ignore_zeros`` the zero-score
    sentences are left out of each column's weight normalization.
    """
    if table.level != "sentence":
        raise DataError("aggregate_sentences needs a sentence-level table")
    score_cols = table.score_columns
    rows = []
    for doc_id, group in table.data.groupby("id", sort=False):
        counts = group["word_count"].to_numpy(dtype=float)
        row: dict[str, object] = {"id": doc_id}
        if table.has_dates:
            row["date"] = group["date"].iloc[0]
        row["word_count"] = int(counts.sum())
        for col in score_cols:
            values = group[col].to_numpy(dtype=float)
            row[col] = _weighted_combine(values, counts, how_docs, do_ignore_zeros, alpha_exp_docs)
        rows.append(row)
    return SentimentTable(pd.DataFrame(rows), level="document")


def _weighted_combine(
    values: np.ndarray,
    counts: np.ndarray,
    how_docs: str,
    do_ignore_zeros: bool,
    alpha_exp_docs: float,
) -> float:
    """One across-unit weighted sum, optionally renormalized over nonzeros."""
    theta = combine_weights(values, counts, how_docs, do_ignore_zeros, alpha_exp_docs)
    return float(theta @ values)


def merge_sentiment(*tables: SentimentTable) -> SentimentTable:
    """Combine sentiment tables column-wise (same keys) or row-wise (same columns)."""
    if len(tables) < 2:
        raise DataError("merge needs at least two sentiment tables")
    levels = {t.level for t in tables}
    if len(levels) != 1:
        raise DataError("cannot merge document-level with sentence-level tables")
    level = levels.pop()
    keys = tables[0].key_columns + (["date"] if tables[0].has_dates else [])
    first_keys = tables[0].data[keys]

    same_keys = all(
        len(t.data) == len(first_keys) and t.data[keys].equals(first_keys) for t in tables[1:]
    )
    if same_keys:
        merged = tables[0].data.copy()
        for t in tables[1:]:
            extra = [c for c in t.data.columns if c not in keys + ["word_count"]]
            dupes = [c for c in extra if c in merged.columns]
            if dupes:
                raise DataError(f"duplicate columns in merge: {dupes}")
            for c in extra:
                merged[c] = t.data[c].to_numpy()
        return SentimentTable(merged, level=level)

    same_columns = all(list(t.data.columns) == list(tables[0].data.columns) for t in tables[1:])
    if same_columns:
        combined = pd.concat([t.data for t in tables], ignore_index=True)
        if combined.duplicated(subset=keys).any():
            raise DataError("row-wise merge produced duplicate keys")
        return SentimentTable(combined, level=level)
    raise DataError("merge needs identical keys (column union) or identical columns (row union)")


def validate_external_sentiment(data: pd.DataFrame) -> SentimentTable:
    """Validate a foreign table of scores into a SentimentTable.

    Requires id, date and word_count columns plus at least one numeric
    ``lexicon--feature`` score column; a sentence_id column switches the
    result to sentence level.
    """
    if not isinstance(data, pd.DataFrame):
        raise DataError("external sentiment must be a DataFrame")
    data = data.copy()
    for required in ("id", "date", "word_count"):
        if required not in data.columns:
            raise DataError(f"external sentiment lacks the {required!r} column")
    level = "sentence" if "sentence_id" in data.columns else "document"
    reserved = {"id", "sentence_id", "date", "word_count"}
    score_cols = [c for c in data.columns if c not in reserved]
    if not score_cols:
        raise DataError("external sentiment has no score columns")
    for col in score_cols:
        if SEPARATOR not in col:
            raise DataError(
                f"score column {col!r} is not named '<lexicon>{SEPARATOR}<feature>'"
            )
        if not pd.api.types.is_numeric_dtype(data[col]):
            raise DataError(f"score column {col!r} is not numeric")
    data["date"] = [_coerce_date(v) for v in data["date"]]
    keys = ["id", "sentence_id"] if level == "sentence" else ["id"]
    if data.duplicated(subset=keys).any():
        raise DataError("duplicate keys in external sentiment table")
    return SentimentTable(data, level=level)


def _coerce_date(value):
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    try:
        return dt.date.fromisoformat(str(value))
    except ValueError:
        raise DataError(f"unparseable date {value!r} in sentiment table") from None


def read_sentiment_csv(path) -> SentimentTable:
    """Load and validate an exported sentiment CSV."""
    return validate_external_sentiment(pd.read_csv(path, dtype={"id": str}))


def peak_docs(table: SentimentTable, n: int, kind: str = "abs") -> list[str]:
    """Ids of the n most extreme documents by mean score across columns."""
    if table.level != "document":
        raise DataError("peak_docs needs a document-level table")
    if n > len(table.data):
        raise DataError(f"asked for {n} peak documents but only {len(table.data)} exist")
    means = table.data[table.score_columns].mean(axis=1)
    if kind == "pos":
        order = means.sort_values(ascending=False, kind="stable")
    elif kind == "neg":
        order = means.sort_values(ascending=True, kind="stable")
    elif kind == "abs":
        order = means.abs().sort_values(ascending=False, kind="stable")
    else:
        raise DataError(f"unknown peak type {kind!r} (pos, neg, abs)")
    return table.data.loc[order.index[:n], "id"].tolist()
