"""Dated, feature-weighted document collections.

A corpus row is (id, date, text, optional language, feature weights). All
records share one feature-name set; when the input carries no features a
"dummyFeature" valued 1 everywhere is injected so downstream aggregation
always has at least one feature column. Corpora are immutable: feature
generation returns a new corpus.
"""

from __future__ import annotations

import datetime as dt
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import pandas as pd

from .errors import DataError
from .lexicons import SEPARATOR
from .tokenizer import tokenize

DUMMY_FEATURE = "dummyFeature"
RESERVED_COLUMNS = ("id", "date", "text", "language")


@dataclass(frozen=True)
class DocumentRecord:
    id: str
    date: dt.date
    text: str
    language: str | None
    features: Mapping[str, float]


class Corpus:
    """Validated document collection with a shared feature set."""

    def __init__(self, records: Sequence[DocumentRecord], feature_names: Sequence[str]):
        self.records = tuple(records)
        self.feature_names = list(feature_names)
        self._validate()

    def _validate(self) -> None:
        if not self.records:
            raise DataError("corpus has no documents")
        if not self.feature_names:
            raise DataError("corpus has no features (dummy feature missing)")
        seen_ids = set()
        n_lang = 0
        names = set(self.feature_names)
        if len(names) != len(self.feature_names):
            raise DataError("duplicate feature names")
        for name in self.feature_names:
            if not name or SEPARATOR in name:
                raise DataError(f"invalid feature name {name!r}")
            if name in RESERVED_COLUMNS:
                raise DataError(f"feature name {name!r} collides with a reserved column")
        for rec in self.records:
            if rec.id in seen_ids:
                raise DataError(f"duplicate document id {rec.id!r}")
            seen_ids.add(rec.id)
            if rec.language is not None:
                n_lang += 1
            if set(rec.features) != names:
                raise DataError(f"document {rec.id!r} has a mismatched feature set")
            for fname, w in rec.features.items():
                if not (0.0 <= w <= 1.0):
                    raise DataError(
                        f"feature weight out of range [0, 1]: {fname}={w} on {rec.id!r}"
                    )
        if n_lang not in (0, len(self.records)):
            raise DataError("either all documents carry a language code or none do")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def languages(self) -> list[str] | None:
        if self.records[0].language is None:
            return None
        return [rec.language for rec in self.records]

    def to_frame(self) -> pd.DataFrame:
        """Rectangular export (id, date, text, [language], features)."""
        rows = []
        for rec in self.records:
            row = {"id": rec.id, "date": rec.date.isoformat(), "text": rec.text}
            if rec.language is not None:
                row["language"] = rec.language
            row.update({k: rec.features[k] for k in self.feature_names})
            rows.append(row)
        return pd.DataFrame(rows)


def _parse_date(value) -> dt.date:
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    try:
        return dt.date.fromisoformat(str(value).strip())
    except ValueError:
        raise DataError(f"unparseable date {value!r} (expected YYYY-MM-DD)") from None


def build_corpus(rows) -> Corpus:
    """Build a corpus from tabular records.

    ``rows`` is a DataFrame or an iterable of mappings with keys id, date,
    text, optional language; every other key is treated as a numeric
    feature column.
    """
    if isinstance(rows, pd.DataFrame):
        columns = list(rows.columns)
        row_iter: Iterable[Mapping] = rows.to_dict(orient="records")
    else:
        rows = list(rows)
        if not rows:
            raise DataError("corpus has no documents")
        columns = list(rows[0].keys())
        row_iter = rows
    for required in ("id", "date", "text"):
        if required not in columns:
            raise DataError(f"corpus input lacks required column {required!r}")
    feature_cols = [c for c in columns if c not in RESERVED_COLUMNS]
    has_language = "language" in columns

    records = []
    for raw in row_iter:
        features = {}
        for name in feature_cols:
            value = raw.get(name)
            try:
                features[name] = float(value)
            except (TypeError, ValueError):
                raise DataError(f"non-numeric feature column {name!r}: {value!r}") from None
        if not feature_cols:
            features = {DUMMY_FEATURE: 1.0}
        language = raw.get("language") if has_language else None
        if language is not None:
            language = str(language)
        records.append(
            DocumentRecord(
                id=str(raw["id"]),
                date=_parse_date(raw["date"]),
                text=str(raw["text"]),
                language=language,
                features=features,
            )
        )
    names = feature_cols if feature_cols else [DUMMY_FEATURE]
    return Corpus(records, names)


def read_corpus_csv(path: str | Path) -> Corpus:
    frame = pd.read_csv(path, dtype={"id": str})
    return build_corpus(frame)


def read_corpus_jsonl(path: str | Path) -> Corpus:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON ({exc})") from None
    if not rows:
        raise DataError(f"empty corpus file: {path}")
    return build_corpus(rows)


def add_features(
    corpus: Corpus,
    keywords: Mapping[str, object],
    do_binary: bool = True,
    do_regex: bool | Sequence[bool] = False,
) -> Corpus:
    """Generate new feature columns from keyword lists or regex patterns.

    Keyword entries match case-insensitively against the same token stream
    the sentiment scorer uses; regex entries match the raw text. Binary
    features score 1 on any hit; non-binary features score hit count over
    document token count, clamped to [0, 1].
    """
    names = list(keywords)
    if isinstance(do_regex, bool):
        regex_flags = [do_regex] * len(names)
    else:
        regex_flags = list(do_regex)
        if len(regex_flags) != len(names):
            raise DataError("do_regex flags must align with the keyword entries")
    for name in names:
        if name in corpus.feature_names:
            raise DataError(f"feature {name!r} already exists")
        if not name or SEPARATOR in name:
            raise DataError(f"invalid feature name {name!r}")

    matchers = []
    for name, is_regex in zip(names, regex_flags):
        spec = keywords[name]
        if is_regex:
            if not isinstance(spec, str):
                raise DataError(f"regex feature {name!r} needs a pattern string")
            try:
                matchers.append(("regex", re.compile(spec)))
            except re.error as exc:
                raise DataError(f"invalid regex for feature {name!r}: {exc}") from None
        else:
            words = [spec] if isinstance(spec, str) else list(spec)
            matchers.append(("keywords", {w.casefold() for w in words}))

    new_records = []
    for rec in corpus.records:
        tokens = None
        features = dict(rec.features)
        only_dummy = corpus.feature_names == [DUMMY_FEATURE]
        for name, (kind, matcher) in zip(names, matchers):
            if kind == "regex":
                hits = len(matcher.findall(rec.text))
                if do_binary:
                    value = 1.0 if hits else 0.0
                else:
                    if tokens is None:
                        tokens = tokenize(rec.text).tokens
                    value = min(1.0, hits / len(tokens)) if tokens else 0.0
            else:
                if tokens is None:
                    tokens = tokenize(rec.text).tokens
                hits = sum(1 for t in tokens if t in matcher)
                if do_binary:
                    value = 1.0 if hits else 0.0
                else:
                    value = min(1.0, hits / len(tokens)) if tokens else 0.0
            features[name] = value
        new_records.append(
            DocumentRecord(rec.id, rec.date, rec.text, rec.language, features)
        )
    return Corpus(new_records, corpus.feature_names + names)


def drop_features(corpus: Corpus, names: Sequence[str]) -> Corpus:
    """Remove feature columns; removing all re-injects the dummy feature."""
    missing = [n for n in names if n not in corpus.feature_names]
    if missing:
        raise DataError(f"unknown features: {missing}")
    kept = [n for n in corpus.feature_names if n not in set(names)]
    new_records = []
    for rec in corpus.records:
        features = {k: rec.features[k] for k in kept}
        if not kept:
            features = {DUMMY_FEATURE: 1.0}
        new_records.append(
            DocumentRecord(rec.id, rec.date, rec.text, rec.language, features)
        )
    return Corpus(new_records, kept or [DUMMY_FEATURE])


def period_label(date: dt.date, by: str) -> dt.date:
    """Calendar bucket label: ISO-week Monday, month/year first day, or the day."""
    if by == "day":
        return date
    if by == "week":
        iso = date.isocalendar()
        return dt.date.fromisocalendar(iso[0], iso[1], 1)
    if by == "month":
        return date.replace(day=1)
    if by == "year":
        return date.replace(month=1, day=1)
    raise DataError(f"unknown frequency {by!r} (day, week, month, year)")


def summarize_corpus(corpus: Corpus, by: str = "day") -> pd.DataFrame:
    """Per-period document counts, token totals, and nonzero feature counts.

    Long format (period, metric, value); feature metrics are named
    ``feature:<name>`` and count documents whose weight is nonzero.
    """
    if not corpus.records:
        raise DataError("cannot summarize an empty corpus")
    buckets: dict[dt.date, dict[str, float]] = {}
    for rec in corpus.records:
        label = period_label(rec.date, by)
        entry = buckets.setdefault(
            label, {"documents": 0, "tokens": 0, **{f"feature:{f}": 0 for f in corpus.feature_names}}
        )
        entry["documents"] += 1
        entry["tokens"] += tokenize(rec.text).word_count
        for fname, w in rec.features.items():
            if w != 0.0:
                entry[f"feature:{fname}"] += 1
    rows = []
    for label in sorted(buckets):
        for metric, value in buckets[label].items():
            rows.append({"period": label.isoformat(), "metric": metric, "value": value})
    return pd.DataFrame(rows, columns=["period", "metric", "value"])
