import datetime as dt

import pytest

from sentiseries import AggregationConfig, build_corpus, build_lexicon_set


@pytest.fixture
def tiny_lexicons():
    return build_lexicon_set(
        {
            "POSNEG": {"good": 1.0, "great": 1.0, "bad": -1.0, "awful": -1.0},
            "GRADED": {"good": 0.5, "bad": -0.8, "soar": 0.9, "crash": -1.2},
        }
    )


@pytest.fixture
def cluster_valence_rows():
    return [
        ("not", 1),
        ("never", 1),
        ("very", 2),
        ("really", 2),
        ("hardly", 3),
        ("barely", 3),
        ("however", 4),
        ("but", 4),
    ]


@pytest.fixture
def bigram_valence_rows():
    return [("not", -1.0), ("never", -1.0), ("very", 1.5), ("hardly", 0.3)]


def make_rows(texts_by_date, features=None):
    """Corpus input rows from {date: [text, ...]}; optional shared features."""
    rows = []
    n = 0
    for date, texts in texts_by_date.items():
        for text in texts:
            n += 1
            row = {"id": f"doc{n}", "date": date, "text": text}
            if features is not None:
                row.update(features[n - 1])
            rows.append(row)
    return rows


@pytest.fixture
def small_corpus():
    rows = make_rows(
        {
            "2022-01-03": ["good good bad day", "really bad crash ahead"],
            "2022-01-04": ["a great rally, very good"],
            "2022-01-06": ["nothing to report today"],
            "2022-01-10": ["good news but awful losses"],
        },
        features=[
            {"wsj": 1.0, "wapo": 0.0},
            {"wsj": 0.0, "wapo": 1.0},
            {"wsj": 1.0, "wapo": 0.0},
            {"wsj": 0.0, "wapo": 1.0},
            {"wsj": 1.0, "wapo": 0.0},
        ],
    )
    return build_corpus(rows)


@pytest.fixture
def daily_config():
    return AggregationConfig(
        how_within="counts",
        how_docs="equal_weight",
        how_time=("equal_weight",),
        by="day",
        lag=2,
        fill="zero",
    )


def iso(date: dt.date) -> str:
    return date.isoformat()
