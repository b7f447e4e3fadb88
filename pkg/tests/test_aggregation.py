import datetime as dt

import numpy as np
import pandas as pd
import pytest

from sentiseries.aggregation import (
    AggregationConfig,
    across_documents,
    across_time,
    build_measures,
    diff_measures,
    fill_dates,
    fill_measures,
    global_measures,
    measure_stats,
    measures_from_sentiment,
    make_name,
    merge_dimensions,
    parse_name,
    peak_dates,
    read_measures_csv,
    scale_measures,
    subset_measures,
    write_measures_csv,
)
from sentiseries.corpus import build_corpus
from sentiseries.errors import ConfigError, DataError
from sentiseries.lexicons import build_lexicon_set
from sentiseries.sentiment import compute_sentiment, validate_external_sentiment
from sentiseries.weights import time_weights

from naive_pipeline import naive_build_measures


def day(s: str) -> dt.date:
    return dt.date.fromisoformat(s)


def sent_table(rows):
    """rows: (id, date, word_count, {col: value})"""
    records = []
    for rid, date, wc, scores in rows:
        records.append({"id": rid, "date": date, "word_count": wc, **scores})
    return validate_external_sentiment(pd.DataFrame(records))


# -- across-document ---------------------------------------------------------


def test_across_documents_equal_weight_mean():
    table = sent_table(
        [
            ("a", "2021-01-01", 10, {"L--f": 1.0}),
            ("b", "2021-01-01", 10, {"L--f": 3.0}),
        ]
    )
    panel = across_documents(table, by="day", how_docs="equal_weight", do_ignore_zeros=False)
    assert panel["L--f"].iloc[0] == pytest.approx(2.0)


def test_across_documents_ignore_zeros_renormalizes():
    table = sent_table(
        [
            ("a", "2021-01-01", 10, {"L--f": 0.0}),
            ("b", "2021-01-01", 10, {"L--f": 4.0}),
        ]
    )
    panel = across_documents(table, by="day", how_docs="equal_weight", do_ignore_zeros=True)
    assert panel["L--f"].iloc[0] == pytest.approx(4.0)


def test_across_documents_proportional_hand_value():
    table = sent_table(
        [
            ("a", "2021-01-01", 10, {"L--f": 1.0}),
            ("b", "2021-01-01", 30, {"L--f": 3.0}),
        ]
    )
    panel = across_documents(table, by="day", how_docs="proportional", do_ignore_zeros=False)
    assert panel["L--f"].iloc[0] == pytest.approx(0.25 * 1.0 + 0.75 * 3.0)


def test_across_documents_ignore_zeros_is_per_column():
    table = sent_table(
        [
            ("a", "2021-01-01", 10, {"L--f": 0.0, "L--g": 2.0}),
            ("b", "2021-01-01", 10, {"L--f": 4.0, "L--g": 2.0}),
        ]
    )
    panel = across_documents(table, by="day", how_docs="equal_weight", do_ignore_zeros=True)
    assert panel["L--f"].iloc[0] == pytest.approx(4.0)
    assert panel["L--g"].iloc[0] == pytest.approx(2.0)


# -- fill ---------------------------------------------------------------------


def panel_abc():
    return pd.DataFrame(
        {"date": [day("2021-01-01"), day("2021-01-03")], "L--f": [1.0, 3.0]}
    )


def test_fill_zero_inserts_zero():
    out = fill_dates(panel_abc(), by="day", fill="zero")
    assert list(out["date"]) == [day("2021-01-01"), day("2021-01-02"), day("2021-01-03")]
    assert out["L--f"].tolist() == [1.0, 0.0, 3.0]


def test_fill_latest_carries_forward():
    out = fill_dates(panel_abc(), by="day", fill="latest")
    assert out["L--f"].tolist() == [1.0, 1.0, 3.0]


def test_fill_none_passthrough():
    out = fill_dates(panel_abc(), by="day", fill="none")
    pd.testing.assert_frame_equal(out, panel_abc())


def test_fill_latest_with_date_before_backfills_first_value():
    out = fill_dates(panel_abc(), by="day", fill="latest", date_before=day("2020-12-30"))
    assert list(out["date"])[0] == day("2020-12-30")
    assert out["L--f"].tolist() == [1.0, 1.0, 1.0, 1.0, 3.0]


def test_fill_date_before_after_first_rejected():
    with pytest.raises(DataError, match="date_before"):
        fill_dates(panel_abc(), by="day", fill="zero", date_before=day("2021-01-02"))


# -- across-time ---------------------------------------------------------------


def test_across_time_lag1_is_identity():
    panel = panel_abc()
    out = across_time(panel, time_weights("equal_weight", 1), lag=1)
    assert out["L--f--equal_weight"].tolist() == [1.0, 3.0]
    assert list(out["date"]) == list(panel["date"])


def test_across_time_moving_average():
    panel = pd.DataFrame(
        {"date": [day(f"2021-01-0{i}") for i in (1, 2, 3)], "L--f": [3.0, 6.0, 9.0]}
    )
    out = across_time(panel, time_weights("equal_weight", 3), lag=3)
    assert len(out) == 1
    assert out["L--f--equal_weight"].iloc[0] == pytest.approx(6.0)


def test_across_time_linear_weights_recent_more():
    panel = pd.DataFrame(
        {"date": [day("2021-01-01"), day("2021-01-02")], "L--f": [1.0, 2.0]}
    )
    out = across_time(panel, time_weights("linear", 2), lag=2)
    assert out["L--f--linear"].iloc[0] == pytest.approx(1.0 / 3.0 + 2.0 * 2.0 / 3.0)


def test_across_time_too_short():
    with pytest.raises(DataError, match="lag"):
        across_time(panel_abc(), time_weights("equal_weight", 5), lag=5)


# -- build_measures -----------------------------------------------------------


def corpus_for_measures():
    rows = []
    texts = ["good good bad", "bad awful", "great day", "nothing here", "good bad good"]
    dates = ["2021-01-04", "2021-01-04", "2021-01-05", "2021-01-07", "2021-01-08"]
    for i, (text, date) in enumerate(zip(texts, dates)):
        rows.append(
            {"id": f"d{i}", "date": date, "text": text, "wsj": float(i % 2), "wapo": 1.0 - i % 2}
        )
    return build_corpus(rows)


def two_lex():
    return build_lexicon_set(
        {
            "POSNEG": {"good": 1.0, "great": 1.0, "bad": -1.0, "awful": -1.0},
            "GRADED": {"good": 0.5, "bad": -0.8},
        }
    )


def test_build_measures_dimensions_and_count():
    cfg = AggregationConfig(
        how_within="counts", how_docs="equal_weight",
        how_time=("equal_weight", "linear"), by="day", lag=2, fill="zero",
    )
    ms = build_measures(corpus_for_measures(), two_lex(), cfg)
    assert ms.n_series == 2 * 2 * 2
    assert ms.lexicons == ["POSNEG", "GRADED"]
    assert ms.features == ["wsj", "wapo"]
    assert ms.times == ["equal_weight", "linear"]
    # grid 01-04..01-08 has 5 days; lag 2 drops the first
    assert ms.n_obs == 4


def test_single_series_case():
    corpus = build_corpus([{"id": "a", "date": "2021-01-01", "text": "good"}])
    cfg = AggregationConfig(how_within="counts", how_time=("equal_weight",), lag=1)
    ms = build_measures(corpus, build_lexicon_set({"L": {"good": 1.0}}), cfg)
    assert ms.n_series == 1
    assert ms.series_columns == ["L--dummyFeature--equal_weight"]


def test_measure_enumeration_l_times_k_times_b():
    lexicons = {f"LEX{i}": {"good": 1.0, "bad": -1.0} for i in range(9)}
    rows = []
    for i in range(8):
        rows.append(
            {
                "id": f"d{i}",
                "date": (day("2021-01-04") + dt.timedelta(days=i)).isoformat(),
                "text": "good bad good",
                **{f"f{j}": float((i + j) % 2) for j in range(6)},
            }
        )
    corpus = build_corpus(rows)
    cfg = AggregationConfig(
        how_within="counts", how_time=("equal_weight", "linear"), by="day", lag=2
    )
    ms = build_measures(corpus, build_lexicon_set(lexicons), cfg)
    assert ms.n_series == 9 * 6 * 2 == 108


def test_pipeline_linearity_in_feature_scale():
    # scaling every feature weight by kappa scales every series by kappa
    rows = [
        {"id": "a", "date": "2021-01-01", "text": "good good", "f": 0.8},
        {"id": "b", "date": "2021-01-02", "text": "bad", "f": 0.4},
    ]
    scaled = [dict(r, f=r["f"] * 0.5) for r in rows]
    cfg = AggregationConfig(
        how_within="counts", how_docs="equal_weight", how_time=("equal_weight",),
        by="day", lag=2, fill="zero", do_ignore_zeros=False,
    )
    lex = build_lexicon_set({"L": {"good": 1.0, "bad": -1.0}})
    ms1 = build_measures(build_corpus(rows), lex, cfg)
    ms2 = build_measures(build_corpus(scaled), lex, cfg)
    assert np.allclose(ms2.values(), 0.5 * ms1.values())


def test_column_name_roundtrip():
    for name in ("A--b--c", "POSNEG--wsj--equal_weight", "L1--f2--beta1x2"):
        assert make_name(*parse_name(name)) == name
    with pytest.raises(DataError):
        parse_name("only--two")


# -- brute-force pipeline oracle ----------------------------------------------


def random_rows(rng, n_docs: int):
    vocab = ["good", "great", "bad", "awful", "day", "the", "market", "not", "x"]
    rows = []
    base = day("2021-03-01")
    for i in range(n_docs):
        n_tokens = int(rng.integers(1, 12))
        text = " ".join(rng.choice(vocab, size=n_tokens))
        rows.append(
            {
                "id": f"d{i}",
                "date": (base + dt.timedelta(days=int(rng.integers(0, 15)))).isoformat(),
                "text": text,
                "f1": float(rng.choice([0.0, 0.3, 1.0])),
                "f2": float(rng.integers(0, 2)),
            }
        )
    return rows


LEXICONS = {
    "PN": {"good": 1.0, "great": 1.0, "bad": -1.0, "awful": -1.0},
    "GR": {"good": 0.5, "bad": -0.8, "market": 0.1},
}


@pytest.mark.parametrize("fill", ["zero", "latest", "none"])
@pytest.mark.parametrize("ignore_zeros", [True, False])
def test_pipeline_matches_naive_oracle(fill, ignore_zeros):
    rng = np.random.default_rng(99)
    for trial in range(8):
        rows = random_rows(rng, n_docs=int(rng.integers(3, 20)))
        how_within = ["counts", "proportional", "proportionalPol"][trial % 3]
        how_docs = ["equal_weight", "proportional"][trial % 2]
        lag = int(rng.integers(1, 4))
        cfg = AggregationConfig(
            how_within=how_within,
            how_docs=how_docs,
            how_time=("equal_weight", "linear"),
            by="day",
            lag=lag,
            fill=fill,
            do_ignore_zeros=ignore_zeros,
        )
        ms = build_measures(build_corpus(rows), build_lexicon_set(LEXICONS), cfg)
        naive = naive_build_measures(
            rows, LEXICONS, None, how_within, how_docs,
            ["equal_weight", "linear"], "day", lag, fill, ignore_zeros,
        )
        for (lex, feat, scheme), (dates, values) in naive.items():
            col = make_name(lex, feat, scheme)
            assert list(ms.data["date"]) == dates
            assert np.allclose(ms.data[col].to_numpy(), values, atol=1e-10), (
                col, how_within, how_docs, lag, fill, ignore_zeros,
            )


def test_pipeline_matches_naive_oracle_weekly_bigram():
    rng = np.random.default_rng(5)
    rows = random_rows(rng, 15)
    valence = {"not": -1.0}
    lexset = build_lexicon_set(LEXICONS, valence=list(valence.items()), valence_mode="bigram")
    cfg = AggregationConfig(
        how_within="proportional", how_docs="proportional",
        how_time=("equal_weight",), by="week", lag=2, fill="zero",
    )
    ms = build_measures(build_corpus(rows), lexset, cfg)
    naive = naive_build_measures(
        rows, LEXICONS, valence, "proportional", "proportional",
        ["equal_weight"], "week", 2, "zero", True,
    )
    for (lex, feat, scheme), (dates, values) in naive.items():
        col = make_name(lex, feat, scheme)
        assert list(ms.data["date"]) == dates
        assert np.allclose(ms.data[col].to_numpy(), values, atol=1e-10)


# -- manipulation -------------------------------------------------------------


@pytest.fixture
def measures_108():
    lexicons = {f"LEX{i}": {"good": 1.0, "bad": -1.0, "great": 0.5} for i in range(9)}
    rng = np.random.default_rng(3)
    rows = []
    for i in range(25):
        rows.append(
            {
                "id": f"d{i}",
                "date": (day("2021-01-04") + dt.timedelta(days=int(rng.integers(0, 20)))).isoformat(),
                "text": " ".join(rng.choice(["good", "bad", "great", "x", "y"], size=6)),
                **{f"f{j}": float(rng.choice([0.0, 0.5, 1.0])) for j in range(6)},
            }
        )
    cfg = AggregationConfig(
        how_within="counts", how_time=("equal_weight", "linear"), by="day", lag=3
    )
    return build_measures(build_corpus(rows), build_lexicon_set(lexicons), cfg)


def test_merge_dimensions_paper_style_28(measures_108):
    assert measures_108.n_series == 108
    out = merge_dimensions(
        measures_108,
        time={"W": ["equal_weight", "linear"]},
        lexicons={"LEX": ["LEX0", "LEX1", "LEX2"]},
        features={"JOUR": ["f0", "f1"], "NEW": ["f4", "f5"]},
        do_keep=False,
    )
    assert out.n_series == 7 * 4 * 1 == 28
    assert out.times == ["W"]
    assert out.lexicons == ["LEX3", "LEX4", "LEX5", "LEX6", "LEX7", "LEX8", "LEX"]
    assert out.features == ["f2", "f3", "JOUR", "NEW"]


def test_merge_dimensions_group_is_pointwise_mean(measures_108):
    out = merge_dimensions(measures_108, lexicons={"AB": ["LEX0", "LEX1"]}, do_keep=True)
    got = out.data["AB--f0--linear"].to_numpy()
    expected = (
        measures_108.data["LEX0--f0--linear"].to_numpy()
        + measures_108.data["LEX1--f0--linear"].to_numpy()
    ) / 2.0
    assert np.allclose(got, expected)


def test_merge_singleton_group_renames_only(measures_108):
    out = merge_dimensions(measures_108, lexicons={"SOLO": ["LEX0"]})
    assert np.allclose(
        out.data["SOLO--f0--linear"].to_numpy(),
        measures_108.data["LEX0--f0--linear"].to_numpy(),
    )


def test_merge_preserves_cross_series_mean_for_partitions(measures_108):
    out = merge_dimensions(
        measures_108,
        lexicons={f"G{i}": [f"LEX{3 * i}", f"LEX{3 * i + 1}", f"LEX{3 * i + 2}"] for i in range(3)},
        do_keep=False,
    )
    before = measures_108.values().mean(axis=1)
    after = out.values().mean(axis=1)
    assert np.allclose(before, after)


def test_merge_unknown_member(measures_108):
    with pytest.raises(DataError, match="unknown"):
        merge_dimensions(measures_108, lexicons={"G": ["NOPE"]})


def test_subset_delete_dimension_and_triple(measures_108):
    out = subset_measures(
        measures_108,
        delete=[["LEX0"], ["LEX1", "f0", "equal_weight"]],
    )
    assert out.n_series == 108 - 12 - 1 == 95


def test_subset_select_all_identity(measures_108):
    everything = [[l] for l in measures_108.lexicons]
    out = subset_measures(measures_108, select=everything)
    assert out.n_series == measures_108.n_series


def test_subset_date_range(measures_108):
    dates = measures_108.dates
    out = subset_measures(measures_108, date_from=dates[2], date_to=dates[7])
    assert out.n_obs == 6
    assert out.n_series == 108


def test_subset_rows_and_conditions(measures_108):
    col = measures_108.series_columns[0]
    out = subset_measures(measures_108, conditions=[(col, ">", -1e9)])
    assert out.n_obs == measures_108.n_obs
    out2 = subset_measures(measures_108, rows=range(5))
    assert out2.n_obs == 5


def test_subset_empty_result_rejected(measures_108):
    col = measures_108.series_columns[0]
    with pytest.raises(DataError, match="empty"):
        subset_measures(measures_108, conditions=[(col, ">", 1e9)])


def test_subset_unknown_component_rejected(measures_108):
    with pytest.raises(DataError, match="unknown"):
        subset_measures(measures_108, select=[["NOPE"]])


def test_scale_standardizes(measures_108):
    out = scale_measures(measures_108, center=True, scale=True)
    values = out.values()
    assert np.allclose(values.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(values.std(axis=0, ddof=1), 1.0, atol=1e-12)


def test_scale_matrix_shaped(measures_108):
    shift = np.ones((measures_108.n_obs, measures_108.n_series))
    out = scale_measures(measures_108, center=shift, scale=2.0)
    assert np.allclose(out.values(), (measures_108.values() - 1.0) / 2.0)


def test_scale_shape_mismatch(measures_108):
    with pytest.raises(DataError, match="shape"):
        scale_measures(measures_108, center=np.ones(3), scale=True)


def test_diff_constant_series_is_zero():
    data = pd.DataFrame(
        {
            "date": [day("2021-01-01"), day("2021-01-02"), day("2021-01-03")],
            "L--f--equal_weight": [2.0, 2.0, 2.0],
        }
    )
    ms = read_measures_csv_roundtrip(data)
    out = diff_measures(ms, lag=1, differences=1)
    assert np.allclose(out.values(), 0.0)
    assert out.n_obs == 2


def read_measures_csv_roundtrip(frame):
    from sentiseries.aggregation import MeasureSet, _dims_from_columns

    dims = _dims_from_columns([c for c in frame.columns if c != "date"])
    return MeasureSet(frame, *dims, frequency="day")


def test_diff_then_cumsum_recovers(measures_108):
    out = diff_measures(measures_108, lag=1, differences=1)
    rebuilt = np.cumsum(out.values(), axis=0) + measures_108.values()[0]
    assert np.allclose(rebuilt, measures_108.values()[1:], atol=1e-12)


def test_global_measures_all_ones_is_mean(measures_108):
    glob = global_measures(measures_108)
    assert np.allclose(glob["global_lexicons"], measures_108.values().mean(axis=1))
    assert np.allclose(
        glob["global"],
        (glob["global_lexicons"] + glob["global_features"] + glob["global_time"]) / 3.0,
    )


def test_global_measures_one_hot_lexicon(measures_108):
    weights = {name: 0.0 for name in measures_108.lexicons}
    weights["LEX0"] = 1.0
    glob = global_measures(measures_108, lexicon_weights=weights)
    cols = [c for c in measures_108.series_columns if parse_name(c)[0] == "LEX0"]
    expected = measures_108.data[cols].sum(axis=1) / measures_108.n_series
    assert np.allclose(glob["global_lexicons"], expected)


def test_global_measures_length_mismatch(measures_108):
    with pytest.raises(DataError, match="length"):
        global_measures(measures_108, lexicon_weights=[1.0, 2.0])


def test_peak_dates_trough():
    data = pd.DataFrame(
        {
            "date": [day("2021-01-01"), day("2021-01-02"), day("2021-01-03")],
            "L--f--equal_weight": [0.5, -9.0, 1.0],
            "M--f--equal_weight": [0.2, -7.0, 0.9],
        }
    )
    ms = read_measures_csv_roundtrip(data)
    assert peak_dates(ms, 1, "neg") == [day("2021-01-02")]
    assert peak_dates(ms, 1, "abs") == [day("2021-01-02")]
    assert peak_dates(ms, 1, "pos") == [day("2021-01-03")]


def test_measure_stats_values():
    data = pd.DataFrame(
        {
            "date": [day("2021-01-01"), day("2021-01-02"), day("2021-01-03")],
            "A--f--b": [1.0, 1.0, 1.0],
            "B--f--b": [1.0, 2.0, 3.0],
            "C--f--b": [2.0, 4.0, 6.0],
        }
    )
    ms = read_measures_csv_roundtrip(data)
    stats = measure_stats(ms)
    assert stats.loc["sd", "A--f--b"] == pytest.approx(0.0)
    assert stats.loc["meanCorr", "B--f--b"] == pytest.approx(1.0)  # B and C correlate 1
    assert stats.loc["mean", "C--f--b"] == pytest.approx(4.0)


def test_measure_stats_brute_force_mean_corr(measures_108):
    stats = measure_stats(measures_108)
    block = measures_108.values()
    p = block.shape[1]
    corr = np.corrcoef(block, rowvar=False)
    for i in range(0, p, 17):
        expected = (corr[i].sum() - corr[i, i]) / (p - 1)
        got = stats.loc["meanCorr", measures_108.series_columns[i]]
        if np.isnan(expected):
            assert np.isnan(got)
        else:
            assert got == pytest.approx(expected)


def test_measures_csv_roundtrip(tmp_path, measures_108):
    path = tmp_path / "measures.csv"
    write_measures_csv(measures_108, path)
    back = read_measures_csv(path, frequency="day")
    assert back.series_columns == measures_108.series_columns
    assert np.allclose(back.values(), measures_108.values(), atol=1e-9)
    assert back.dates == measures_108.dates


def test_measures_csv_bad_naming_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("date,only--two\n2021-01-01,1.0\n")
    with pytest.raises(DataError, match="lexicon--feature--scheme"):
        read_measures_csv(path)


def test_fill_measures_expost(measures_108):
    sub = subset_measures(measures_108, rows=[0, 3, 6])
    filled = fill_measures(sub, fill="latest")
    assert filled.n_obs == 7
    data = filled.data
    assert data[filled.series_columns[0]].iloc[1] == data[filled.series_columns[0]].iloc[0]


def test_across_time_tau1_identity_full(measures_108):
    cfg = measures_108.config
    assert cfg.lag == 3
    one = AggregationConfig(
        how_within=cfg.how_within, how_docs=cfg.how_docs, how_time=("equal_weight",),
        by=cfg.by, lag=1, fill=cfg.fill,
    )
    ms1 = measures_from_sentiment(measures_108.sentiment, one)
    panel = measures_108.panel
    assert np.allclose(
        ms1.data["LEX0--f0--equal_weight"].to_numpy(), panel["LEX0--f0"].to_numpy()
    )


def test_config_validation():
    with pytest.raises(ConfigError):
        AggregationConfig(lag=0)
    with pytest.raises(ConfigError):
        AggregationConfig(how_time=())
    with pytest.raises(ConfigError):
        AggregationConfig(by="fortnight")
    with pytest.raises(ConfigError):
        AggregationConfig(fill="interpolate")
