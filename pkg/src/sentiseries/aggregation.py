"""Aggregation of per-document sentiment into sentiment time series.

The pipeline runs in two weighted sums: documents within the same calendar
bucket collapse into one score per (lexicon, feature) pair, and those
scores are smoothed over a lag window once per time weighting scheme. The
result is a MeasureSet of P = L x K x B series named
``lexicon--feature--scheme``, with manipulation helpers (fill, subset,
scale, diff, dimension merge, global indices, peaks, stats).
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from .corpus import Corpus, period_label
from .errors import ConfigError, DataError
from .lexicons import SEPARATOR, LexiconSet
from .sentiment import SentimentTable, compute_sentiment
from .weights import combine_weights, time_weights

FILL_MODES = ("zero", "latest", "none")
FREQUENCIES = ("day", "week", "month", "year")


@dataclass(frozen=True)
class AggregationConfig:
    """Everything that turns a sentiment table into measures."""

    how_within: str = "proportional"
    how_docs: str = "equal_weight"
    how_time: tuple[str, ...] = ("equal_weight",)
    by: str = "day"
    lag: int = 1
    fill: str = "zero"
    do_ignore_zeros: bool = True
    alphas_exp: tuple[float, ...] = (0.1,)
    do_inverse_exp: bool = False
    orders_alm: tuple[int, ...] = (1, 2, 3)
    do_inverse_alm: bool = True
    a_beta: tuple[float, ...] = (1.0,)
    b_beta: tuple[float, ...] = (1.0,)
    alpha_exp_docs: float = 0.1
    user_time_weights: Mapping[str, Sequence[float]] | None = None
    n_jobs: int = 1

    def __post_init__(self):
        if self.lag < 1:
            raise ConfigError("lag must be at least 1")
        if isinstance(self.how_time, str):
            object.__setattr__(self, "how_time", (self.how_time,))
        if not self.how_time:
            raise ConfigError("at least one time weighting scheme is required")
        if self.by not in FREQUENCIES:
            raise ConfigError(f"unknown frequency {self.by!r}")
        if self.fill not in FILL_MODES:
            raise ConfigError(f"unknown fill mode {self.fill!r}")

    def time_weight_map(self) -> dict[str, np.ndarray]:
        return time_weights(
            self.how_time,
            self.lag,
            alphas_exp=self.alphas_exp,
            do_inverse_exp=self.do_inverse_exp,
            orders_alm=self.orders_alm,
            do_inverse_alm=self.do_inverse_alm,
            a_beta=self.a_beta,
            b_beta=self.b_beta,
            user=self.user_time_weights,
        )


def make_name(lexicon: str, feature: str, scheme: str) -> str:
    return f"{lexicon}{SEPARATOR}{feature}{SEPARATOR}{scheme}"


def parse_name(name: str) -> tuple[str, str, str]:
    parts = name.split(SEPARATOR)
    if len(parts) != 3 or not all(parts):
        raise DataError(f"measure name {name!r} is not 'lexicon--feature--scheme'")
    return parts[0], parts[1], parts[2]


class MeasureSet:
    """P sentiment time series with their dimension metadata.

    ``data`` holds a date column plus one column per series. The builder
    also retains the underlying document-level sentiment, the aggregation
    config, and the filled per-(lexicon, feature) panel so predictions can
    later be attributed down to lags and documents. Manipulations that
    change series values (scale, diff, dimension merges) drop the panel,
    which disables attribution on the result.
    """

    def __init__(
        self,
        data: pd.DataFrame,
        lexicons: Sequence[str],
        features: Sequence[str],
        times: Sequence[str],
        frequency: str,
        sentiment: SentimentTable | None = None,
        config: AggregationConfig | None = None,
        panel: pd.DataFrame | None = None,
    ):
        self.data = data.reset_index(drop=True)
        self.lexicons = list(lexicons)
        self.features = list(features)
        self.times = list(times)
        self.frequency = frequency
        self.sentiment = sentiment
        self.config = config
        self.panel = panel
        dates = list(self.data["date"])
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise DataError("measure dates must be strictly increasing")

    @property
    def series_columns(self) -> list[str]:
        return [c for c in self.data.columns if c != "date"]

    @property
    def n_series(self) -> int:
        return len(self.series_columns)

    @property
    def n_obs(self) -> int:
        return len(self.data)

    @property
    def dates(self) -> list[dt.date]:
        return list(self.data["date"])

    @property
    def dimensions(self) -> dict[str, list[str]]:
        return {"lexicons": self.lexicons, "features": self.features, "time": self.times}

    @property
    def stats(self) -> pd.DataFrame:
        return measure_stats(self)

    def values(self) -> np.ndarray:
        return self.data[self.series_columns].to_numpy(dtype=float)

    def _with_data(self, data: pd.DataFrame, keep_panel: bool = True) -> "MeasureSet":
        dims = _dims_from_columns([c for c in data.columns if c != "date"])
        return MeasureSet(
            data,
            *dims,
            frequency=self.frequency,
            sentiment=self.sentiment,
            config=self.config,
            panel=self.panel if keep_panel else None,
        )

    def __repr__(self) -> str:
        return f"MeasureSet({self.n_series} series, {self.n_obs} observations)"


def _dims_from_columns(columns: Sequence[str]) -> tuple[list[str], list[str], list[str]]:
    lexicons: list[str] = []
    features: list[str] = []
    times: list[str] = []
    for col in columns:
        l, k, b = parse_name(col)
        if l not in lexicons:
            lexicons.append(l)
        if k not in features:
            features.append(k)
        if b not in times:
            times.append(b)
    return lexicons, features, times


def across_documents(
    table: SentimentTable,
    by: str = "day",
    how_docs: str = "equal_weight",
    do_ignore_zeros: bool = True,
    alpha_exp_docs: float = 0.1,
) -> pd.DataFrame:
    """Collapse document scores into one row per calendar bucket.

    Returns a frame with a date column (bucket labels) and the sentiment
    table's score columns. A column with no contributing documents in a
    bucket (all scores zero under ignore-zeros) aggregates to 0.
    """
    if table.level != "document":
        raise DataError("across-document aggregation needs a document-level table")
    if not table.has_dates:
        raise DataError("across-document aggregation needs dated sentiment")
    score_cols = table.score_columns
    frame = table.data
    labels = [period_label(d, by) for d in frame["date"]]
    rows = []
    grouped: dict[dt.date, list[int]] = {}
    for idx, label in enumerate(labels):
        grouped.setdefault(label, []).append(idx)
    for label in sorted(grouped):
        idxs = grouped[label]
        counts = frame["word_count"].to_numpy(dtype=float)[idxs]
        row: dict[str, object] = {"date": label}
        for col in score_cols:
            values = frame[col].to_numpy(dtype=float)[idxs]
            theta = combine_weights(values, counts, how_docs, do_ignore_zeros, alpha_exp_docs)
            row[col] = float(theta @ values)
        rows.append(row)
    return pd.DataFrame(rows, columns=["date"] + score_cols)


def next_period(date: dt.date, by: str) -> dt.date:
    if by == "day":
        return date + dt.timedelta(days=1)
    if by == "week":
        return date + dt.timedelta(days=7)
    if by == "month":
        year, month = (date.year + 1, 1) if date.month == 12 else (date.year, date.month + 1)
        return dt.date(year, month, 1)
    if by == "year":
        return dt.date(date.year + 1, 1, 1)
    raise DataError(f"unknown frequency {by!r}")


def period_grid(first: dt.date, last: dt.date, by: str) -> list[dt.date]:
    grid = [first]
    while grid[-1] < last:
        grid.append(next_period(grid[-1], by))
    return grid


def fill_dates(
    frame: pd.DataFrame,
    by: str,
    fill: str,
    date_before: dt.date | None = None,
    date_after: dt.date | None = None,
) -> pd.DataFrame:
    """Complete the date grid of a dated panel at the given frequency.

    Missing buckets get 0 (``zero``) or the most recent known value
    (``latest``); rows padded before the first observation take the first
    value that occurs. ``none`` passes the frame through untouched.
    """
    if fill == "none":
        return frame
    if fill not in ("zero", "latest"):
        raise ConfigError(f"unknown fill mode {fill!r}")
    if frame.empty:
        raise DataError("cannot fill an empty series")
    dates = list(frame["date"])
    first, last = dates[0], dates[-1]
    if date_before is not None:
        start = period_label(date_before, by)
        if start > first:
            raise DataError("date_before falls after the first observed date")
        first = start
    if date_after is not None:
        stop = period_label(date_after, by)
        if stop < last:
            raise DataError("date_after falls before the last observed date")
        last = stop
    grid = period_grid(first, last, by)
    existing = {d: i for i, d in enumerate(frame.index)}
    indexed = frame.set_index("date")
    cols = list(indexed.columns)
    out = indexed.reindex(grid)
    if fill == "zero":
        out = out.fillna(0.0)
    else:
        out = out.ffill().bfill()  # bfill covers padding before the first date
    out.insert(0, "date", grid)
    return out.reset_index(drop=True)[["date"] + cols]


def across_time(
    panel: pd.DataFrame, schemes: Mapping[str, np.ndarray], lag: int
) -> pd.DataFrame:
    """Smooth each panel column under every lag-weight scheme.

    Windows cover ``lag`` consecutive panel rows (calendar buckets when the
    panel was filled, available dates otherwise); the first lag-1 rows are
    dropped. Output columns are ``<panel column>--<scheme>``.
    """
    n = len(panel)
    if n < lag:
        raise DataError(f"need at least lag={lag} observations, got {n}")
    dates = list(panel["date"])[lag - 1 :]
    out: dict[str, object] = {"date": dates}
    cols = [c for c in panel.columns if c != "date"]
    for col in cols:
        values = panel[col].to_numpy(dtype=float)
        for scheme_name, w in schemes.items():
            # position lag is the most recent date, so reverse for convolve
            out[f"{col}{SEPARATOR}{scheme_name}"] = np.convolve(values, w[::-1], mode="valid")
    columns = ["date"] + [f"{c}{SEPARATOR}{s}" for c in cols for s in schemes]
    return pd.DataFrame(out)[columns]


def measures_from_sentiment(table: SentimentTable, config: AggregationConfig) -> MeasureSet:
    """Aggregate a dated document-level sentiment table into measures."""
    panel = across_documents(
        table, config.by, config.how_docs, config.do_ignore_zeros, config.alpha_exp_docs
    )
    panel = fill_dates(panel, config.by, config.fill)
    schemes = config.time_weight_map()
    wide = across_time(panel, schemes, config.lag)
    lexicons: list[str] = []
    features: list[str] = []
    for col in table.score_columns:
        parts = col.split(SEPARATOR)
        if len(parts) != 2:
            raise DataError(f"sentiment column {col!r} is not 'lexicon--feature'")
        if parts[0] not in lexicons:
            lexicons.append(parts[0])
        if parts[1] not in features:
            features.append(parts[1])
    # column order: lexicon x feature x scheme
    ordered = ["date"] + [
        make_name(l, k, b) for l in lexicons for k in features for b in schemes
    ]
    wide = wide[[c for c in ordered if c in wide.columns]]
    return MeasureSet(
        wide,
        lexicons,
        features,
        list(schemes),
        frequency=config.by,
        sentiment=table,
        config=config,
        panel=panel,
    )


def build_measures(corpus: Corpus, lexicons, config: AggregationConfig) -> MeasureSet:
    """Full pipeline: sentiment computation plus time series aggregation."""
    sent = compute_sentiment(
        corpus, lexicons, how=config.how_within, n_jobs=config.n_jobs
    )
    return measures_from_sentiment(sent, config)


def fill_measures(
    measures: MeasureSet,
    fill: str = "zero",
    date_before: dt.date | None = None,
    date_after: dt.date | None = None,
) -> MeasureSet:
    """Ex-post date-grid completion of an existing MeasureSet."""
    data = fill_dates(measures.data, measures.frequency, fill, date_before, date_after)
    return measures._with_data(data)


def _match_combo(combo, parts: tuple[str, str, str]) -> bool:
    wanted = [combo] if isinstance(combo, str) else list(combo)
    return all(w in parts for w in wanted)


def _known_components(measures: MeasureSet) -> set[str]:
    return set(measures.lexicons) | set(measures.features) | set(measures.times)


def subset_measures(
    measures: MeasureSet,
    rows: Sequence[int] | slice | None = None,
    date_from: dt.date | None = None,
    date_to: dt.date | None = None,
    select=None,
    delete=None,
    conditions: Sequence[tuple] | None = None,
) -> MeasureSet:
    """Subset observations and/or series.

    ``select``/``delete`` take lists of dimension-component combinations; a
    series matches a combination when its name carries every listed
    component. ``conditions`` holds value predicates
    (series, ">"|"<", bound) or (series, "between", lo, hi), combined with
    logical AND.
    """
    data = measures.data
    if rows is not None:
        data = data.iloc[rows]
    if date_from is not None:
        data = data[data["date"] >= date_from]
    if date_to is not None:
        data = data[data["date"] <= date_to]
    for cond in conditions or ():
        series, op, *bounds = cond
        if series not in data.columns:
            raise DataError(f"unknown series {series!r} in condition")
        if op == ">":
            data = data[data[series] > bounds[0]]
        elif op == "<":
            data = data[data[series] < bounds[0]]
        elif op == "between":
            data = data[(data[series] >= bounds[0]) & (data[series] <= bounds[1])]
        else:
            raise DataError(f"unknown condition operator {op!r}")
    if select is not None and delete is not None:
        raise DataError("use either select or delete, not both")
    columns = measures.series_columns
    if select is not None or delete is not None:
        combos = select if select is not None else delete
        known = _known_components(measures)
        for combo in combos:
            for component in [combo] if isinstance(combo, str) else combo:
                if component not in known:
                    raise DataError(f"unknown dimension component {component!r}")
        matches = [
            col
            for col in columns
            if any(_match_combo(combo, parse_name(col)) for combo in combos)
        ]
        columns = matches if select is not None else [c for c in columns if c not in set(matches)]
    if not columns or data.empty:
        raise DataError("subset produced an empty measure set")
    return measures._with_data(data[["date"] + columns].reset_index(drop=True))


def scale_measures(measures: MeasureSet, center=True, scale=True) -> MeasureSet:
    """Affine transform (x - center) / scale, broadcast over the value block.

    ``center=True`` uses column means, ``scale=True`` column standard
    deviations; both also accept scalars, per-series vectors, or full
    matrices shaped like the value block.
    """
    values = measures.values()
    if center is True:
        center_arr = values.mean(axis=0)
    elif center is False or center is None:
        center_arr = 0.0
    else:
        center_arr = np.asarray(center, dtype=float)
    if scale is True:
        scale_arr = values.std(axis=0, ddof=1)
    elif scale is False or scale is None:
        scale_arr = 1.0
    else:
        scale_arr = np.asarray(scale, dtype=float)
    try:
        transformed = (values - center_arr) / scale_arr
    except ValueError as exc:
        raise DataError(f"center/scale shape mismatch: {exc}") from None
    data = measures.data.copy()
    data[measures.series_columns] = transformed
    return measures._with_data(data, keep_panel=False)


def diff_measures(measures: MeasureSet, lag: int = 1, differences: int = 1) -> MeasureSet:
    """Discrete differencing; drops the leading lag*differences rows."""
    if lag < 1 or differences < 1:
        raise DataError("lag and differences must be positive")
    values = measures.values()
    if len(values) <= lag * differences:
        raise DataError("not enough observations to difference")
    for _ in range(differences):
        values = values[lag:] - values[:-lag]
    dates = measures.dates[lag * differences :]
    data = pd.DataFrame(values, columns=measures.series_columns)
    data.insert(0, "date", dates)
    return measures._with_data(data, keep_panel=False)


def merge_dimensions(
    measures: MeasureSet,
    lexicons: Mapping[str, Sequence[str]] | None = None,
    features: Mapping[str, Sequence[str]] | None = None,
    time: Mapping[str, Sequence[str]] | None = None,
    do_keep: bool = False,
) -> MeasureSet:
    """Collapse named dimension components into group averages.

    Each grouping averages its member series across every fixed combination
    of the other two dimensions. Original member series are dropped unless
    ``do_keep``.
    """
    dims = {
        "lexicons": list(measures.lexicons),
        "features": list(measures.features),
        "time": list(measures.times),
    }
    groupings = {"lexicons": lexicons or {}, "features": features or {}, "time": time or {}}
    data = measures.data.copy()

    for dim_name, groups in groupings.items():
        for group_name, members in groups.items():
            if SEPARATOR in group_name:
                raise DataError(f"group name {group_name!r} contains the reserved separator")
            members = list(members)
            unknown = [m for m in members if m not in dims[dim_name]]
            if unknown:
                raise DataError(f"unknown {dim_name} components: {unknown}")
            axis = ("lexicons", "features", "time").index(dim_name)
            other_axes = [a for a in range(3) if a != axis]
            combos: dict[tuple, list[str]] = {}
            for col in data.columns:
                if col == "date":
                    continue
                parts = parse_name(col)
                if parts[axis] in members:
                    key = tuple(parts[a] for a in other_axes)
                    combos.setdefault(key, []).append(col)
            if not combos:
                raise DataError(f"group {group_name!r} matches no series")
            for key, cols in combos.items():
                parts = [None, None, None]
                parts[axis] = group_name
                for a, value in zip(other_axes, key):
                    parts[a] = value
                new_col = make_name(*parts)
                if new_col in data.columns:
                    raise DataError(f"merged series name {new_col!r} already exists")
                data[new_col] = data[cols].mean(axis=1)
            if not do_keep:
                drop = sorted({c for cols in combos.values() for c in cols})
                data = data.drop(columns=drop)
                dims[dim_name] = [d for d in dims[dim_name] if d not in set(members)]
            dims[dim_name] = dims[dim_name] + [group_name]

    new_lex, new_feat, new_time = dims["lexicons"], dims["features"], dims["time"]
    ordered = ["date"] + [
        make_name(l, k, b)
        for l in new_lex
        for k in new_feat
        for b in new_time
        if make_name(l, k, b) in data.columns
    ]
    data = data[ordered]
    present = _dims_from_columns([c for c in ordered if c != "date"])
    return MeasureSet(
        data,
        *present,
        frequency=measures.frequency,
        sentiment=measures.sentiment,
        config=measures.config,
        panel=None,
    )


def _dimension_weights(names: Sequence[str], weights, what: str) -> dict[str, float]:
    if weights is None:
        return {n: 1.0 for n in names}
    if isinstance(weights, Mapping):
        unknown = sorted(set(weights) - set(names))
        if unknown:
            raise DataError(f"unknown {what} in weights: {unknown}")
        return {n: float(weights.get(n, 0.0)) for n in names}
    weights = list(weights)
    if len(weights) != len(names):
        raise DataError(
            f"{what} weight vector has length {len(weights)}, expected {len(names)}"
        )
    return {n: float(w) for n, w in zip(names, weights)}


def global_measures(
    measures: MeasureSet,
    lexicon_weights=None,
    feature_weights=None,
    time_weights_in=None,
) -> pd.DataFrame:
    """Dimension-weighted global sentiment indices.

    Per dimension, every series is weighted by its component's weight and
    averaged over all P series; the overall index is the mean of the three
    dimension indices. Weights need not sum to one.
    """
    w_lex = _dimension_weights(measures.lexicons, lexicon_weights, "lexicons")
    w_feat = _dimension_weights(measures.features, feature_weights, "features")
    w_time = _dimension_weights(measures.times, time_weights_in, "time schemes")
    values = measures.values()
    p = values.shape[1]
    lex_w = np.empty(p)
    feat_w = np.empty(p)
    time_w = np.empty(p)
    for i, col in enumerate(measures.series_columns):
        l, k, b = parse_name(col)
        lex_w[i], feat_w[i], time_w[i] = w_lex[l], w_feat[k], w_time[b]
    out = pd.DataFrame({"date": measures.dates})
    out["global_lexicons"] = values @ lex_w / p
    out["global_features"] = values @ feat_w / p
    out["global_time"] = values @ time_w / p
    out["global"] = (
        out["global_lexicons"] + out["global_features"] + out["global_time"]
    ) / 3.0
    return out


def peak_dates(measures: MeasureSet, n: int, kind: str = "abs") -> list[dt.date]:
    """Dates of the n most extreme cross-series mean values."""
    if n > measures.n_obs:
        raise DataError(f"asked for {n} peak dates but only {measures.n_obs} exist")
    means = measures.data[measures.series_columns].mean(axis=1)
    if kind == "pos":
        order = means.sort_values(ascending=False, kind="stable")
    elif kind == "neg":
        order = means.sort_values(ascending=True, kind="stable")
    elif kind == "abs":
        order = means.abs().sort_values(ascending=False, kind="stable")
    else:
        raise DataError(f"unknown peak type {kind!r} (pos, neg, abs)")
    return [measures.data.loc[i, "date"] for i in order.index[:n]]


def measure_stats(measures: MeasureSet) -> pd.DataFrame:
    """Per-series mean, sd, min, max and mean pairwise correlation."""
    block = measures.data[measures.series_columns]
    stats = pd.DataFrame(
        {
            "mean": block.mean(),
            "sd": block.std(ddof=1),
            "min": block.min(),
            "max": block.max(),
        }
    ).T
    if measures.n_series > 1:
        corr = block.corr().to_numpy()
        np.fill_diagonal(corr, np.nan)
        counts = (~np.isnan(corr)).sum(axis=0)
        sums = np.nansum(corr, axis=0)
        mean_corr = np.divide(
            sums, counts, out=np.full(len(counts), np.nan), where=counts > 0
        )
        stats.loc["meanCorr"] = mean_corr
    else:
        stats.loc["meanCorr"] = np.nan
    return stats


def measures_to_long(measures: MeasureSet) -> pd.DataFrame:
    rows = []
    for col in measures.series_columns:
        l, k, b = parse_name(col)
        for date, value in zip(measures.dates, measures.data[col]):
            rows.append(
                {"date": date.isoformat(), "lexicon": l, "feature": k, "time": b, "value": value}
            )
    return pd.DataFrame(rows, columns=["date", "lexicon", "feature", "time", "value"])


def write_measures_csv(measures: MeasureSet, path: str | Path) -> None:
    frame = measures.data.copy()
    frame["date"] = [d.isoformat() for d in frame["date"]]
    frame.to_csv(path, index=False, float_format="%.12g")


def read_measures_csv(path: str | Path, frequency: str = "day") -> MeasureSet:
    """Load a wide measures CSV, re-validating the column naming."""
    frame = pd.read_csv(path)
    if "date" not in frame.columns:
        raise DataError("measures CSV lacks a date column")
    frame["date"] = [dt.date.fromisoformat(str(d)) for d in frame["date"]]
    columns = [c for c in frame.columns if c != "date"]
    if not columns:
        raise DataError("measures CSV has no series columns")
    dims = _dims_from_columns(columns)  # validates every name
    return MeasureSet(frame, *dims, frequency=frequency)
