"""Linear decomposition of predictions into sentiment contributions.

Because every aggregation step is a weighted sum, a prediction
delta + sum_p beta_p * s_u^p splits exactly along any dimension: lexicons,
features, time schemes, lag positions, or the individual documents behind
each lag window (chaining the across-document weights, including the
ignore-zeros renormalization). The per-dimension sums plus the intercept
and any external-regressor contributions reproduce the prediction.

Attribution needs measures straight out of the aggregation pipeline (row
or series subsets are fine); value-changing manipulations (scale, diff,
dimension merges) break the chain and are rejected.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from .aggregation import MeasureSet, parse_name
from .corpus import period_label
from .errors import DataError
from .lexicons import SEPARATOR
from .model import FittedModel, IterResults
from .weights import combine_weights

FILL_DOC_ID = "(fill)"


@dataclass
class Attributions:
    """Dated attribution tables, one per decomposition dimension.

    ``externals`` carries the intercept plus per-variable contributions of
    any external regressors, so that for every dimension table the row sum
    plus the externals row reproduces the prediction.
    """

    lexicons: pd.DataFrame
    features: pd.DataFrame
    time: pd.DataFrame
    lags: pd.DataFrame
    documents: pd.DataFrame  # long format: date, id, value
    externals: pd.DataFrame
    normalized: bool


class _PipelineContext:
    """Reconstructed aggregation internals shared by all requested dates."""

    def __init__(self, measures: MeasureSet):
        if measures.panel is None or measures.config is None or measures.sentiment is None:
            raise DataError(
                "attribution needs measures from the aggregation pipeline "
                "(scaled, differenced, or merged measures cannot be attributed)"
            )
        self.measures = measures
        self.config = measures.config
        self.panel = measures.panel
        self.panel_dates: list[dt.date] = list(self.panel["date"])
        self.panel_index = {d: i for i, d in enumerate(self.panel_dates)}
        self.schemes = self.config.time_weight_map()
        self.lag = self.config.lag
        sent = measures.sentiment.data
        self.doc_groups: dict[dt.date, list[int]] = {}
        for idx, date in enumerate(sent["date"]):
            self.doc_groups.setdefault(period_label(date, self.config.by), []).append(idx)
        self.sent = sent
        self._term_cache: dict[tuple[dt.date, str], tuple[list[str], np.ndarray]] = {}

    def window(self, date: dt.date) -> list[int]:
        if date not in self.panel_index:
            raise DataError(f"date {date} not covered by the measure panel")
        end = self.panel_index[date]
        if end - self.lag + 1 < 0:
            raise DataError(f"date {date} lacks a full lag window")
        return list(range(end - self.lag + 1, end + 1))

    def document_terms(self, period: dt.date, column: str) -> tuple[list[str], np.ndarray]:
        """Per-document theta * score terms whose sum is the panel value."""
        key = (period, column)
        if key in self._term_cache:
            return self._term_cache[key]
        idxs = self.doc_groups.get(period)
        if not idxs:
            result: tuple[list[str], np.ndarray] = ([], np.empty(0))
        else:
            values = self.sent[column].to_numpy(dtype=float)[idxs]
            counts = self.sent["word_count"].to_numpy(dtype=float)[idxs]
            theta = combine_weights(
                values,
                counts,
                self.config.how_docs,
                self.config.do_ignore_zeros,
                self.config.alpha_exp_docs,
            )
            ids = self.sent["id"].to_numpy()[idxs]
            result = (list(ids), theta * values)
        self._term_cache[key] = result
        return result


def _measure_coefficients(model: FittedModel) -> tuple[pd.Series, pd.Series]:
    meas = model.coef.iloc[: model.n_measures]
    ext = model.coef.iloc[model.n_measures :]
    return meas, ext


def _normalize_rows(frame: pd.DataFrame, value_cols: Sequence[str]) -> pd.DataFrame:
    out = frame.copy()
    block = out[list(value_cols)].to_numpy(dtype=float)
    norms = np.linalg.norm(block, axis=1)
    norms[norms == 0.0] = 1.0
    out[list(value_cols)] = block / norms[:, None]
    return out


def attributions(
    model: FittedModel | IterResults,
    measures: MeasureSet,
    x: pd.DataFrame | None = None,
    ref_dates: Sequence[dt.date] | None = None,
    do_normalize: bool = False,
) -> Attributions:
    """Decompose predictions at the given dates along every dimension.

    For a one-shot model the default dates are all in-sample dates; for
    iterative results they are the out-of-sample prediction dates, each
    decomposed with its own iteration's coefficients. ``x`` supplies the
    external-regressor rows (aligned with the measure rows) when the model
    used any. ``do_normalize`` rescales each date's attribution vector to
    unit Euclidean norm, per dimension.
    """
    ctx = _PipelineContext(measures)
    if isinstance(model, IterResults):
        date_models = {
            row["date"]: model.models[i]
            for i, row in model.predictions.reset_index(drop=True).iterrows()
        }
        default_dates = list(model.predictions["date"])
    else:
        date_models = None
        default_dates = list(model.dates)
    dates = list(ref_dates) if ref_dates is not None else default_dates
    unknown = [d for d in dates if date_models is not None and d not in date_models]
    if unknown:
        raise DataError(f"dates without an out-of-sample prediction: {unknown[:3]}")

    x_by_date: Mapping[dt.date, pd.Series] | None = None
    if x is not None:
        x = pd.DataFrame(x).reset_index(drop=True)
        if len(x) != measures.n_obs:
            raise DataError("external regressors must align with the measure rows")
        x_by_date = {d: x.iloc[i] for i, d in enumerate(measures.dates)}

    lex_rows, feat_rows, time_rows, lag_rows, doc_rows, ext_rows = [], [], [], [], [], []
    measure_values = measures.data.set_index("date")

    for date in dates:
        current = date_models[date] if date_models is not None else model
        coef_meas, coef_ext = _measure_coefficients(current)
        if len(coef_ext) and x_by_date is None:
            raise DataError("the model uses external regressors; pass their values via x")

        lex_row = {name: 0.0 for name in measures.lexicons}
        feat_row = {name: 0.0 for name in measures.features}
        time_row = {name: 0.0 for name in measures.times}
        lag_vals = np.zeros(ctx.lag)
        window = ctx.window(date)
        doc_acc: dict[str, float] = {}

        for name, beta in coef_meas.items():
            if name not in measure_values.columns:
                raise DataError(f"model coefficient {name!r} is not a measure column")
            lex, feat, scheme = parse_name(name)
            value = float(measure_values.at[date, name])
            contribution = beta * value
            lex_row[lex] += contribution
            feat_row[feat] += contribution
            time_row[scheme] += contribution
            if beta == 0.0:
                continue
            w = ctx.schemes[scheme]
            panel_col = f"{lex}{SEPARATOR}{feat}"
            panel_values = ctx.panel[panel_col].to_numpy(dtype=float)
            for pos, grid_idx in enumerate(window):
                piece = beta * w[pos] * panel_values[grid_idx]
                # lag 1 is the current date, lag `lag` the window's oldest
                lag_vals[ctx.lag - 1 - pos] += piece
                if w[pos] == 0.0:
                    continue
                period = ctx.panel_dates[grid_idx]
                ids, terms = ctx.document_terms(period, panel_col)
                if len(ids) == 0:
                    if panel_values[grid_idx] != 0.0:
                        doc_acc[FILL_DOC_ID] = doc_acc.get(FILL_DOC_ID, 0.0) + piece
                    continue
                for doc_id, term in zip(ids, terms):
                    if term != 0.0:
                        doc_acc[doc_id] = doc_acc.get(doc_id, 0.0) + beta * w[pos] * term

        lex_rows.append({"date": date, **lex_row})
        feat_rows.append({"date": date, **feat_row})
        time_rows.append({"date": date, **time_row})
        lag_rows.append(
            {"date": date, **{f"lag{i + 1}": lag_vals[i] for i in range(ctx.lag)}}
        )
        for doc_id, value in doc_acc.items():
            doc_rows.append({"date": date, "id": doc_id, "value": value})
        if len(coef_ext):
            row = {"date": date, "intercept": current.intercept}
            x_row = x_by_date[date]
            for name, gamma in coef_ext.items():
                row[name] = gamma * float(x_row[name])
            ext_rows.append(row)
        else:
            ext_rows.append({"date": date, "intercept": current.intercept})

    lag_cols = [f"lag{i + 1}" for i in range(ctx.lag)]
    out = Attributions(
        lexicons=pd.DataFrame(lex_rows, columns=["date"] + measures.lexicons),
        features=pd.DataFrame(feat_rows, columns=["date"] + measures.features),
        time=pd.DataFrame(time_rows, columns=["date"] + measures.times),
        lags=pd.DataFrame(lag_rows, columns=["date"] + lag_cols),
        documents=pd.DataFrame(doc_rows, columns=["date", "id", "value"]),
        externals=pd.DataFrame(ext_rows),
        normalized=do_normalize,
    )
    if do_normalize:
        out.lexicons = _normalize_rows(out.lexicons, measures.lexicons)
        out.features = _normalize_rows(out.features, measures.features)
        out.time = _normalize_rows(out.time, measures.times)
        out.lags = _normalize_rows(out.lags, lag_cols)
        docs = out.documents.copy()
        if not docs.empty:
            norms = docs.groupby("date")["value"].transform(lambda v: np.linalg.norm(v) or 1.0)
            docs["value"] = docs["value"] / norms
        out.documents = docs
    return out


def export_attributions(attr: Attributions) -> pd.DataFrame:
    """Plot-ready long format: (date, dimension, component, value)."""
    rows = []
    for dim_name, frame in (
        ("lexicons", attr.lexicons),
        ("features", attr.features),
        ("time", attr.time),
        ("lags", attr.lags),
    ):
        for _, row in frame.iterrows():
            for col in frame.columns:
                if col == "date":
                    continue
                rows.append(
                    {
                        "date": row["date"].isoformat(),
                        "dimension": dim_name,
                        "component": col,
                        "value": row[col],
                    }
                )
    for _, row in attr.documents.iterrows():
        rows.append(
            {
                "date": row["date"].isoformat(),
                "dimension": "documents",
                "component": row["id"],
                "value": row["value"],
            }
        )
    if attr.externals is not None:
        for _, row in attr.externals.iterrows():
            for col in attr.externals.columns:
                if col == "date":
                    continue
                rows.append(
                    {
                        "date": row["date"].isoformat(),
                        "dimension": "externals",
                        "component": col,
                        "value": row[col],
                    }
                )
    return pd.DataFrame(rows, columns=["date", "dimension", "component", "value"])
