"""Command line pipeline driven by a JSON config file.

Subcommands: validate, sentiment, measures, model, attribute, summarize.
Each one loads the declarative config, recomputes whatever upstream
artifacts it needs, and writes plot-ready CSV files. ``--set a.b=value``
overrides any config key from the command line (highest precedence).
Floats print with 12 significant digits so outputs are byte-stable.

Exit codes: 0 ok, 2 config error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
import pandas as pd

from . import aggregation as agg
from .attribution import attributions, export_attributions
from .corpus import Corpus, read_corpus_csv, read_corpus_jsonl, summarize_corpus
from .errors import ConfigError, DataError, NumericalError, SentiseriesError
from .lexicons import LexiconSet, build_lexicon_set, load_lexicon_file, load_valence_file
from .model import FittedModel, IterResults, ModelConfig, fit_model, fit_model_iter, loss_data
from .sentiment import compute_sentiment

SCHEMA_VERSION = 1
THREADS_ENV_VAR = "SENTISERIES_THREADS"
FLOAT_FORMAT = "%.12g"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


@dataclass
class PipelineConfig:
    """Parsed and path-resolved run configuration."""

    corpus_path: Path
    lexicon_paths: dict[str, Path]
    valence_path: Path | None
    target_path: Path | None
    externals_path: Path | None
    aggregation: agg.AggregationConfig
    model: ModelConfig
    do_sentence: bool
    do_normalize: bool
    summary_by: str
    output_dir: Path
    seed: int
    threads: int


def _dataclass_from_section(cls, section: dict, name: str):
    valid = {f.name for f in fields(cls)}
    unknown = sorted(set(section) - valid)
    if unknown:
        raise ConfigError(f"unknown keys in [{name}] section: {unknown}")
    coerced = {
        k: tuple(v) if isinstance(v, list) else v for k, v in section.items()
    }
    try:
        return cls(**coerced)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [{name}] section: {exc}") from None


def _apply_overrides(raw: dict, overrides: list[str]) -> dict:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key.path=value")
        key_path, value = item.split("=", 1)
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        node = raw
        parts = key_path.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path {key_path!r} crosses a non-section key")
        node[parts[-1]] = parsed
    return raw


def load_config(path: str | Path, overrides: list[str] | None = None) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    raw = _apply_overrides(raw, overrides or [])
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version} (expected {SCHEMA_VERSION})")

    data = raw.get("data", {})
    if "corpus" not in data:
        raise ConfigError("config lacks data.corpus")
    base = path.parent

    def resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    corpus_path = resolve(data["corpus"])
    lex_section = data.get("lexicons")
    if not lex_section:
        raise ConfigError("config lacks data.lexicons")
    lexicon_paths = {name: resolve(p) for name, p in lex_section.items()}
    valence_path = resolve(data["valence"]) if data.get("valence") else None
    target_path = resolve(data["target"]) if data.get("target") else None
    externals_path = resolve(data["externals"]) if data.get("externals") else None
    for label, p in [("corpus", corpus_path), *lexicon_paths.items()]:
        if not p.exists():
            raise ConfigError(f"{label} file not found: {p}")
    for p in (valence_path, target_path, externals_path):
        if p is not None and not p.exists():
            raise ConfigError(f"referenced file not found: {p}")

    run = raw.get("run", {})
    threads = run.get("threads")
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV_VAR, "1"))
    agg_section = dict(raw.get("aggregation", {}))
    agg_section.setdefault("n_jobs", threads)
    model_section = dict(raw.get("model", {}))
    try:
        agg_config = _dataclass_from_section(agg.AggregationConfig, agg_section, "aggregation")
        model_config = _dataclass_from_section(ModelConfig, model_section, "model")
    except SentiseriesError:
        raise
    sentiment_section = raw.get("sentiment", {})
    attribution_section = raw.get("attribution", {})
    output = raw.get("output", {})
    return PipelineConfig(
        corpus_path=corpus_path,
        lexicon_paths=lexicon_paths,
        valence_path=valence_path,
        target_path=target_path,
        externals_path=externals_path,
        aggregation=agg_config,
        model=model_config,
        do_sentence=bool(sentiment_section.get("do_sentence", False)),
        do_normalize=bool(attribution_section.get("do_normalize", False)),
        summary_by=raw.get("summary", {}).get("by", "month"),
        output_dir=resolve(output.get("dir", "output")),
        seed=int(run.get("seed", 0)),
        threads=int(threads),
    )


def _load_corpus(config: PipelineConfig) -> Corpus:
    if config.corpus_path.suffix == ".jsonl":
        return read_corpus_jsonl(config.corpus_path)
    return read_corpus_csv(config.corpus_path)


def _load_lexicons(config: PipelineConfig) -> LexiconSet:
    lexicons = {
        name: load_lexicon_file(path, name=name).entries
        for name, path in config.lexicon_paths.items()
    }
    valence = load_valence_file(config.valence_path) if config.valence_path else None
    return build_lexicon_set(lexicons, valence=valence)


def _load_dated_table(path: Path, what: str) -> pd.DataFrame:
    frame = pd.read_csv(path)
    if "date" not in frame.columns:
        raise DataError(f"{what} file {path} lacks a date column")
    frame["date"] = [dt.date.fromisoformat(str(d)) for d in frame["date"]]
    return frame


def _align_to_dates(frame: pd.DataFrame, dates: list[dt.date], what: str) -> pd.DataFrame:
    indexed = frame.set_index("date")
    missing = [d for d in dates if d not in indexed.index]
    if missing:
        raise DataError(f"{what} lacks values for dates {missing[:3]} (and possibly more)")
    return indexed.loc[dates].reset_index(drop=True)


def _write_csv(frame: pd.DataFrame, path: Path, index: bool = False) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=index, float_format=FLOAT_FORMAT, lineterminator="\n")
    print(f"wrote {path}")


def _stringify_dates(frame: pd.DataFrame) -> pd.DataFrame:
    out = frame.copy()
    if "date" in out.columns:
        out["date"] = [d.isoformat() if isinstance(d, dt.date) else d for d in out["date"]]
    return out


def cmd_validate(config: PipelineConfig) -> int:
    corpus = _load_corpus(config)
    lexicons = _load_lexicons(config)
    dates = [rec.date for rec in corpus.records]
    print(f"corpus: {len(corpus)} documents, {config.corpus_path}")
    print(f"dates: {min(dates).isoformat()} .. {max(dates).isoformat()}")
    print(f"features ({len(corpus.feature_names)}): {', '.join(corpus.feature_names)}")
    for lex in lexicons.lexicons:
        print(f"lexicon {lex.name}: {len(lex)} entries")
    print(f"valence mode: {lexicons.mode}")
    print(f"aggregation: {config.aggregation}")
    print(f"model: {config.model}")
    if config.target_path:
        target = _load_dated_table(config.target_path, "target")
        print(f"target: {len(target)} rows, columns {list(target.columns)}")
    print("config ok")
    return EXIT_OK


def cmd_sentiment(config: PipelineConfig) -> int:
    corpus = _load_corpus(config)
    lexicons = _load_lexicons(config)
    table = compute_sentiment(
        corpus,
        lexicons,
        how=config.aggregation.how_within,
        do_sentence=config.do_sentence,
        n_jobs=config.threads,
    )
    _write_csv(_stringify_dates(table.data), config.output_dir / "sentiment.csv")
    return EXIT_OK


def _build_measures(config: PipelineConfig) -> agg.MeasureSet:
    corpus = _load_corpus(config)
    lexicons = _load_lexicons(config)
    return agg.build_measures(corpus, lexicons, config.aggregation)


def cmd_measures(config: PipelineConfig) -> int:
    measures = _build_measures(config)
    _write_csv(_stringify_dates(measures.data), config.output_dir / "measures.csv")
    _write_csv(agg.measures_to_long(measures), config.output_dir / "measures_long.csv")
    stats = measures.stats.reset_index().rename(columns={"index": "stat"})
    _write_csv(stats, config.output_dir / "measures_stats.csv")
    return EXIT_OK


def _fit_from_config(config: PipelineConfig):
    if config.target_path is None:
        raise ConfigError("model commands need data.target in the config")
    measures = _build_measures(config)
    target = _load_dated_table(config.target_path, "target")
    if target.shape[1] != 2:
        raise DataError("target file must have exactly the columns date,value")
    target_aligned = _align_to_dates(target, measures.dates, "target")
    y = target_aligned.iloc[:, 0].to_numpy(dtype=float)
    x = None
    if config.externals_path is not None:
        externals = _load_dated_table(config.externals_path, "externals")
        x = _align_to_dates(externals, measures.dates, "externals")
    if config.model.do_iter:
        result = fit_model_iter(measures, y, x=x, config=config.model)
    else:
        result = fit_model(measures, y, x=x, config=config.model)
    return measures, x, result


def cmd_model(config: PipelineConfig) -> int:
    _, _, result = _fit_from_config(config)
    out = config.output_dir
    if isinstance(result, IterResults):
        last = result.models[-1]
        coef = pd.DataFrame(
            {"name": list(last.coef.index), "coefficient": last.coef.to_numpy()}
        )
        _write_csv(coef, out / "coefficients.csv")
        perf = pd.DataFrame([result.performance])
        _write_csv(perf, out / "performance.csv")
        _write_csv(_stringify_dates(result.predictions), out / "predictions.csv")
        losses = loss_data([result], metric="squared").reset_index()
        _write_csv(_stringify_dates(losses), out / "loss_squared.csv")
        print(
            f"iterations: {result.n_iterations}, "
            f"rmse: {result.performance['rmse']:.6g}, "
            f"mda: {result.performance['mda']:.6g}"
        )
    else:
        coef = pd.DataFrame(
            {"name": list(result.coef.index), "coefficient": result.coef.to_numpy()}
        )
        coef.loc[len(coef)] = ["(intercept)", result.intercept]
        _write_csv(coef, out / "coefficients.csv")
        _write_csv(result.trace, out / "calibration_trace.csv")
        if result.discarded:
            _write_csv(pd.DataFrame({"discarded": result.discarded}), out / "discarded.csv")
        print(f"alpha: {result.alpha:.6g}, lambda: {result.lam:.6g}")
    return EXIT_OK


def cmd_attribute(config: PipelineConfig) -> int:
    measures, x, result = _fit_from_config(config)
    attr = attributions(result, measures, x=x, do_normalize=config.do_normalize)
    _write_csv(export_attributions(attr), config.output_dir / "attributions.csv")
    return EXIT_OK


def cmd_summarize(config: PipelineConfig) -> int:
    corpus = _load_corpus(config)
    summary = summarize_corpus(corpus, by=config.summary_by)
    _write_csv(summary, config.output_dir / "corpus_summary.csv")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "sentiment": cmd_sentiment,
    "measures": cmd_measures,
    "model": cmd_model,
    "attribute": cmd_attribute,
    "summarize": cmd_summarize,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sentiseries",
        description="Sentiment time series pipeline: score, aggregate, model, attribute.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        p = sub.add_parser(name, help=func.__doc__)
        p.add_argument("--config", required=True, help="path to the JSON config file")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY.PATH=VALUE",
            help="override a config key (JSON-parsed value), e.g. --set aggregation.lag=5",
        )
        p.add_argument("--output-dir", help="shorthand for --set output.dir=...")
        p.add_argument("--threads", type=int, help="shorthand for --set run.threads=N")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    if args.output_dir:
        overrides.append(f"output.dir={args.output_dir}")
    if args.threads is not None:
        overrides.append(f"run.threads={args.threads}")
    try:
        config = load_config(args.config, overrides)
        np.random.seed(config.seed)
        return COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
