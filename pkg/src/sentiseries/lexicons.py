"""Lexicons and valence-shifter tables.

A lexicon maps lowercase unigrams to real-valued polarity scores. A valence
table either maps words to numeric shift values (bigram mode) or to shifter
type codes (cluster mode): 1 = negator, 2 = amplifier, 3 = deamplifier,
4 = adversative conjunction. The valence mode selects the scoring
algorithm used by the sentiment engine.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DataError

NEGATOR, AMPLIFIER, DEAMPLIFIER, ADVERSATIVE = 1, 2, 3, 4
_VALID_TYPES = {NEGATOR, AMPLIFIER, DEAMPLIFIER, ADVERSATIVE}

# feature and dimension names are joined with this token in column names
SEPARATOR = "--"


def _normalize_entries(
    entries: Iterable[tuple[str, float]], origin: str
) -> dict[str, float]:
    """Casefold, keep unigrams only, deduplicate keeping the first score."""
    out: dict[str, float] = {}
    dropped_dupes = []
    for word, score in entries:
        word = str(word).casefold().strip()
        if not word or any(ch.isspace() for ch in word):
            continue  # only unigrams are kept
        try:
            value = float(score)
        except (TypeError, ValueError):
            raise DataError(f"non-numeric score {score!r} for word {word!r} in {origin}")
        if word in out:
            if out[word] != value:
                dropped_dupes.append(word)
            continue
        out[word] = value
    if dropped_dupes:
        warnings.warn(
            f"{origin}: duplicate words with conflicting scores, kept first "
            f"occurrence: {sorted(set(dropped_dupes))[:5]}",
            stacklevel=3,
        )
    return out


@dataclass(frozen=True)
class Lexicon:
    """One named polarity word list."""

    name: str
    entries: Mapping[str, float]

    @staticmethod
    def build(name: str, entries) -> "Lexicon":
        pairs = _as_pairs(entries)
        normalized = _normalize_entries(pairs, origin=f"lexicon {name!r}")
        if not normalized:
            raise DataError(f"lexicon {name!r} is empty after normalization")
        return Lexicon(name=name, entries=normalized)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ValenceTable:
    """Valence shifters, in bigram (shift value) or cluster (type code) mode."""

    mode: str  # "bigram" | "cluster"
    entries: Mapping[str, float]

    @staticmethod
    def build(entries, mode: str) -> "ValenceTable":
        if mode not in ("bigram", "cluster"):
            raise DataError(f"valence mode must be 'bigram' or 'cluster', got {mode!r}")
        pairs = _as_pairs(entries)
        normalized = _normalize_entries(pairs, origin=f"valence table ({mode})")
        if not normalized:
            raise DataError("valence table is empty after normalization")
        if mode == "cluster":
            bad = {w: v for w, v in normalized.items() if v not in _VALID_TYPES}
            if bad:
                raise DataError(f"invalid valence type codes (must be 1-4): {bad}")
        return ValenceTable(mode=mode, entries=normalized)

    def type_of(self, word: str) -> int | None:
        value = self.entries.get(word)
        return None if value is None else int(value)


@dataclass(frozen=True)
class LexiconSet:
    """Ordered collection of lexicons plus an optional valence table."""

    lexicons: tuple[Lexicon, ...]
    valence: ValenceTable | None = None

    @property
    def names(self) -> list[str]:
        return [lex.name for lex in self.lexicons]

    @property
    def mode(self) -> str:
        """Scoring algorithm implied by the valence table: unigram | bigram | cluster."""
        return "unigram" if self.valence is None else self.valence.mode

    def __len__(self) -> int:
        return len(self.lexicons)


def _as_pairs(entries) -> list[tuple[str, float]]:
    """Accept dicts, (word, score) iterables, or two-column DataFrames."""
    if hasattr(entries, "columns"):  # pandas DataFrame
        cols = list(entries.columns)
        if len(cols) < 2:
            raise DataError("lexicon tables need a word column and a score column")
        return list(zip(entries[cols[0]], entries[cols[1]]))
    if isinstance(entries, Mapping):
        return list(entries.items())
    return [(w, s) for w, s in entries]


def build_lexicon_set(
    lexicons: Mapping[str, object],
    valence=None,
    valence_mode: str | None = None,
) -> LexiconSet:
    """Assemble a validated LexiconSet.

    ``lexicons`` maps names to word/score tables. ``valence`` is an optional
    shifter table; its mode follows ``valence_mode`` when given, else the
    second column name of a DataFrame ("v" -> bigram, "t" -> cluster).
    """
    if not lexicons:
        raise DataError("at least one lexicon is required")
    seen = set()
    built = []
    for name, table in lexicons.items():
        if SEPARATOR in name:
            raise DataError(f"lexicon name {name!r} contains the reserved separator")
        if name in seen:
            raise DataError(f"duplicate lexicon name {name!r}")
        seen.add(name)
        built.append(Lexicon.build(name, table))
    val = None
    if valence is not None:
        val = _build_valence(valence, valence_mode)
    return LexiconSet(lexicons=tuple(built), valence=val)


def _build_valence(valence, valence_mode: str | None) -> ValenceTable:
    if isinstance(valence, ValenceTable):
        return valence
    if hasattr(valence, "columns"):
        cols = [str(c) for c in valence.columns]
        has_v, has_t = "v" in cols, "t" in cols
        if has_v and has_t:
            raise DataError("valence table carries both 'v' and 't' columns; pick one")
        if valence_mode is None:
            if has_t:
                valence_mode = "cluster"
            elif has_v:
                valence_mode = "bigram"
            else:
                raise DataError("valence table needs a 'v' (shift) or 't' (type) column")
        value_col = "t" if valence_mode == "cluster" else "v"
        if value_col not in cols:
            raise DataError(f"valence table lacks the {value_col!r} column")
        pairs = list(zip(valence[cols[0]], valence[value_col]))
        return ValenceTable.build(pairs, mode=valence_mode)
    if valence_mode is None:
        raise DataError("valence_mode is required for non-tabular valence input")
    return ValenceTable.build(valence, mode=valence_mode)


def load_lexicon_file(path: str | Path, name: str | None = None) -> Lexicon:
    """Load a two-column ``word,score`` CSV as one lexicon."""
    path = Path(path)
    rows = _read_csv_rows(path, expected=2)
    if not rows:
        raise DataError(f"empty lexicon file: {path}")
    return Lexicon.build(name or path.stem, rows)


def load_valence_file(path: str | Path) -> ValenceTable:
    """Load a valence CSV with header ``word,v`` (bigram) or ``word,t`` (cluster)."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"empty valence file: {path}") from None
        if len(header) < 2 or header[1].strip() not in ("v", "t"):
            raise DataError(f"{path}: second column must be named 'v' or 't'")
        mode = "cluster" if header[1].strip() == "t" else "bigram"
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            rows.append((row[0], row[1]))
    if not rows:
        raise DataError(f"empty valence file: {path}")
    return ValenceTable.build(rows, mode=mode)


def builtin_lexicon(name: str) -> Lexicon:
    """One of the small word lists shipped with the package (general, finance)."""
    path = Path(__file__).parent / "data" / f"{name}.csv"
    if not path.exists():
        raise DataError(f"no builtin lexicon named {name!r}")
    return load_lexicon_file(path, name=name.upper())


def builtin_valence(mode: str) -> ValenceTable:
    """The shipped valence-shifter table in bigram or cluster mode."""
    if mode not in ("bigram", "cluster"):
        raise DataError(f"valence mode must be 'bigram' or 'cluster', got {mode!r}")
    return load_valence_file(Path(__file__).parent / "data" / f"valence_{mode}.csv")


def _read_csv_rows(path: Path, expected: int) -> list[tuple[str, str]]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != expected:
                raise DataError(f"{path}:{lineno}: expected {expected} columns, got {len(row)}")
            if lineno == 1:
                try:
                    float(row[1])
                except ValueError:
                    continue  # header row
            rows.append((row[0], row[1]))
    return rows
