"""Unigram tokenization and sentence segmentation.

Tokens are case-folded Unicode word sequences with punctuation and purely
numeric tokens stripped. Sentences split on ``.``, ``!`` or ``?`` followed
by whitespace or end of text; abbreviations are not special-cased. Comma
boundaries are tracked in sentence mode because the sentence-level cluster
scorer limits its context windows at commas.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

# \w minus underscore, so "_" never survives inside a token
_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)
_WORD_OR_COMMA_RE = re.compile(r"[^\W_]+|,", re.UNICODE)
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])[.!?]*\s+")


@dataclass(frozen=True)
class TokenizedDocument:
    """Token stream of one document.

    ``sentences`` holds half-open [start, stop) index spans partitioning
    ``tokens``; it is None for document-level tokenization. ``comma_breaks``
    holds token indices i such that a comma occurs immediately before token
    i (segment boundaries used by the sentence-level cluster scorer).
    """

    tokens: tuple[str, ...]
    sentences: tuple[tuple[int, int], ...] | None = None
    comma_breaks: frozenset[int] = field(default_factory=frozenset)

    @property
    def word_count(self) -> int:
        return len(self.tokens)


def _filter_token(tok: str) -> str | None:
    tok = tok.casefold()
    if tok.isnumeric():  # covers digits plus numeric forms like superscripts
        return None
    return tok


def tokenize(text: str) -> TokenizedDocument:
    """Tokenize a document into lowercase unigrams."""
    tokens = []
    for m in _WORD_RE.finditer(text):
        tok = _filter_token(m.group())
        if tok is not None:
            tokens.append(tok)
    return TokenizedDocument(tokens=tuple(tokens))


def split_sentences(text: str) -> list[str]:
    """Split raw text on sentence-ending punctuation followed by whitespace."""
    parts = [p for p in _SENTENCE_SPLIT_RE.split(text) if p.strip()]
    return parts


def tokenize_sentences(text: str) -> TokenizedDocument:
    """Tokenize with sentence spans and comma boundary positions."""
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    breaks: set[int] = set()
    for sentence in split_sentences(text):
        start = len(tokens)
        for m in _WORD_OR_COMMA_RE.finditer(sentence):
            raw = m.group()
            if raw == ",":
                if len(tokens) > start:  # comma before any token is a no-op
                    breaks.add(len(tokens))
                continue
            tok = _filter_token(raw)
            if tok is not None:
                tokens.append(tok)
        if len(tokens) > start:
            spans.append((start, len(tokens)))
    return TokenizedDocument(
        tokens=tuple(tokens), sentences=tuple(spans), comma_breaks=frozenset(breaks)
    )


def from_pretokenized(
    units: list[list[str]] | list[str], sentence_level: bool
) -> TokenizedDocument:
    """Wrap caller-supplied tokens (already cleaned) for one document.

    Document-level input is a flat token list; sentence-level input is a
    list of per-sentence token lists. No filtering is applied: callers own
    their tokenization (e.g. for stemmed workflows).
    """
    if sentence_level:
        tokens: list[str] = []
        spans = []
        for sent in units:
            if isinstance(sent, str):
                raise TypeError("sentence-level token input must be a list of token lists")
            start = len(tokens)
            tokens.extend(sent)
            if len(tokens) > start:
                spans.append((start, len(tokens)))
        return TokenizedDocument(tokens=tuple(tokens), sentences=tuple(spans))
    if any(not isinstance(t, str) for t in units):
        raise TypeError("document-level token input must be a flat list of strings")
    return TokenizedDocument(tokens=tuple(units))
