"""Loaders for external lexical resources and a count-based language model.

All lookups are case-insensitive (keys are lowercased). Loaded objects are
immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataFormatError
from .textproc import TokenizedText

__all__ = [
    "FrequencyTable",
    "ConcretenessLexicon",
    "WordVectors",
    "NgramLanguageModel",
    "load_frequency_table",
    "load_concreteness",
    "load_vectors",
    "train_lm",
    "token_logprobs",
    "Resources",
]

BOS = "<s>"
UNK = "<unk>"


@dataclass(frozen=True)
class FrequencyTable:
    """Words ranked by descending corpus frequency; rank is 1-based.

    Unlisted words rank one past the end of the table.
    """

    ranked_words: tuple[str, ...]
    rank_of_map: dict[str, int] = field(repr=False)

    def rank_of(self, word: str) -> int:
        return self.rank_of_map.get(word.lower(), len(self.ranked_words) + 1)

    def __len__(self) -> int:
        return len(self.ranked_words)


def load_frequency_table(path: str | Path) -> FrequencyTable:
    """Load a frequency table: one word per line, most frequent first,
    optionally followed by a tab and a count. Duplicates keep their first
    (highest) rank."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot read frequency table {path}: {exc}") from exc
    words: list[str] = []
    rank_of: dict[str, int] = {}
    for line in text.splitlines():
        word = line.split("\t", 1)[0].strip().lower()
        if not word:
            continue
        if word not in rank_of:
            rank_of[word] = len(words) + 1
            words.append(word)
    if not words:
        raise DataFormatError(f"frequency table {path} contains no words")
    return FrequencyTable(ranked_words=tuple(words), rank_of_map=rank_of)


@dataclass(frozen=True)
class ConcretenessLexicon:
    """Word -> concreteness rating on the published 1-5 scale."""

    ratings: dict[str, float] = field(repr=False)

    def rating_of(self, word: str) -> float | None:
        return self.ratings.get(word.lower())

    def __len__(self) -> int:
        return len(self.ratings)


def load_concreteness(path: str | Path, word_column: str = "Word",
                      rating_column: str = "Conc.M",
                      delimiter: str | None = None) -> ConcretenessLexicon:
    """Load a concreteness lexicon from a delimited file with a header.

    The delimiter is sniffed from the header line (tab, comma or
    semicolon) unless given. Ratings must lie in [1, 5].
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot read concreteness file {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise DataFormatError(f"concreteness file {path} is empty")
    if delimiter is None:
        header = lines[0]
        delimiter = max("\t,;", key=header.count)
    reader = csv.DictReader(lines, delimiter=delimiter)
    fields = reader.fieldnames or []
    for col in (word_column, rating_column):
        if col not in fields:
            raise DataFormatError(
                f"concreteness file {path} is missing column {col!r} "
                f"(found {fields})"
            )
    ratings: dict[str, float] = {}
    for lineno, row in enumerate(reader, start=2):
        word = (row[word_column] or "").strip().lower()
        raw = (row[rating_column] or "").strip()
        if not word:
            continue
        try:
            value = float(raw)
        except ValueError as exc:
            raise DataFormatError(
                f"{path}:{lineno}: rating {raw!r} is not a number"
            ) from exc
        if not 1.0 <= value <= 5.0:
            raise DataFormatError(
                f"{path}:{lineno}: rating {value} outside the 1-5 scale"
            )
        ratings.setdefault(word, value)
    return ConcretenessLexicon(ratings=ratings)


@dataclass(frozen=True)
class WordVectors:
    """Word embedding table with a fixed dimensionality."""

    dim: int
    vectors: dict[str, tuple[float, ...]] = field(repr=False)

    def vector_of(self, word: str) -> tuple[float, ...] | None:
        return self.vectors.get(word.lower())

    def __len__(self) -> int:
        return len(self.vectors)


def load_vectors(path: str | Path) -> WordVectors:
    """Load word vectors in the standard text format: an optional
    "count dim" header line, then one "word v1 ... vdim" line per word.
    The dimensionality is inferred from the first data line."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataFormatError(f"cannot read vector file {path}: {exc}") from exc
    start = 0
    if lines:
        head = lines[0].split()
        if len(head) == 2 and all(p.lstrip("+-").isdigit() for p in head):
            start = 1
    dim = None
    vectors: dict[str, tuple[float, ...]] = {}
    for lineno, line in enumerate(lines[start:], start=start + 1):
        parts = line.split()
        if not parts:
            continue
        word = parts[0].lower()
        try:
            values = tuple(float(p) for p in parts[1:])
        except ValueError as exc:
            raise DataFormatError(
                f"{path}:{lineno}: non-numeric vector component"
            ) from exc
        if dim is None:
            dim = len(values)
            if dim == 0:
                raise DataFormatError(
                    f"{path}:{lineno}: first data line has no vector values"
                )
        elif len(values) != dim:
            raise DataFormatError(
                f"{path}:{lineno}: expected {dim} values, found {len(values)}"
            )
        vectors.setdefault(word, values)
    if dim is None:
        raise DataFormatError(f"vector file {path} contains no vectors")
    return WordVectors(dim=dim, vectors=vectors)


# ---------------------------------------------------------------------------
# n-gram language model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NgramLanguageModel:
    """Interpolated add-k n-gram model over a closed vocabulary plus <unk>.

    Training words seen only once are mapped to <unk>. Contexts are padded
    with <s>, which is never predicted, so conditional probabilities over
    vocabulary + <unk> sum to one for every context and order.
    """

    order: int
    add_k: float
    vocab: frozenset[str]
    context_counts: tuple[dict, ...] = field(repr=False)  # per order 1..n
    continuation_counts: tuple[dict, ...] = field(repr=False)

    @property
    def event_count(self) -> int:
        """Size of the predicted event space (vocabulary plus <unk>)."""
        return len(self.vocab) + 1

    def _map(self, word: str) -> str:
        w = word.lower()
        return w if w in self.vocab else UNK

    def prob(self, word: str, context: tuple[str, ...]) -> float:
        """Interpolated conditional probability with uniform order weights."""
        w = self._map(word)
        ctx = tuple(
            c if c == BOS else self._map(c) for c in context
        )[-(self.order - 1):] if self.order > 1 else ()
        total = 0.0
        for n in range(1, self.order + 1):
            h = ctx[len(ctx) - (n - 1):] if n > 1 else ()
            num = self.continuation_counts[n - 1].get(h + (w,), 0)
            den = self.context_counts[n - 1].get(h, 0)
            total += (num + self.add_k) / (den + self.add_k * self.event_count)
        return total / self.order


def train_lm(corpus: str | Path, order: int = 3,
             add_k: float = 0.1) -> NgramLanguageModel:
    """Train an interpolated add-k n-gram model on a plain-text corpus,
    one sentence per line, whitespace tokenized and lowercased."""
    if order < 2:
        raise ValueError(f"model order must be >= 2, got {order}")
    path = Path(corpus)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot read corpus {path}: {exc}") from exc
    sentences = [line.split() for line in text.splitlines() if line.split()]
    if not sentences:
        raise DataFormatError(f"corpus {path} contains no sentences")

    word_counts = Counter(w.lower() for sent in sentences for w in sent)
    vocab = frozenset(w for w, c in word_counts.items() if c >= 2)

    def map_word(w: str) -> str:
        lw = w.lower()
        return lw if lw in vocab else UNK

    context_counts: list[dict] = [Counter() for _ in range(order)]
    continuation_counts: list[dict] = [Counter() for _ in range(order)]
    for sent in sentences:
        mapped = [map_word(w) for w in sent]
        padded = [BOS] * (order - 1) + mapped
        for i in range(order - 1, len(padded)):
            w = padded[i]
            for n in range(1, order + 1):
                h = tuple(padded[i - (n - 1): i])
                context_counts[n - 1][h] += 1
                continuation_counts[n - 1][h + (w,)] += 1

    return NgramLanguageModel(
        order=order,
        add_k=add_k,
        vocab=vocab,
        context_counts=tuple(dict(c) for c in context_counts),
        continuation_counts=tuple(dict(c) for c in continuation_counts),
    )


def token_logprobs(model: NgramLanguageModel,
                   text: TokenizedText) -> list[float]:
    """Natural-log conditional probability of every word token, with
    sentence-initial contexts padded by <s>."""
    out: list[float] = []
    for sent in text.sentences:
        history: list[str] = [BOS] * (model.order - 1)
        for w in sent:
            out.append(math.log(model.prob(w, tuple(history))))
            history.append(w.lower())
    return out


@dataclass(frozen=True)
class Resources:
    """Bundle of optional resources consumed by feature computation."""

    freq_table: FrequencyTable | None = None
    concreteness: ConcretenessLexicon | None = None
    vectors: WordVectors | None = None
    lm: NgramLanguageModel | None = None

    def has(self, kind: str) -> bool:
        return getattr(self, kind, None) is not None


EMPTY_RESOURCES = Resources()
