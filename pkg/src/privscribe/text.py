"""Tokenization, vocabulary estimation, TF-IDF and word histograms."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyTranscriptError, VocabMismatchError
from .porter import stem as porter_stem

_WORD_RE = re.compile(r"[a-z0-9']+")


def _read_word_list(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            out.append(line)
    return out


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    data = resources.files("privscribe").joinpath("data/stopwords.txt").read_text()
    return frozenset(_read_word_list(data))


@lru_cache(maxsize=1)
def default_dictionary() -> tuple[str, ...]:
    data = resources.files("privscribe").joinpath("data/dictionary.txt").read_text()
    return tuple(_read_word_list(data))


def load_word_list(path) -> list[str]:
    return _read_word_list(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class VocabConfig:
    m_percentile: float = 0.2
    tfidf_threshold: float = math.inf
    out_of_domain_count: int = 0
    stopwords: frozenset[str] = field(default_factory=default_stopwords)
    stemmer: str = "porter"

    def __post_init__(self):
        if not 0 < self.m_percentile <= 1:
            raise ValueError("m_percentile must be in (0, 1]")
        if self.tfidf_threshold < 0:
            raise ValueError("tfidf_threshold must be >= 0")
        if self.out_of_domain_count < 0:
            raise ValueError("out_of_domain_count must be >= 0")
        if self.stemmer not in ("porter", "none"):
            raise ValueError(f"unknown stemmer {self.stemmer!r}")


def surface_tokens(text: str) -> list[str]:
    """Lowercased words with punctuation removed; no stemming or stop-word filtering."""
    return [t for t in (w.replace("'", "") for w in _WORD_RE.findall(text.lower())) if t]


def tokenize_normalize(text: str, cfg: VocabConfig | None = None) -> list[str]:
    cfg = cfg or VocabConfig()
    out = []
    for tok in surface_tokens(text):
        if tok in cfg.stopwords:
            continue
        out.append(porter_stem(tok) if cfg.stemmer == "porter" else tok)
    return out


class Provenance(str, enum.Enum):
    FREQUENCY_TOP = "frequency_top"
    TFIDF = "tfidf"
    OUT_OF_DOMAIN = "out_of_domain"


@dataclass(frozen=True)
class Vocabulary:
    words: tuple[str, ...]
    provenance: tuple[Provenance, ...] = ()

    def __post_init__(self):
        if len(set(self.words)) != len(self.words):
            raise ValueError("duplicate vocabulary words")
        if not self.provenance:
            object.__setattr__(self, "provenance", (Provenance.FREQUENCY_TOP,) * len(self.words))
        if len(self.provenance) != len(self.words):
            raise ValueError("provenance length mismatch")
        object.__setattr__(self, "_index", {w: i for i, w in enumerate(self.words)})

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word) -> bool:
        return word in self._index

    def __iter__(self):
        return iter(self.words)

    def index(self, word: str) -> int:
        return self._index[word]

    def to_json(self) -> str:
        return json.dumps(
            [{"word": w, "provenance": p.value} for w, p in zip(self.words, self.provenance)], indent=2
        )

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        rows = json.loads(text)
        return cls(tuple(r["word"] for r in rows), tuple(Provenance(r["provenance"]) for r in rows))


@dataclass(frozen=True, eq=False)
class Histogram:
    vocab: Vocabulary
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (len(self.vocab),):
            raise ValueError("counts length must equal vocabulary size")
        if (counts < 0).any():
            raise ValueError("negative count")
        object.__setattr__(self, "counts", counts)

    def __add__(self, other):
        if isinstance(other, Histogram):
            if other.vocab != self.vocab:
                raise VocabMismatchError("histograms over different vocabularies")
            other = other.counts
        return Histogram(self.vocab, self.counts + np.asarray(other, dtype=np.int64))

    def __eq__(self, other):
        return (
            isinstance(other, Histogram)
            and other.vocab == self.vocab
            and np.array_equal(other.counts, self.counts)
        )

    def as_dict(self) -> dict[str, int]:
        return {w: int(c) for w, c in zip(self.vocab.words, self.counts)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["word", "count"])
        for w, c in zip(self.vocab.words, self.counts):
            writer.writerow([w, int(c)])
        return buf.getvalue()


def build_histogram(tokens: Iterable[str], vocab: Vocabulary) -> Histogram:
    counts = np.zeros(len(vocab), dtype=np.int64)
    for tok in tokens:
        if tok in vocab:
            counts[vocab.index(tok)] += 1
    return Histogram(vocab, counts)


def tfidf_scores(doc_tokens: Sequence[str], baseline: Sequence[Sequence[str]]) -> dict[str, float]:
    """Raw term count times smoothed idf ``ln((1 + N) / (1 + df))``."""
    if not baseline:
        raise ValueError("baseline corpus is empty")
    n_docs = len(baseline)
    df: Counter[str] = Counter()
    for doc in baseline:
        df.update(set(doc))
    tf = Counter(doc_tokens)
    return {w: c * math.log((1 + n_docs) / (1 + df[w])) for w, c in sorted(tf.items())}


def load_baseline(directory, cfg: VocabConfig | None = None) -> list[list[str]]:
    return [
        tokenize_normalize(p.read_text(encoding="utf-8", errors="replace"), cfg)
        for p in sorted(Path(directory).glob("*.txt"))
    ]


def top_frequency_words(tokens: Sequence[str], m_percentile: float) -> list[str]:
    counts = Counter(tokens)
    ranked = sorted(counts, key=lambda w: (-counts[w], w))
    k = max(1, math.ceil(m_percentile * len(ranked) - 1e-12))
    return ranked[:k]


def estimate_vocabulary(
    osp_transcript: str,
    baseline: Sequence[Sequence[str]] | None = None,
    cfg: VocabConfig | None = None,
    rng_seed: int = 0,
    *,
    dictionary: Sequence[str] | None = None,
    sensitive: Iterable[str] = (),
) -> Vocabulary:
    """Top-m frequent words, plus high TF-IDF words, plus seeded out-of-domain words.

    Words derived from ``sensitive`` keywords are never included.
    """
    cfg = cfg or VocabConfig()
    tokens = tokenize_normalize(osp_transcript, cfg)
    if not tokens:
        raise EmptyTranscriptError("transcript has no content words after normalization")

    banned = set()
    for kw in sensitive:
        banned.update(tokenize_normalize(kw, cfg))
        banned.update(surface_tokens(kw))

    words: list[str] = []
    prov: list[Provenance] = []
    seen = set()

    def add(w, p):
        if w not in seen and w not in banned:
            seen.add(w)
            words.append(w)
            prov.append(p)

    for w in top_frequency_words(tokens, cfg.m_percentile):
        add(w, Provenance.FREQUENCY_TOP)

    if math.isfinite(cfg.tfidf_threshold):
        scores = tfidf_scores(tokens, baseline or [])
        for w in sorted(scores, key=lambda w: (-scores[w], w)):
            if scores[w] >= cfg.tfidf_threshold:
                add(w, Provenance.TFIDF)

    if cfg.out_of_domain_count:
        pool = dictionary if dictionary is not None else default_dictionary()
        normalized = []
        for entry in pool:
            normalized.extend(tokenize_normalize(entry, cfg))
        candidates = sorted({w for w in normalized if w not in seen and w not in banned})
        rng = np.random.default_rng(rng_seed)
        take = min(cfg.out_of_domain_count, len(candidates))
        for i in sorted(rng.choice(len(candidates), size=take, replace=False).tolist()):
            add(candidates[i], Provenance.OUT_OF_DOMAIN)

    return Vocabulary(tuple(words), tuple(prov))


def vocab_accuracy(estimated: Iterable[str], ground_truth_tokens: Sequence[str]) -> tuple[float, float]:
    """(D_acc, D_weighted) of an estimated vocabulary against ground-truth tokens.

    D_weighted sums the ground-truth relative frequency of each correctly
    estimated word and divides by the number of unique ground-truth words, as
    defined; it is not confined to [0, 1] in general.
    """
    if not ground_truth_tokens:
        raise ValueError("ground truth is empty")
    counts = Counter(ground_truth_tokens)
    total = len(ground_truth_tokens)
    est = set(estimated)
    hits = est & counts.keys()
    d_acc = len(hits) / len(counts)
    d_weighted = sum(counts[w] / total for w in hits) / len(counts)
    return d_acc, d_weighted
