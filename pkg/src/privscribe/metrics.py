"""Utility and privacy metrics."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import VocabMismatchError
from .text import Histogram, surface_tokens


@dataclass(slots=True)
class EditCounts:
    substitutions: int
    deletions: int
    insertions: int
    ref_len: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        return self.errors / self.ref_len


def _as_tokens(x) -> list[str]:
    return surface_tokens(x) if isinstance(x, str) else x


def edit_counts(reference, hypothesis) -> EditCounts:
    """Word-level minimal edit alignment. Strings are tokenized by surface form."""
    ref, hyp = _as_tokens(reference), _as_tokens(hypothesis)
    ids: dict = {}
    r = [ids.setdefault(t, len(ids)) for t in ref]
    h = [ids.setdefault(t, len(ids)) for t in hyp]
    sub, dele, ins = kernels.edit_ops(r, h)
    return EditCounts(sub, dele, ins, len(r))


def wer(reference, hypothesis) -> float:
    counts = edit_counts(reference, hypothesis)
    if counts.ref_len == 0:
        raise ValueError("reference is empty")
    return counts.wer


def kendall_tau_norm(perm: Sequence[int], reference: Sequence[int] | None = None) -> float:
    """Fraction of discordant pairs. With ``reference``, ranks ``perm`` by position in it."""
    seq = list(perm)
    if reference is not None:
        pos = {v: i for i, v in enumerate(reference)}
        if len(pos) != len(seq) or any(v not in pos for v in seq):
            raise ValueError("perm and reference must hold the same items")
        seq = [pos[v] for v in seq]
    n = len(seq)
    if n < 2:
        raise ValueError("need at least two items")
    return kernels.count_inversions(seq) / (n * (n - 1) / 2)


def histogram_l1(h1: Histogram, h2: Histogram) -> int:
    if h1.vocab != h2.vocab:
        raise VocabMismatchError("histograms over different vocabularies")
    return int(np.abs(h1.counts - h2.counts).sum())


PUNCTUATION = frozenset(".,;:!?'\"()[]-")


def _style_base(text: str) -> tuple[float, int, int, Counter]:
    words = surface_tokens(text)
    mean_len = float(np.mean([len(w) for w in words])) if words else 0.0
    punct = sum(1 for ch in text if ch in PUNCTUATION)
    special = sum(1 for ch in text if not ch.isalnum() and not ch.isspace() and ch not in PUNCTUATION)
    return mean_len, punct, special, Counter(words)


def stylometry_basis(*texts: str, top: int = 200) -> list[str]:
    basis: set[str] = set()
    for text in texts:
        counts = Counter(surface_tokens(text))
        basis.update(w for w, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top])
    return sorted(basis)


def stylometry_vector(text: str, basis: Sequence[str]) -> np.ndarray:
    """[mean word length, punctuation count, special-character count, relative word frequencies]."""
    mean_len, punct, special, counts = _style_base(text)
    total = sum(counts.values()) or 1
    freqs = [counts[w] / total for w in basis]
    return np.array([mean_len, punct, special, *freqs], dtype=np.float64)


def stylometry_l2(text1: str, text2: str, top: int = 200) -> float:
    basis = stylometry_basis(text1, text2, top=top)
    return float(np.linalg.norm(stylometry_vector(text1, basis) - stylometry_vector(text2, basis)))


def hungarian_match(cost) -> tuple[np.ndarray, float]:
    """Row -> column assignment minimizing total cost, and that total."""
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("cost matrix must be square")
    if not np.isfinite(c).all():
        raise ValueError("cost matrix must be finite")
    if c.shape[0] == 0:
        return np.zeros(0, dtype=np.int64), 0.0
    cols = kernels.linear_assignment(c)
    return cols, float(c[np.arange(len(cols)), cols].sum())


@dataclass(frozen=True)
class DocCounts:
    total_words: int
    unique_words: int
    vocab_counts: tuple[int, ...]


@dataclass(frozen=True)
class BoundInputs:
    t: int
    k: int
    docs: tuple[DocCounts, ...]
    v: float

    @property
    def d_max(self) -> int:
        return max(doc.total_words for doc in self.docs)


@dataclass(frozen=True)
class BoundResult:
    bound: float
    c_min: float

    @property
    def vacuous(self) -> bool:
        return self.bound <= 0


def theorem3_bound(inputs: BoundInputs) -> BoundResult:
    """Lower bound on the l1 distance between a true topic and its matched noisy topic."""
    t, k = inputs.t, inputs.k
    if t < 1 or k < 1 or not inputs.docs:
        raise ValueError("need t >= 1, k >= 1 and at least one document")
    for doc in inputs.docs:
        if doc.total_words <= 0 or doc.unique_words <= 0 or not doc.vocab_counts:
            raise ValueError("document counts must be positive")
        if any(c <= 0 for c in doc.vocab_counts):
            raise ValueError("word counts must be positive")
    d_max = inputs.d_max
    if k * t > d_max:
        raise ValueError("k * t exceeds the longest document")
    v = inputs.v
    c_min = math.inf
    for doc in inputs.docs:
        dj, om = doc.total_words, doc.unique_words
        for w in doc.vocab_counts:
            c_min = min(c_min, v * (dj - w * om) / (dj * (dj + v * om)))
    lead = 1.0 / (1.0 - (t - 1) * k / d_max)
    bound = 2.0 * lead * (c_min / t - 0.5 * (1.0 - t * k / d_max))
    return BoundResult(bound, c_min)


def bound_inputs_from_tokens(docs: Sequence[Sequence[str]], vocab, t: int, k: int, v: float) -> BoundInputs:
    """Counts for each document over the vocabulary words it contains."""
    rows = []
    for doc in docs:
        counts = Counter(doc)
        vc = tuple(counts[w] for w in vocab if counts[w] > 0)
        if vc:
            rows.append(DocCounts(len(doc), len(counts), vc))
    return BoundInputs(t, k, tuple(rows), v)
