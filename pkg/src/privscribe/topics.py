"""Topic models as word distributions, a small NMF extractor, and matched topic distances."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .metrics import hungarian_match


@dataclass(frozen=True)
class TopicModel:
    topics: tuple[dict[str, float], ...]
    k: int = 1

    def __post_init__(self):
        if not self.topics:
            raise ValueError("need at least one topic")
        for i, topic in enumerate(self.topics):
            if abs(sum(topic.values()) - 1.0) > 1e-9:
                raise ValueError(f"topic {i} weights do not sum to 1")
            if any(p < 0 for p in topic.values()):
                raise ValueError(f"topic {i} has negative weight")
            if sum(1 for p in topic.values() if p > 0) < self.k:
                raise ValueError(f"topic {i} has fewer than k={self.k} words")

    @property
    def t(self) -> int:
        return len(self.topics)

    @classmethod
    def from_weights(cls, topics: Sequence[Mapping[str, float]], k: int = 1) -> "TopicModel":
        out = []
        for topic in topics:
            total = float(sum(topic.values()))
            out.append({w: float(p) / total for w, p in topic.items() if p > 0})
        return cls(tuple(out), k)


@dataclass(frozen=True)
class TopicMatch:
    assignment: np.ndarray
    distances: np.ndarray

    @property
    def total(self) -> float:
        return float(self.distances.sum())


def topic_distance(a: TopicModel, b: TopicModel) -> TopicMatch:
    """l1 distance of each topic in ``a`` to its Hungarian-matched topic in ``b``."""
    if a.t != b.t:
        raise ValueError("topic models differ in topic count")
    basis = sorted(set().union(*a.topics, *b.topics))
    col = {w: j for j, w in enumerate(basis)}

    def dense(model):
        m = np.zeros((model.t, len(basis)))
        for i, topic in enumerate(model.topics):
            for w, p in topic.items():
                m[i, col[w]] = p
        return m

    ma, mb = dense(a), dense(b)
    cost = np.abs(ma[:, None, :] - mb[None, :, :]).sum(axis=2)
    assignment, _ = hungarian_match(cost)
    return TopicMatch(assignment, cost[np.arange(a.t), assignment])


def fit_topics(
    docs: Sequence[Sequence[str]],
    t: int,
    *,
    top_words: int | None = 10,
    iterations: int = 300,
    seed: int = 0,
) -> TopicModel:
    """Frobenius NMF with multiplicative updates on the doc-term count matrix.

    Each topic keeps its ``top_words`` heaviest words (all words if None),
    renormalized to a distribution.
    """
    vocab = sorted({w for doc in docs for w in doc})
    if not vocab:
        raise ValueError("documents are empty")
    if t < 1:
        raise ValueError("t must be >= 1")
    col = {w: j for j, w in enumerate(vocab)}
    x = np.zeros((len(docs), len(vocab)))
    for i, doc in enumerate(docs):
        for w in doc:
            x[i, col[w]] += 1
    rng = np.random.default_rng(seed)
    scale = np.sqrt(x.mean() / t) if x.mean() > 0 else 1.0
    w_ = rng.random((len(docs), t)) * scale + 1e-3
    h_ = rng.random((t, len(vocab))) * scale + 1e-3
    eps = 1e-12
    for _ in range(iterations):
        h_ *= (w_.T @ x) / (w_.T @ w_ @ h_ + eps)
        w_ *= (x @ h_.T) / (w_ @ h_ @ h_.T + eps)

    keep = len(vocab) if top_words is None else min(top_words, len(vocab))
    topics = []
    for row in h_:
        idx = np.argsort(-row, kind="stable")[:keep]
        weights = {vocab[j]: float(row[j]) for j in idx if row[j] > 0}
        if not weights:
            weights = {vocab[j]: 1.0 for j in idx}
        topics.append(weights)
    return TopicModel.from_weights(topics, k=1)
