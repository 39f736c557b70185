"""Adversary-side ordering attacks driven by an add-alpha n-gram language model."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .text import surface_tokens

BOS = "<s>"
UNK = "<unk>"


@dataclass
class NgramModel:
    n: int
    alpha: float
    vocab: frozenset[str]
    ngrams: dict[tuple[str, ...], Counter] = field(default_factory=lambda: defaultdict(Counter))
    contexts: Counter = field(default_factory=Counter)

    @property
    def v_bar(self) -> int:
        return len(self.vocab) + 1

    def _map(self, tok: str) -> str:
        return tok if tok in self.vocab or tok == BOS else UNK

    def logprob(self, context: Sequence[str], token: str) -> float:
        ctx = tuple(self._map(t) for t in context[-(self.n - 1):]) if self.n > 1 else ()
        tok = self._map(token)
        c = self.ngrams[ctx][tok] if ctx in self.ngrams else 0
        return math.log((c + self.alpha) / (self.contexts[ctx] + self.alpha * self.v_bar))

    def prob(self, context: Sequence[str], token: str) -> float:
        return math.exp(self.logprob(context, token))


def train_ngram(corpus: Sequence[Sequence[str]], n: int = 3, alpha: float = 0.1) -> NgramModel:
    """Counts from each sequence padded on the left with ``n - 1`` start tokens (no end token)."""
    if not corpus or not any(corpus):
        raise ValueError("corpus is empty")
    if n < 1 or alpha <= 0:
        raise ValueError("need n >= 1 and alpha > 0")
    model = NgramModel(n, alpha, frozenset(t for seq in corpus for t in seq))
    for seq in corpus:
        padded = [BOS] * (n - 1) + list(seq)
        for i in range(n - 1, len(padded)):
            ctx = tuple(padded[i - n + 1 : i])
            model.ngrams[ctx][padded[i]] += 1
            model.contexts[ctx] += 1
    model.ngrams = dict(model.ngrams)
    return model


def _tokens(x) -> list[str]:
    return surface_tokens(x) if isinstance(x, str) else list(x)


def sequence_logprob(model: NgramModel, tokens: Sequence[str], history: Sequence[str] = ()) -> float:
    padded = [BOS] * (model.n - 1) + list(history) + list(tokens)
    start = model.n - 1 + len(history)
    return sum(model.logprob(padded[:i], padded[i]) for i in range(start, len(padded)))


def perplexity(model: NgramModel, tokens) -> float:
    toks = _tokens(tokens)
    if not toks:
        raise ValueError("cannot score an empty sequence")
    return math.exp(-sequence_logprob(model, toks) / len(toks))


class _StitchScorer:
    """perplexity(prev ++ cand), caching the parts that depend on one side only.

    Caches live on the model (which is read-only after training) and are keyed
    by token tuples, so repeated attacks over the same segments stay cheap.
    """

    def __init__(self, model: NgramModel, texts: Mapping[str, Sequence[str]]):
        self.model = model
        self.texts = {sid: tuple(t) for sid, t in texts.items()}
        self.head = model.n - 1
        cache = model.__dict__.setdefault("_stitch_cache", ({}, {}, {}))
        self._own, self._tail, self._edge = cache

    def own(self, toks: tuple) -> float:
        v = self._own.get(toks)
        if v is None:
            v = self._own[toks] = sequence_logprob(self.model, toks)
        return v

    def tail(self, toks: tuple) -> float:
        # tokens from position n-1 on see only the candidate itself
        v = self._tail.get(toks)
        if v is None:
            h = self.head
            v = sum(self.model.logprob(toks[i - h : i], toks[i]) for i in range(h, len(toks)))
            self._tail[toks] = v
        return v

    def edge(self, prev: tuple, cand: tuple) -> float:
        h = self.head
        ctx = ((BOS,) * h + prev)[len(prev):] if h else ()
        key = (ctx, cand[:h])
        v = self._edge.get(key)
        if v is None:
            padded = list(ctx) + list(cand[:h])
            v = sum(self.model.logprob(padded[:i], padded[i]) for i in range(h, len(padded)))
            self._edge[key] = v
        return v

    def stitched(self, prev: str, cand: str) -> float:
        p, c = self.texts[prev], self.texts[cand]
        total = len(p) + len(c)
        if total == 0:
            return math.inf
        lp = self.own(p) + self.edge(p, c) + self.tail(c)
        return math.exp(-lp / total)


def next_segment_attack(
    known: str, candidates: Mapping[str, str | Sequence[str]], model: NgramModel, known_id: str = "__known__"
) -> str:
    """Id of the candidate with the lowest perplexity when appended to ``known``; ties go to the smallest id."""
    if len(candidates) < 2:
        raise ValueError("need at least two candidates")
    texts = {sid: _tokens(t) for sid, t in candidates.items()}
    texts[known_id] = _tokens(known)
    scorer = _StitchScorer(model, texts)
    return min((sid for sid in candidates), key=lambda sid: (scorer.stitched(known_id, sid), sid))


def reorder_attack(
    first: str, pool: Mapping[str, str | Sequence[str]], model: NgramModel, first_id: str = "__first__"
) -> list[str]:
    """Greedy chain from ``first``: repeatedly append the lowest-perplexity continuation of the last pick."""
    texts = {sid: _tokens(t) for sid, t in pool.items()}
    texts[first_id] = _tokens(first)
    scorer = _StitchScorer(model, texts)
    remaining = set(pool)
    order: list[str] = []
    last = first_id
    while remaining:
        nxt = min(remaining, key=lambda sid: (scorer.stitched(last, sid), sid))
        order.append(nxt)
        remaining.remove(nxt)
        last = nxt
    return order
