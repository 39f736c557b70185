"""Dummy-segment selection from a text corpus, and the price of the added noise."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

import numpy as np

from .dp import NoisePlan
from .errors import DummyShortfallError
from .segments import Segment, SegmentKind
from .text import VocabConfig, Vocabulary, surface_tokens, tokenize_normalize

_CLAUSE_RE = re.compile(r"[.!?;:,\n]+")


@dataclass(frozen=True)
class DummyCandidate:
    id: str
    text: str
    word: str
    n_tokens: int
    n_content: int


def split_clauses(corpus: str, k_max: int, stopwords: frozenset[str]) -> list[str]:
    """Clause-level pieces holding at most ``k_max`` non-stop words each."""
    pieces = []
    for clause in _CLAUSE_RE.split(corpus):
        toks = clause.split()
        cur: list[str] = []
        content = 0
        for raw in toks:
            surf = surface_tokens(raw)
            is_content = any(t not in stopwords for t in surf)
            if is_content and content == k_max and cur:
                pieces.append(" ".join(cur))
                cur, content = [], 0
            cur.append(raw)
            content += is_content
        if cur:
            pieces.append(" ".join(cur))
    return [p for p in pieces if surface_tokens(p)]


@dataclass
class DummyIndex:
    vocab: Vocabulary
    k_max: int
    by_word: dict[str, list[DummyCandidate]] = field(default_factory=dict)
    used: dict[int, set[str]] = field(default_factory=dict)

    def candidates(self, word: str) -> list[DummyCandidate]:
        return self.by_word.get(word, [])

    def available(self, provider: int, word: str) -> int:
        used = self.used.get(provider, set())
        return sum(1 for c in self.candidates(word) if c.id not in used)

    def __len__(self) -> int:
        return sum(len(v) for v in self.by_word.values())


def index_corpus(
    corpus: str, vocab: Vocabulary, k_max: int = 8, cfg: VocabConfig | None = None
) -> DummyIndex:
    """Index clause-level pieces containing exactly one vocabulary-word occurrence."""
    if not corpus.strip():
        raise ValueError("dummy corpus is empty")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    cfg = cfg or VocabConfig()
    index = DummyIndex(vocab, k_max)
    n = 0
    for piece in split_clauses(corpus, k_max, cfg.stopwords):
        norm = tokenize_normalize(piece, cfg)
        hits = [t for t in norm if t in vocab]
        if len(hits) != 1:
            continue
        cand = DummyCandidate(
            id=f"dum-{n:06d}",
            text=piece,
            word=hits[0],
            n_tokens=len(surface_tokens(piece)),
            n_content=len(norm),
        )
        n += 1
        index.by_word.setdefault(hits[0], []).append(cand)
    return index


def plan_dummies(index: DummyIndex, plan: NoisePlan, seed: int | None = None) -> list[list[Segment]]:
    """Pick exactly ``plan.vectors[i, j]`` unused candidates of word j for provider i.

    Nothing is marked used unless the whole plan can be realized.
    """
    words = index.vocab.words
    if plan.vectors.shape[1] != len(words):
        raise ValueError("noise plan and index vocabulary differ in size")
    if plan.words is not None and tuple(plan.words) != tuple(words):
        raise ValueError("noise plan words do not match index vocabulary")
    seed = plan.seed if seed is None else seed

    shortfalls = []
    for i in range(plan.n_partitions):
        for j, w in enumerate(words):
            need = int(plan.vectors[i, j])
            if need:
                have = index.available(i, w)
                if have < need:
                    shortfalls.append((i, w, need, have))
    if shortfalls:
        raise DummyShortfallError(shortfalls)

    out: list[list[Segment]] = []
    for i in range(plan.n_partitions):
        rng = np.random.default_rng([seed, i])
        used = index.used.setdefault(i, set())
        chosen: list[Segment] = []
        for j, w in enumerate(words):
            need = int(plan.vectors[i, j])
            if not need:
                continue
            pool = [c for c in index.candidates(w) if c.id not in used]
            order = rng.permutation(len(pool))
            for k in order[:need]:
                c = pool[int(k)]
                used.add(c.id)
                chosen.append(
                    Segment(id=c.id, kind=SegmentKind.DUMMY, text=c.text, vocab_word=w, partition=i)
                )
        out.append(chosen)
    return out


@dataclass(frozen=True)
class CostModel:
    speaking_rate_wps: float = 2.57
    price_per_second: float = 0.0006
    count_stopwords: bool = True

    def __post_init__(self):
        if self.speaking_rate_wps <= 0 or self.price_per_second <= 0:
            raise ValueError("speaking rate and price must be > 0")


def dummy_word_count(dummies: Iterable[Segment], model: CostModel, cfg: VocabConfig | None = None) -> int:
    total = 0
    for seg in dummies:
        text = seg.text or ""
        total += len(surface_tokens(text)) if model.count_stopwords else len(tokenize_normalize(text, cfg))
    return total


def noise_cost(
    words: int | NoisePlan | Sequence[Segment], model: CostModel | None = None
) -> tuple[int, float]:
    """(extra words, USD rounded to cents). A NoisePlan counts one word per noise unit."""
    model = model or CostModel()
    if isinstance(words, NoisePlan):
        total = words.total
    elif isinstance(words, (int, np.integer)):
        total = int(words)
    else:
        flat = [s for s in words]
        if flat and isinstance(flat[0], list):
            flat = [s for part in flat for s in part]
        total = dummy_word_count(flat, model)
    if total < 0:
        raise ValueError("word count must be >= 0")
    usd = Decimal(total) / Decimal(str(model.speaking_rate_wps)) * Decimal(str(model.price_per_second))
    return total, float(usd.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))
