"""Randomized end-to-end scenarios shared by the orchestrator and acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from privscribe.clients import MockClient
from privscribe.dp import NoisePlan
from privscribe.dummies import DummyIndex, index_corpus, plan_dummies
from privscribe.metrics import kendall_tau_norm
from privscribe.orchestrator import dispatch, partition, reassemble, reassemble_texts, shuffle_and_manifest
from privscribe.segments import Segment
from privscribe.synth import NOUNS, synthetic_sentences
from privscribe.text import Vocabulary, build_histogram, tokenize_normalize

_CORPUS = ". ".join(synthetic_sentences(424242, 4000, coherence="none"))
_VOCAB = Vocabulary(tuple(sorted(tokenize_normalize(" ".join(NOUNS[:12])))))
_INDEX = index_corpus(_CORPUS, _VOCAB, k_max=8)


def _fresh_index() -> DummyIndex:
    # candidates are immutable; only the per-provider used-sets need resetting
    return DummyIndex(_INDEX.vocab, _INDEX.k_max, _INDEX.by_word)


@dataclass
class Outcome:
    exact: bool
    histograms_match: bool
    final_tau: float
    n_providers: int
    n_segments: int


def run_scenario(seed: int) -> Outcome:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    n_seg = int(rng.integers(2, 51))
    texts = synthetic_sentences(seed, n_seg, coherence="none")
    segs = [Segment(id=f"seg-{k:05d}", text=t) for k, t in enumerate(texts)]
    vectors = rng.integers(0, 4, size=(n, len(_VOCAB)))
    plan = NoisePlan(vectors, seed, _VOCAB.words)
    dummies = plan_dummies(_fresh_index(), plan)

    assignment = partition(segs, n, seed)
    per = [[s for s, a in zip(segs, assignment) if a == i] for i in range(n)]
    order = {s.id: k for k, s in enumerate(segs)}
    sends, manifest = shuffle_and_manifest(per, dummies, seed, order)
    clients = [MockClient(identity=f"p{i}") for i in range(n)]
    responses = dispatch(sends, clients)

    exact = reassemble(responses, manifest) == " ".join(texts)
    hist_ok = True
    for i in range(n):
        seen = build_histogram(tokenize_normalize(" ".join(responses[i])), _VOCAB)
        truth = build_histogram(tokenize_normalize(" ".join(s.text for s in per[i])), _VOCAB)
        hist_ok &= bool(np.array_equal(seen.counts, truth.counts + vectors[i]))
    final = [k for k, _ in reassemble_texts(responses, manifest)]
    return Outcome(exact, hist_ok, kendall_tau_norm(final, list(range(n_seg))), n, n_seg)
