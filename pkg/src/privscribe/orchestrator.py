"""Partition, shuffle, dispatch and exact reassembly across providers."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .clients import IdentityTranscriber, TranscriptionClient
from .dp import DpParams, NoisePlan, dist_for, sample_noise_plan
from .dummies import DummyIndex, index_corpus, plan_dummies
from .errors import DummyShortfallError, MissingResponseError, TransportError
from .scrub import KeywordList, detect_entities, flag_segments
from .segments import Segment
from .text import VocabConfig, Vocabulary, estimate_vocabulary

VOICE_MODES = ("none", "cloning", "one_to_one", "many_to_one")


def partition(segments: Sequence[Segment], n: int, seed: int) -> list[int]:
    """Independent uniform provider choice per segment."""
    if n < 1:
        raise ValueError("need at least one provider")
    if n == 1:
        return [0] * len(segments)
    rng = np.random.default_rng([seed, 1])
    return rng.integers(0, n, size=len(segments)).tolist()


@dataclass
class ProviderManifest:
    provider: int
    sent_ids: list[str]
    true_positions: list[int]
    original_indices: list[int]
    dummy_positions: list[int]
    dummy_ids: list[str]

    def to_dict(self) -> dict:
        return {
            "provider": self.provider,
            "sent_ids": self.sent_ids,
            "order": [{"sent": s, "original": o} for s, o in zip(self.true_positions, self.original_indices)],
            "dummy_timestamps": [{"sent": s, "id": i} for s, i in zip(self.dummy_positions, self.dummy_ids)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProviderManifest":
        return cls(
            provider=d["provider"],
            sent_ids=list(d["sent_ids"]),
            true_positions=[o["sent"] for o in d["order"]],
            original_indices=[o["original"] for o in d["order"]],
            dummy_positions=[t["sent"] for t in d["dummy_timestamps"]],
            dummy_ids=[t["id"] for t in d["dummy_timestamps"]],
        )


@dataclass
class PartitionManifest:
    """Everything needed to drop dummies and undo the shuffle, per provider."""

    providers: list[ProviderManifest]
    seed: int
    params: dict = field(default_factory=dict)
    voice_mode: str = "none"
    local_indices: list[int] = field(default_factory=list)

    def validate(self) -> None:
        seen: set[int] = set()
        for pm in self.providers:
            if sorted(pm.true_positions + pm.dummy_positions) != list(range(len(pm.sent_ids))):
                raise ValueError(f"provider {pm.provider}: positions do not cover the send list")
            if set(pm.dummy_ids) & {pm.sent_ids[p] for p in pm.true_positions}:
                raise ValueError(f"provider {pm.provider}: dummy and true ids overlap")
            if seen & set(pm.original_indices):
                raise ValueError("a true segment is assigned to two providers")
            seen.update(pm.original_indices)
        if seen & set(self.local_indices):
            raise ValueError("a locally transcribed segment was also sent out")

    def to_json(self) -> str:
        doc = {
            "seed": self.seed,
            "params": self.params,
            "voice_mode": self.voice_mode,
            "local_indices": self.local_indices,
            "providers": [pm.to_dict() for pm in self.providers],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PartitionManifest":
        doc = json.loads(text)
        return cls(
            providers=[ProviderManifest.from_dict(p) for p in doc["providers"]],
            seed=doc["seed"],
            params=doc.get("params", {}),
            voice_mode=doc.get("voice_mode", "none"),
            local_indices=list(doc.get("local_indices", [])),
        )


def shuffle_and_manifest(
    true_per_provider: Sequence[Sequence[Segment]],
    dummies_per_provider: Sequence[Sequence[Segment]],
    seed: int,
    original_index: Mapping[str, int] | None = None,
    params: dict | None = None,
    voice_mode: str = "none",
) -> tuple[list[list[Segment]], PartitionManifest]:
    """Uniformly interleave each provider's true and dummy segments.

    ``original_index`` maps true segment ids to their global position; by
    default positions follow the order of ``true_per_provider`` flattened.
    """
    if len(true_per_provider) != len(dummies_per_provider):
        raise ValueError("true and dummy lists must cover the same providers")
    if voice_mode not in VOICE_MODES:
        raise ValueError(f"voice_mode must be one of {VOICE_MODES}")
    if original_index is None:
        flat = [s.id for part in true_per_provider for s in part]
        original_index = {sid: k for k, sid in enumerate(flat)}

    sends: list[list[Segment]] = []
    manifests: list[ProviderManifest] = []
    for i, (trues, dummies) in enumerate(zip(true_per_provider, dummies_per_provider)):
        ids = [s.id for s in trues] + [s.id for s in dummies]
        if len(set(ids)) != len(ids):
            raise ValueError(f"provider {i}: duplicate segment ids")
        items = list(trues) + list(dummies)
        perm = np.random.default_rng([seed, 2, i]).permutation(len(items))
        sent = [items[k].with_(partition=i, shuffle_pos=pos) for pos, k in enumerate(perm.tolist())]
        pm = ProviderManifest(i, [s.id for s in sent], [], [], [], [])
        for pos, seg in enumerate(sent):
            if seg.is_dummy:
                pm.dummy_positions.append(pos)
                pm.dummy_ids.append(seg.id)
            else:
                pm.true_positions.append(pos)
                pm.original_indices.append(original_index[seg.id])
        sends.append(sent)
        manifests.append(pm)
    manifest = PartitionManifest(manifests, seed, dict(params or {}), voice_mode)
    manifest.validate()
    return sends, manifest


def dispatch(
    sends: Sequence[Sequence[Segment]],
    clients: Sequence[TranscriptionClient],
    max_workers: int | None = None,
) -> list[list[str]]:
    """Send every provider its list concurrently; responses keyed by (provider, position)."""
    if len(clients) != len(sends):
        raise ValueError("need one client per provider")

    def run(i: int) -> list[str]:
        batch = list(sends[i])
        if not batch:
            return []
        out = clients[i].transcribe(batch)
        if len(out) != len(batch):
            raise TransportError(
                clients[i].identity, min(len(out), len(batch)), 1,
                f"expected {len(batch)} transcripts, got {len(out)}",
            )
        return list(out)

    with ThreadPoolExecutor(max_workers=max_workers or max(1, len(sends))) as pool:
        futures = [pool.submit(run, i) for i in range(len(sends))]
        return [f.result() for f in futures]


def reassemble_texts(
    responses: Sequence[Sequence[str | None]],
    manifest: PartitionManifest,
    local: Mapping[int, str] | None = None,
) -> list[tuple[int, str]]:
    """(original index, text) for every true segment, in original order."""
    if len(responses) != len(manifest.providers):
        raise MissingResponseError("response count differs from provider count")
    merged: dict[int, str] = dict(local or {})
    for pm, resp in zip(manifest.providers, responses):
        if len(resp) != len(pm.sent_ids):
            raise MissingResponseError(
                f"provider {pm.provider}: {len(resp)} responses for {len(pm.sent_ids)} segments"
            )
        for pos, orig in zip(pm.true_positions, pm.original_indices):
            text = resp[pos]
            if text is None:
                raise MissingResponseError(f"provider {pm.provider}: no response at position {pos}")
            merged[orig] = text
    return sorted(merged.items())


def reassemble(
    responses: Sequence[Sequence[str | None]],
    manifest: PartitionManifest,
    local: Mapping[int, str] | None = None,
) -> str:
    return " ".join(t for _, t in reassemble_texts(responses, manifest, local) if t)


def save_manifest(manifest: PartitionManifest, path) -> None:
    Path(path).write_text(manifest.to_json(), encoding="utf-8")


def load_manifest(path) -> PartitionManifest:
    return PartitionManifest.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class PipelineConfig:
    params: DpParams
    seed: int = 0
    sensitivity: float = 0.9
    k_max: int = 8
    voice_mode: str = "none"
    vocab: VocabConfig = field(default_factory=VocabConfig)
    scrub: bool = True


@dataclass
class PipelineResult:
    transcript: str
    manifest: PartitionManifest
    sends: list[list[Segment]]
    responses: list[list[str]]
    noise: NoisePlan
    vocabulary: Vocabulary
    keywords: KeywordList
    flagged_ids: list[str]
    local_texts: dict[int, str]


def run_pipeline(
    segments: Sequence[Segment],
    osp_transcript: str,
    dummy_corpus: str | DummyIndex,
    clients: Sequence[TranscriptionClient],
    cfg: PipelineConfig,
    *,
    user_keywords: KeywordList | None = None,
    baseline: Sequence[Sequence[str]] | None = None,
    local: TranscriptionClient | None = None,
    more_dummies: Callable[[int], str] | None = None,
    max_extensions: int = 5,
) -> PipelineResult:
    """Scrub, estimate the vocabulary, add DP dummies, shuffle, transcribe, reassemble.

    ``segments`` carry their offline transcription in ``text``; that text is
    only used locally (scrubbing, vocabulary) and by mock clients. When the
    dummy corpus runs short, ``more_dummies(round)`` is asked for extra text,
    up to ``max_extensions`` times.
    """
    n = cfg.params.n_providers
    if len(clients) != n:
        raise ValueError(f"{n} providers configured but {len(clients)} clients given")
    local = local or IdentityTranscriber()
    order = {s.id: k for k, s in enumerate(segments)}

    keywords = detect_entities(osp_transcript, user_keywords) if cfg.scrub else (user_keywords or KeywordList())
    if cfg.scrub and len(keywords):
        flagged, clean = flag_segments(segments, keywords, cfg.sensitivity)
    else:
        flagged, clean = [], list(segments)
    local_texts = dict(zip((order[s.id] for s in flagged), local.transcribe(flagged))) if flagged else {}

    vocab = estimate_vocabulary(
        osp_transcript, baseline, cfg.vocab, cfg.seed, sensitive=list(keywords)
    )
    dist = dist_for(cfg.params)
    noise = sample_noise_plan(dist, len(vocab), n, cfg.seed).with_words(vocab.words)
    if isinstance(dummy_corpus, DummyIndex):
        dummies = plan_dummies(dummy_corpus, noise)
    else:
        corpus = dummy_corpus
        for round_ in range(max_extensions + 1):
            index = index_corpus(corpus, vocab, cfg.k_max, cfg.vocab)
            try:
                dummies = plan_dummies(index, noise)
                break
            except DummyShortfallError:
                if more_dummies is None or round_ == max_extensions:
                    raise
                corpus = corpus + "\n" + more_dummies(round_)

    assignment = partition(clean, n, cfg.seed)
    per_provider: list[list[Segment]] = [[] for _ in range(n)]
    for seg, p in zip(clean, assignment):
        per_provider[p].append(seg)

    params = cfg.params.to_dict()
    params.update(dist.to_dict())
    sends, manifest = shuffle_and_manifest(
        per_provider, dummies, cfg.seed, order, params=params, voice_mode=cfg.voice_mode
    )
    manifest.local_indices = sorted(local_texts)
    manifest.validate()
    responses = dispatch(sends, clients)
    transcript = reassemble(responses, manifest, local_texts)
    return PipelineResult(
        transcript, manifest, sends, responses, noise, vocab, keywords,
        [s.id for s in flagged], local_texts,
    )
