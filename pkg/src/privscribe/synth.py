"""Synthetic audio with known structure, for tests and benchmarks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .audio import AudioBuffer


def sawtooth(duration_s: float, f0: float, rate: int = 16000, amplitude: float = 0.5) -> np.ndarray:
    t = np.arange(int(round(duration_s * rate))) / rate
    return amplitude * (2.0 * ((t * f0) % 1.0) - 1.0)


def tone(duration_s: float, f0: float, rate: int = 16000, amplitude: float = 1.0) -> np.ndarray:
    t = np.arange(int(round(duration_s * rate))) / rate
    return amplitude * np.sin(2 * np.pi * f0 * t)


def silence(duration_s: float, rate: int = 16000) -> np.ndarray:
    return np.zeros(int(round(duration_s * rate)))


def white_noise(duration_s: float, rate: int = 16000, amplitude: float = 0.3, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return amplitude * rng.uniform(-1.0, 1.0, int(round(duration_s * rate)))


def concat(parts, rate: int = 16000) -> AudioBuffer:
    return AudioBuffer(np.concatenate(parts), rate)


@dataclass
class PlantedAudio:
    audio: AudioBuffer
    silences: list[tuple[float, float]] = field(default_factory=list)
    voiced: list[tuple[float, float]] = field(default_factory=list)


def planted_speech_like(seed: int, rate: int = 16000, n_regions: int = 4) -> PlantedAudio:
    """Voiced bursts (random pitch 100-250 Hz) separated by planted silences >= 0.5 s.

    Inside each region, bursts are separated by short unvoiced gaps (30-80 ms)
    that should split fine segments without creating coarse boundaries.
    """
    rng = np.random.default_rng(seed)
    parts = []
    silences = []
    voiced = []
    t = 0.0

    def add(samples):
        nonlocal t
        parts.append(samples)
        t += len(samples) / rate

    add(silence(float(rng.uniform(0.05, 0.3)), rate))
    for region in range(n_regions):
        for b in range(int(rng.integers(1, 4))):
            if b:
                add(silence(float(rng.uniform(0.03, 0.08)), rate))
            dur = float(rng.uniform(0.25, 0.9))
            start = t
            add(sawtooth(dur, float(rng.uniform(100, 250)), rate, amplitude=float(rng.uniform(0.2, 0.8))))
            voiced.append((start, t))
        if region < n_regions - 1:
            gap = float(rng.uniform(0.5, 1.0))
            start = t
            add(silence(gap, rate))
            silences.append((start, t))
    add(silence(float(rng.uniform(0.05, 0.3)), rate))
    return PlantedAudio(AudioBuffer(np.concatenate(parts), rate), silences, voiced)


# --- synthetic text -------------------------------------------------------

NOUNS = (
    "river", "garden", "doctor", "teacher", "market", "engine", "window", "letter", "village",
    "forest", "harbor", "painter", "kitchen", "ladder", "castle", "bridge", "student", "farmer",
    "camera", "basket", "island", "pilot", "signal", "mirror", "blanket", "wagon", "violin",
    "lantern", "meadow", "tunnel", "orchard", "captain", "sailor", "barrel", "carpet", "pencil",
    "hammer", "candle", "saddle", "compass", "jacket", "bottle", "valley", "canyon", "tower",
    "shelter", "puzzle", "parcel", "ribbon", "helmet",
)
VERBS = (
    "carried", "painted", "watched", "repaired", "visited", "followed", "cleaned", "opened",
    "measured", "borrowed", "finished", "ordered", "noticed", "described", "collected",
    "delivered", "crossed", "pushed", "lifted", "moved", "checked", "printed", "covered",
    "traded", "counted", "tested", "guarded", "packed", "folded", "marked",
)
ADJECTIVES = (
    "old", "quiet", "bright", "heavy", "narrow", "golden", "wooden", "silver", "tired", "careful",
    "broken", "gentle", "hidden", "rapid", "frozen", "empty", "distant", "ancient", "modern", "humble",
)
DETERMINERS = ("the", "a", "this", "that", "every", "one")
PREPOSITIONS = ("near", "behind", "under", "beside", "across", "inside", "toward", "beyond")


def _noun_phrase(rng: np.random.Generator, noun: str) -> list[str]:
    out = [DETERMINERS[int(rng.integers(len(DETERMINERS)))]]
    if rng.random() < 0.5:
        out.append(ADJECTIVES[int(rng.integers(len(ADJECTIVES)))])
    out.append(noun)
    return out


def _sentence(rng: np.random.Generator, nouns: Sequence[str], subject: str | None = None) -> list[str]:
    pick = lambda: nouns[int(rng.integers(len(nouns)))]  # noqa: E731
    words = _noun_phrase(rng, subject or pick())
    words.append(VERBS[int(rng.integers(len(VERBS)))])
    words += _noun_phrase(rng, pick())
    if rng.random() < 0.6:
        words.append(PREPOSITIONS[int(rng.integers(len(PREPOSITIONS)))])
        words += _noun_phrase(rng, pick())
    return words


def synthetic_sentences(seed: int, n: int, coherence: str = "topic", topic_size: int = 12) -> list[str]:
    """Template sentences over a fixed lexicon.

    ``coherence="topic"``: each sentence draws nouns from a slowly drifting
    topic window. ``coherence="chain"``: each sentence opens with the last noun
    of the previous one, a strong cross-segment cue for order recovery.
    """
    if coherence not in ("topic", "chain", "none"):
        raise ValueError("coherence must be 'topic', 'chain' or 'none'")
    rng = np.random.default_rng(seed)
    order = [NOUNS[i] for i in rng.permutation(len(NOUNS))]
    out = []
    prev_last = None
    for k in range(n):
        if coherence == "none":
            pool: Sequence[str] = NOUNS
        else:
            start = (k // 4) % len(order)
            pool = [order[(start + j) % len(order)] for j in range(topic_size)]
        subject = prev_last if coherence == "chain" else None
        words = _sentence(rng, pool, subject)
        prev_last = words[-1]
        out.append(" ".join(words))
    return out


@dataclass
class PlantedKeywords:
    texts: list[str]
    truth: list[bool]
    exact: list[bool]
    keywords: list[str]


KEYWORD_PLANTS = (
    "kogan", "sandberg", "wylie", "brittany", "nix", "zuckerberg", "cambridge", "analytica",
    "schrems", "denham",
)


def _misspell(word: str, rng: np.random.Generator) -> str:
    """Change one interior letter, keeping the first letter."""
    letters = "abcdefghijklmnopqrstuvwxyz"
    if len(word) < 3:
        return word + "e"
    i = int(rng.integers(1, len(word)))
    choices = [c for c in letters if c != word[i]]
    return word[:i] + choices[int(rng.integers(len(choices)))] + word[i + 1 :]


def planted_keyword_corpus(
    seed: int, n_segments: int = 200, plant_rate: float = 0.3, misspell_rate: float = 0.5,
    keywords: Sequence[str] = KEYWORD_PLANTS,
) -> PlantedKeywords:
    """Template sentences; some carry one keyword verbatim or with a one-letter misspelling."""
    rng = np.random.default_rng(seed)
    base = synthetic_sentences(seed, n_segments, coherence="none")
    texts, truth, exact = [], [], []
    for sent in base:
        words = sent.split()
        if rng.random() < plant_rate:
            kw = keywords[int(rng.integers(len(keywords)))]
            is_exact = rng.random() >= misspell_rate
            token = kw if is_exact else _misspell(kw, rng)
            words.insert(int(rng.integers(0, len(words) + 1)), token)
            truth.append(True)
            exact.append(is_exact)
        else:
            truth.append(False)
            exact.append(False)
        texts.append(" ".join(words))
    return PlantedKeywords(texts, truth, exact, list(keywords))
