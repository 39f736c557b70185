"""Sensitive word scrubbing.

Entities are found with capitalization and digit rules on the offline
transcript, merged with a user keyword list, then matched phonetically
against each segment's text. Segments scoring at or above the sensitivity
threshold are kept away from cloud providers.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .phonetics import phonetic_similarity
from .segments import Segment
from .text import default_stopwords, surface_tokens

_SENTENCE_RE = re.compile(r"[.!?\n]+")
_RAW_TOKEN_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9'\-]*")
_HONORIFICS = ("Mr", "Mrs", "Ms", "Dr", "Prof", "St", "Jr", "Sr", "Mt")
_ABBREV_RE = re.compile(r"\b(%s)\." % "|".join(_HONORIFICS))
_TITLES = frozenset(h.lower() for h in _HONORIFICS[:5])


class KeywordSource(str, enum.Enum):
    ENTITY = "entity"
    USER = "user"


@dataclass
class KeywordList:
    entries: dict[str, KeywordSource] = field(default_factory=dict)

    def add(self, keyword: str, source: KeywordSource) -> None:
        kw = " ".join(surface_tokens(keyword))
        if kw and kw not in self.entries:
            self.entries[kw] = source

    def merge(self, other: "KeywordList") -> "KeywordList":
        out = KeywordList(dict(self.entries))
        for kw, src in other.entries.items():
            out.add(kw, src)
        return out

    @property
    def keywords(self) -> list[str]:
        return sorted(self.entries)

    def __iter__(self):
        return iter(self.keywords)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, kw) -> bool:
        return kw in self.entries

    @classmethod
    def of(cls, words: Iterable[str], source: KeywordSource = KeywordSource.USER) -> "KeywordList":
        kl = cls()
        for w in words:
            kl.add(w, source)
        return kl


def load_keywords(path) -> KeywordList:
    """One keyword or phrase per line; '#' starts a comment."""
    kl = KeywordList()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            kl.add(line, KeywordSource.USER)
    return kl


def _is_title(tok: str) -> bool:
    return tok[0].isupper() and not tok.isdigit()


def detect_entities(osp_transcript: str, user_keywords: KeywordList | None = None) -> KeywordList:
    """High-recall rule-based entity spotting.

    Rules: capitalized words that do not open a sentence, runs of two or more
    title-case words (anywhere), and any token containing a digit. Personal
    titles (Mr, Dr, ...) split runs and are dropped, stop words at the edges
    of a run are trimmed, and the lone pronoun "I" is ignored.
    """
    stop = default_stopwords()
    found = KeywordList()
    for sentence in _SENTENCE_RE.split(_ABBREV_RE.sub(r"\1", osp_transcript)):
        toks = _RAW_TOKEN_RE.findall(sentence)
        i = 0
        while i < len(toks):
            tok = toks[i]
            if any(ch.isdigit() for ch in tok):
                found.add(tok, KeywordSource.ENTITY)
                i += 1
                continue
            if not _is_title(tok) or tok == "I":
                i += 1
                continue
            j = i
            while j < len(toks) and _is_title(toks[j]) and toks[j] != "I" and not any(
                ch.isdigit() for ch in toks[j]
            ):
                j += 1
            spans: list[list[str]] = [[]]
            for t in toks[i:j]:
                if t.lower() in _TITLES:
                    spans.append([])
                else:
                    spans[-1].append(t.lower())
            if i == 0 and len(spans[0]) == 1:
                spans[0] = []
            for span in spans:
                while span and span[0] in stop:
                    span.pop(0)
                while span and span[-1] in stop:
                    span.pop()
                if span:
                    found.add(" ".join(span), KeywordSource.ENTITY)
            i = j
    if user_keywords is not None:
        found = found.merge(user_keywords)
    return found


def segment_score(text: str, keywords: Iterable[str]) -> float:
    """Best phonetic match of any keyword against consecutive tokens of ``text``.

    A multi-word keyword scores the weakest of its token matches at the best
    alignment. Returns 0.0 when the text has tokens but no keyword fits, and
    -inf for text without tokens.
    """
    toks = surface_tokens(text)
    if not toks:
        return -math.inf
    best = 0.0
    for kw in keywords:
        kt = kw.split()
        if not kt or len(kt) > len(toks):
            continue
        for start in range(len(toks) - len(kt) + 1):
            s = min(phonetic_similarity(toks[start + k], kt[k]) for k in range(len(kt)))
            if s > best:
                best = s
                if best == 1.0:
                    return 1.0
    return best


def _check_score(score: float) -> None:
    if not 0.0 <= score <= 1.0:
        raise ValueError("sensitivity score must be in [0, 1]")


def flag_segments(
    segments: Sequence[Segment], keywords: KeywordList | Iterable[str], score: float
) -> tuple[list[Segment], list[Segment]]:
    _check_score(score)
    kws = list(keywords)
    flagged, clean = [], []
    for seg in segments:
        if seg.text is None:
            raise ValueError(f"segment {seg.id} has no candidate text")
        (flagged if segment_score(seg.text, kws) >= score else clean).append(seg)
    return flagged, clean


@dataclass(frozen=True)
class RocPoint:
    s: float
    tpr: float
    fpr: float


def roc_curve(
    scores: Sequence[float], ground_truth: Sequence[bool], scores_grid: Sequence[float]
) -> list[RocPoint]:
    """TPR/FPR of flagging by ``segment score >= s`` for each ``s`` in the grid."""
    if len(scores) != len(ground_truth):
        raise ValueError("scores and ground truth differ in length")
    pos = sum(1 for t in ground_truth if t)
    neg = len(ground_truth) - pos
    out = []
    for s in scores_grid:
        _check_score(s)
        tp = sum(1 for sc, t in zip(scores, ground_truth) if t and sc >= s)
        fp = sum(1 for sc, t in zip(scores, ground_truth) if not t and sc >= s)
        out.append(RocPoint(s, tp / pos if pos else math.nan, fp / neg if neg else math.nan))
    return out


def roc_to_csv(points: Sequence[RocPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "TPR", "FPR"])
    for p in points:
        w.writerow([p.s, p.tpr, p.fpr])
    return buf.getvalue()
