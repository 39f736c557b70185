"""Transcription provider clients.

Every provider is reached through ``TranscriptionClient.transcribe``: an
ordered batch in, one text per segment out, same order. Segments are
independent, so a client never needs neighbouring context.
"""

from __future__ import annotations

import json
import os
import time
import urllib.error
import urllib.request
import zlib
from dataclasses import dataclass, field
from typing import Mapping, Protocol, Sequence

import numpy as np

from .audio import AudioBuffer, to_wav_bytes
from .errors import TransportError
from .segments import Segment
from .text import default_dictionary

TOKEN_ENV = "PRIVSCRIBE_API_TOKEN"


class TranscriptionClient(Protocol):
    identity: str

    def transcribe(self, segments: Sequence[Segment]) -> list[str]: ...


def _segment_rng(seed: int, seg_id: str) -> np.random.Generator:
    # keyed by id so results do not depend on batch order
    return np.random.default_rng([seed, zlib.crc32(seg_id.encode("utf-8"))])


@dataclass
class MockClient:
    """Returns known text, optionally substituting each word with probability ``p_sub``."""

    oracle: Mapping[str, str] = field(default_factory=dict)
    p_sub: float = 0.0
    seed: int = 0
    identity: str = "mock"
    substitutes: Sequence[str] = field(default_factory=default_dictionary)
    calls: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_sub <= 1.0:
            raise ValueError("p_sub must be in [0, 1]")

    def _text(self, seg: Segment) -> str:
        if seg.id in self.oracle:
            return self.oracle[seg.id]
        if seg.text is not None:
            return seg.text
        raise KeyError(f"mock client has no text for segment {seg.id}")

    def transcribe(self, segments: Sequence[Segment]) -> list[str]:
        self.calls += 1
        out = []
        for seg in segments:
            words = self._text(seg).split()
            if self.p_sub > 0 and words:
                rng = _segment_rng(self.seed, seg.id)
                hit = rng.random(len(words)) < self.p_sub
                picks = rng.integers(0, len(self.substitutes), size=len(words))
                words = [self.substitutes[p] if h else w for w, h, p in zip(words, hit, picks)]
            out.append(" ".join(words))
        return out


@dataclass
class IdentityTranscriber:
    """Local transcriber stand-in: returns each segment's known text unchanged."""

    identity: str = "local"

    def transcribe(self, segments: Sequence[Segment]) -> list[str]:
        return [seg.text or "" for seg in segments]


@dataclass
class HttpClient:
    """Posts one request per segment and expects a JSON ``{"text": ...}`` reply.

    Segments with a time span and an attached ``audio`` buffer are sent as
    ``audio/wav``; anything else (dummies) as JSON ``{"id", "text"}``. The
    value of ``$PRIVSCRIBE_API_TOKEN``, if set, is forwarded as a bearer token.
    """

    endpoint: str
    identity: str = "http"
    audio: AudioBuffer | None = None
    timeout_s: float = 30.0
    attempts: int = 3
    backoff_s: float = 0.25
    token_env: str = TOKEN_ENV

    def _request(self, seg: Segment) -> urllib.request.Request:
        headers = {"Accept": "application/json", "X-Segment-Id": seg.id}
        token = os.environ.get(self.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        if self.audio is not None and seg.span is not None and not seg.is_dummy:
            body = to_wav_bytes(self.audio.slice(seg.span.start_s, seg.span.end_s))
            headers["Content-Type"] = "audio/wav"
        else:
            body = json.dumps({"id": seg.id, "text": seg.text or ""}).encode("utf-8")
            headers["Content-Type"] = "application/json"
        return urllib.request.Request(self.endpoint, data=body, headers=headers, method="POST")

    def _one(self, position: int, seg: Segment) -> str:
        reason = ""
        for attempt in range(1, self.attempts + 1):
            try:
                with urllib.request.urlopen(self._request(seg), timeout=self.timeout_s) as resp:
                    payload = json.loads(resp.read().decode("utf-8"))
                if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
                    raise TransportError(self.identity, position, attempt, "reply lacks a 'text' string")
                return payload["text"]
            except TransportError:
                raise
            except urllib.error.HTTPError as exc:
                reason = f"HTTP {exc.code}"
                if 400 <= exc.code < 500 and exc.code not in (408, 429):
                    raise TransportError(self.identity, position, attempt, reason) from exc
            except (urllib.error.URLError, TimeoutError, OSError, ValueError) as exc:
                reason = str(getattr(exc, "reason", exc))
            if attempt < self.attempts:
                time.sleep(self.backoff_s * 2 ** (attempt - 1))
        raise TransportError(self.identity, position, self.attempts, reason)

    def transcribe(self, segments: Sequence[Segment]) -> list[str]:
        return [self._one(pos, seg) for pos, seg in enumerate(segments)]
