"""Two-stage speech segmentation: energy-based silences, then glottal (pitch) activity.

Stage 1 splits the signal at silences (frame RMS below ``silence_db`` for at
least ``silence_min_s``). Stage 2 keeps the voiced stretches inside each
coarse segment, splitting wherever voicing is absent for ``unvoiced_min_s``
or longer. Fine segments are then merged left to right up to
``min_segment_s`` and padded with ``boundary_pad_s`` of context.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .audio import AudioBuffer, write_wav
from .segments import Segment, SegmentKind, TimeSpan

_EPS_S = 1e-9


@dataclass(frozen=True)
class SegmentationConfig:
    silence_db: float = -35.0
    silence_min_s: float = 0.5
    unvoiced_min_s: float = 0.020
    boundary_pad_s: float = 0.040
    min_segment_s: float = 0.0
    frame_s: float = 0.030
    hop_s: float = 0.010
    pitch_floor_hz: float = 60.0
    pitch_ceiling_hz: float = 400.0
    voicing_threshold: float = 0.45

    def __post_init__(self):
        for name in ("silence_min_s", "unvoiced_min_s", "boundary_pad_s", "frame_s", "hop_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.min_segment_s < 0:
            raise ValueError("min_segment_s must be >= 0")
        if self.silence_db >= 0:
            raise ValueError("silence_db must be negative")
        if not 0 < self.pitch_floor_hz < self.pitch_ceiling_hz:
            raise ValueError("need 0 < pitch_floor_hz < pitch_ceiling_hz")

    @property
    def amplitude_floor(self) -> float:
        return 10.0 ** (self.silence_db / 20.0)


class _FrameGrid:
    """Analysis frames and the hop-wide 'slot' each frame is responsible for."""

    def __init__(self, n_samples: int, rate: int, cfg: SegmentationConfig):
        self.n = n_samples
        self.frame_len = max(1, int(round(cfg.frame_s * rate)))
        self.hop = max(1, int(round(cfg.hop_s * rate)))
        if n_samples <= self.frame_len:
            self.starts = np.array([0])
        else:
            self.starts = np.arange(0, n_samples - self.frame_len + 1, self.hop)
        centers = self.starts + self.frame_len / 2.0
        lo = np.floor(centers - self.hop / 2.0).astype(np.int64)
        hi = np.floor(centers + self.hop / 2.0).astype(np.int64)
        lo[0] = 0
        hi[-1] = n_samples
        lo[1:] = hi[:-1]  # contiguous, non-overlapping slots
        self.slot_lo = np.clip(lo, 0, n_samples)
        self.slot_hi = np.clip(hi, 0, n_samples)

    def frames(self, x: np.ndarray) -> np.ndarray:
        padded = x
        if len(x) < self.frame_len:
            padded = np.concatenate([x, np.zeros(self.frame_len - len(x))])
        idx = self.starts[:, None] + np.arange(self.frame_len)[None, :]
        return padded[idx]


def _db(rms: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(rms)


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive index runs where mask is True."""
    if not mask.any():
        return []
    m = np.concatenate([[False], mask, [False]]).astype(np.int8)
    d = np.diff(m)
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1) - 1
    return list(zip(starts.tolist(), ends.tolist()))


def frame_rms_db(audio: AudioBuffer, cfg: SegmentationConfig) -> np.ndarray:
    grid = _FrameGrid(len(audio.samples), audio.sample_rate_hz, cfg)
    frames = grid.frames(audio.samples)
    return _db(np.sqrt(np.mean(frames * frames, axis=1)))


def detect_silences(audio: AudioBuffer, cfg: SegmentationConfig | None = None) -> list[TimeSpan]:
    cfg = cfg or SegmentationConfig()
    x = audio.samples
    rate = audio.sample_rate_hz
    grid = _FrameGrid(len(x), rate, cfg)
    frames = grid.frames(x)
    silent = _db(np.sqrt(np.mean(frames * frames, axis=1))) < cfg.silence_db
    quiet = np.abs(x) < cfg.amplitude_floor
    last = len(grid.starts) - 1

    spans = []
    for i, j in _runs(silent):
        a = 0 if i == 0 else int(grid.starts[i])
        b = len(x) if j == last else min(len(x), int(grid.starts[j]) + grid.frame_len)
        # sample-accurate edges: grow across sub-threshold samples, at most one hop
        lim = max(0, a - grid.hop)
        while a > lim and quiet[a - 1]:
            a -= 1
        lim = min(len(x), b + grid.hop)
        while b < lim and quiet[b]:
            b += 1
        if (b - a) / rate >= cfg.silence_min_s - _EPS_S:
            spans.append((a, b))

    merged: list[list[int]] = []
    for a, b in spans:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [TimeSpan(a / rate, b / rate) for a, b in merged]


def voicing_strength(audio: AudioBuffer, cfg: SegmentationConfig | None = None) -> np.ndarray:
    """Per-frame peak normalized autocorrelation over the pitch lag range."""
    cfg = cfg or SegmentationConfig()
    rate = audio.sample_rate_hz
    grid = _FrameGrid(len(audio.samples), rate, cfg)
    frames = grid.frames(audio.samples)
    frames = frames - frames.mean(axis=1, keepdims=True)
    min_lag = max(1, int(np.floor(rate / cfg.pitch_ceiling_hz)))
    max_lag = int(np.ceil(rate / cfg.pitch_floor_hz))
    return kernels.autocorr_peaks(frames, min_lag, max_lag)


def _voiced_sample_runs(audio: AudioBuffer, cfg: SegmentationConfig) -> list[tuple[int, int]]:
    x = audio.samples
    rate = audio.sample_rate_hz
    grid = _FrameGrid(len(x), rate, cfg)
    strength = voicing_strength(audio, cfg)
    csum = np.concatenate([[0.0], np.cumsum(x * x)])
    width = np.maximum(grid.slot_hi - grid.slot_lo, 1)
    slot_rms = np.sqrt((csum[grid.slot_hi] - csum[grid.slot_lo]) / width)
    voiced = (strength >= cfg.voicing_threshold) & (_db(slot_rms) >= cfg.silence_db)

    loud = np.abs(x) >= cfg.amplitude_floor
    runs = []
    for i, j in _runs(voiced):
        a, b = int(grid.slot_lo[i]), int(grid.slot_hi[j])
        # snap edges to the first/last supra-threshold sample near the slot edge
        lo, hi = max(0, a - grid.hop), min(len(x), a + grid.hop)
        hits = np.flatnonzero(loud[lo:hi])
        if hits.size:
            a = lo + int(hits[0])
        lo, hi = max(0, b - grid.hop), min(len(x), b + grid.hop)
        hits = np.flatnonzero(loud[lo:hi])
        if hits.size:
            b = lo + int(hits[-1]) + 1
        if b > a:
            runs.append((a, b))

    bridged: list[list[int]] = []
    min_gap = cfg.unvoiced_min_s * rate
    for a, b in runs:
        if bridged and a - bridged[-1][1] < min_gap - _EPS_S * rate:
            bridged[-1][1] = max(bridged[-1][1], b)
        else:
            bridged.append([a, b])
    return [(a, b) for a, b in bridged]


def detect_voicing(audio: AudioBuffer, cfg: SegmentationConfig | None = None) -> list[TimeSpan]:
    cfg = cfg or SegmentationConfig()
    rate = audio.sample_rate_hz
    return [TimeSpan(a / rate, b / rate) for a, b in _voiced_sample_runs(audio, cfg)]


def segment(audio: AudioBuffer, cfg: SegmentationConfig | None = None) -> list[Segment]:
    cfg = cfg or SegmentationConfig()
    rate = audio.sample_rate_hz
    n = len(audio.samples)
    if n == 0:
        raise ValueError("empty audio")

    silences = [(int(round(s.start_s * rate)), int(round(s.end_s * rate))) for s in detect_silences(audio, cfg)]
    coarse = []
    cursor = 0
    for a, b in silences:
        if a > cursor:
            coarse.append((cursor, a))
        cursor = max(cursor, b)
    if cursor < n:
        coarse.append((cursor, n))

    voiced = _voiced_sample_runs(audio, cfg)
    min_len = cfg.min_segment_s * rate

    pieces: list[tuple[int, int]] = []
    for ca, cb in coarse:
        fine = [(max(a, ca), min(b, cb)) for a, b in voiced if min(b, cb) > max(a, ca)]
        cur = None
        for a, b in fine:
            if cur is None:
                cur = [a, b]
            elif cur[1] - cur[0] < min_len - _EPS_S * rate:
                cur[1] = b
            else:
                pieces.append((cur[0], cur[1]))
                cur = [a, b]
        if cur is not None:
            pieces.append((cur[0], cur[1]))

    pad = cfg.boundary_pad_s * rate
    out = []
    for k, (a, b) in enumerate(pieces):
        left_lim = 0.0 if k == 0 else (pieces[k - 1][1] + a) / 2.0
        right_lim = float(n) if k == len(pieces) - 1 else (b + pieces[k + 1][0]) / 2.0
        start = max(a - pad, left_lim, 0.0)
        end = min(b + pad, right_lim, float(n))
        out.append(
            Segment(
                id=f"seg-{k:05d}",
                kind=SegmentKind.TRUE,
                span=TimeSpan(start / rate, end / rate),
            )
        )
    return out


def write_segment_manifest(segments: list[Segment], path) -> None:
    rows = [
        {"id": s.id, "start_s": s.span.start_s, "end_s": s.span.end_s, "kind": s.kind.value}
        for s in segments
        if s.span is not None
    ]
    Path(path).write_text(json.dumps(rows, indent=2))


def read_segment_manifest(path) -> list[Segment]:
    return [Segment.from_dict(d) for d in json.loads(Path(path).read_text())]


def write_segment_slices(audio: AudioBuffer, segments: list[Segment], out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for s in segments:
        p = out_dir / f"{s.id}.wav"
        write_wav(p, audio.slice(s.span.start_s, s.span.end_s))
        paths.append(p)
    return paths
