"""WAV ingestion and export (16-bit PCM)."""

from __future__ import annotations

import io
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AudioFormatError, UnsupportedAudioError

MIN_SAMPLE_RATE = 8000


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        if self.sample_rate_hz < MIN_SAMPLE_RATE:
            raise ValueError(f"sample rate {self.sample_rate_hz} Hz below {MIN_SAMPLE_RATE}")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def slice(self, start_s: float, end_s: float) -> "AudioBuffer":
        a = max(0, int(round(start_s * self.sample_rate_hz)))
        b = min(len(self.samples), int(round(end_s * self.sample_rate_hz)))
        return AudioBuffer(self.samples[a:b], self.sample_rate_hz)


def load_wav(path) -> AudioBuffer:
    """Read a 16-bit PCM WAV; stereo is down-mixed by averaging the channels."""
    try:
        with wave.open(str(path), "rb") as wf:
            n_channels = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        msg = str(exc)
        if "unknown format" in msg:
            raise UnsupportedAudioError(f"{path}: {msg}") from exc
        raise AudioFormatError(f"{path}: {msg}") from exc
    except EOFError as exc:
        raise AudioFormatError(f"{path}: truncated header") from exc

    if width != 2:
        raise UnsupportedAudioError(f"{path}: {8 * width}-bit samples, only 16-bit PCM is supported")
    if n_channels not in (1, 2):
        raise UnsupportedAudioError(f"{path}: {n_channels} channels")
    if rate < MIN_SAMPLE_RATE:
        raise UnsupportedAudioError(f"{path}: sample rate {rate} Hz")
    usable = len(raw) - len(raw) % (2 * n_channels)
    data = np.frombuffer(raw[:usable], dtype="<i2").astype(np.float64) / 32768.0
    if n_channels == 2:
        data = data.reshape(-1, 2).mean(axis=1)
    return AudioBuffer(data, rate)


def to_wav_bytes(audio: AudioBuffer) -> bytes:
    pcm = np.clip(np.round(audio.samples * 32768.0), -32768, 32767).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(audio.sample_rate_hz)
        wf.writeframes(pcm.tobytes())
    return buf.getvalue()


def write_wav(path, audio: AudioBuffer) -> None:
    Path(path).write_bytes(to_wav_bytes(audio))
