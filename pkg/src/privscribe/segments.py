"""Segment records shared by segmentation, planning and orchestration."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace


class SegmentKind(str, enum.Enum):
    TRUE = "true"
    DUMMY = "dummy"


@dataclass(frozen=True)
class TimeSpan:
    start_s: float
    end_s: float

    def __post_init__(self):
        if self.start_s < 0 or self.end_s <= self.start_s:
            raise ValueError(f"invalid span [{self.start_s}, {self.end_s}]")

    @property
    def duration(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class Segment:
    """A timed slice of speech, or a text-only dummy.

    ``text`` holds the offline transcription for true segments once known, and
    the synthetic sentence for dummies.
    """

    id: str
    kind: SegmentKind = SegmentKind.TRUE
    span: TimeSpan | None = None
    text: str | None = None
    vocab_word: str | None = None
    partition: int | None = None
    shuffle_pos: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def is_dummy(self) -> bool:
        return self.kind is SegmentKind.DUMMY

    def with_(self, **changes) -> "Segment":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        out = {"id": self.id, "kind": self.kind.value}
        if self.span is not None:
            out["start_s"] = self.span.start_s
            out["end_s"] = self.span.end_s
        if self.text is not None:
            out["text"] = self.text
        if self.vocab_word is not None:
            out["vocab_word"] = self.vocab_word
        if self.partition is not None:
            out["partition"] = self.partition
        if self.shuffle_pos is not None:
            out["shuffle_pos"] = self.shuffle_pos
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Segment":
        span = None
        if "start_s" in d and "end_s" in d:
            span = TimeSpan(float(d["start_s"]), float(d["end_s"]))
        return cls(
            id=str(d["id"]),
            kind=SegmentKind(d.get("kind", "true")),
            span=span,
            text=d.get("text"),
            vocab_word=d.get("vocab_word"),
            partition=d.get("partition"),
            shuffle_pos=d.get("shuffle_pos"),
        )
