from __future__ import annotations

import numpy as np
import pytest

from privscribe.audio import AudioBuffer, load_wav
from privscribe.segmentation import (
    SegmentationConfig,
    detect_silences,
    detect_voicing,
    read_segment_manifest,
    segment,
    write_segment_manifest,
    write_segment_slices,
)
from privscribe.synth import concat, planted_speech_like, sawtooth, silence, tone, white_noise

RATE = 16000


def test_planted_gap_detected():
    audio = concat([tone(2.0, 220), silence(0.6), tone(2.0, 220)])
    spans = detect_silences(audio, SegmentationConfig())
    assert len(spans) == 1
    assert spans[0].start_s == pytest.approx(2.0, abs=0.05)
    assert spans[0].end_s == pytest.approx(2.6, abs=0.05)


def test_short_gap_ignored():
    audio = concat([tone(1.0, 220), silence(0.3), tone(1.0, 220)])
    assert detect_silences(audio) == []


def test_all_silent():
    audio = AudioBuffer(np.zeros(2 * RATE), RATE)
    spans = detect_silences(audio)
    assert len(spans) == 1
    assert spans[0].start_s == 0.0
    assert spans[0].end_s == pytest.approx(2.0)


def test_quiet_but_not_silent_kept():
    # -30 dBFS RMS tone sits above the -35 dB floor
    amp = 10 ** (-30 / 20) * np.sqrt(2)
    audio = concat([tone(1.0, 220), tone(1.0, 220, amplitude=amp), tone(1.0, 220)])
    assert detect_silences(audio) == []


def test_sawtooth_voiced():
    audio = concat([silence(0.2), sawtooth(1.5, 150), silence(0.2)])
    spans = detect_voicing(audio)
    assert len(spans) == 1
    assert spans[0].start_s == pytest.approx(0.2, abs=0.05)
    assert spans[0].end_s == pytest.approx(1.7, abs=0.05)


@pytest.mark.parametrize("seed", range(20))
def test_white_noise_unvoiced(seed):
    audio = AudioBuffer(white_noise(1.0, seed=seed), RATE)
    assert detect_voicing(audio) == []


def test_silence_unvoiced():
    assert detect_voicing(AudioBuffer(np.zeros(RATE), RATE)) == []


def test_two_coarse_segments():
    audio = concat([sawtooth(1.0, 140), silence(0.6), sawtooth(1.0, 180)])
    segs = segment(audio, SegmentationConfig(min_segment_s=0.0))
    assert len(segs) == 2
    assert segs[0].span.end_s == pytest.approx(1.04, abs=0.01)
    assert segs[1].span.start_s == pytest.approx(1.56, abs=0.01)


def test_merge_all_inside_one_coarse_segment():
    parts = [sawtooth(0.4, 150)]
    for _ in range(3):
        parts += [silence(0.05), sawtooth(0.4, 150)]
    audio = concat(parts)
    assert len(segment(audio, SegmentationConfig(min_segment_s=0.0))) == 4
    segs = segment(audio, SegmentationConfig(min_segment_s=audio.duration + 1))
    assert len(segs) == 1


def test_three_bursts_30ms_gaps():
    audio = concat(
        [sawtooth(0.5, 120), silence(0.03), sawtooth(0.5, 160), silence(0.03), sawtooth(0.5, 200)]
    )
    segs = segment(audio, SegmentationConfig(min_segment_s=0.0))
    assert len(segs) == 3


def test_short_gap_below_unvoiced_min_bridged():
    audio = concat([sawtooth(0.5, 150), silence(0.01), sawtooth(0.5, 150)])
    assert len(segment(audio)) == 1


def test_min_segment_merges_greedily():
    bursts = []
    for k in range(6):
        if k:
            bursts.append(silence(0.05))
        bursts.append(sawtooth(0.3, 150))
    audio = concat(bursts)
    segs = segment(audio, SegmentationConfig(min_segment_s=0.6))
    # each merged piece is two bursts plus the gap: 0.65 s
    assert len(segs) == 3
    for s in segs:
        assert s.span.duration >= 0.6


def test_padding_clipped_at_neighbours():
    audio = concat([silence(0.01), sawtooth(0.4, 150), silence(0.03), sawtooth(0.4, 150)])
    segs = segment(audio)
    assert segs[0].span.start_s == 0.0
    assert segs[0].span.end_s <= segs[1].span.start_s
    assert segs[1].span.end_s == pytest.approx(audio.duration)


def test_empty_audio_rejected():
    with pytest.raises(ValueError):
        segment(AudioBuffer(np.zeros(0), RATE))


def test_config_validation():
    with pytest.raises(ValueError):
        SegmentationConfig(silence_db=3.0)
    with pytest.raises(ValueError):
        SegmentationConfig(hop_s=0)
    with pytest.raises(ValueError):
        SegmentationConfig(min_segment_s=-1)


def _check_invariants(planted, cfg):
    segs = segment(planted.audio, cfg)
    starts = [s.span.start_s for s in segs]
    assert starts == sorted(starts)
    for a, b in zip(segs, segs[1:]):
        assert a.span.end_s <= b.span.start_s
    for v in detect_voicing(planted.audio, cfg):
        assert any(s.span.start_s <= v.start_s and v.end_s <= s.span.end_s for s in segs)
    assert len({s.id for s in segs}) == len(segs)
    return segs


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("min_seg", [0.0, 0.8])
def test_invariants_on_planted(seed, min_seg):
    planted = planted_speech_like(seed)
    cfg = SegmentationConfig(min_segment_s=min_seg)
    segs = _check_invariants(planted, cfg)
    assert segs == segment(planted.audio, cfg)
    # no segment straddles a planted silence interior
    for a, b in planted.silences:
        mid = (a + b) / 2
        assert not any(s.span.start_s < mid < s.span.end_s for s in segs)
    if min_seg:
        coarse = [(0.0, planted.silences[0][0])] + [
            (planted.silences[i][1], planted.silences[i + 1][0]) for i in range(len(planted.silences) - 1)
        ] + [(planted.silences[-1][1], planted.audio.duration)]
        for lo, hi in coarse:
            inside = [s for s in segs if lo - 0.05 <= s.span.start_s and s.span.end_s <= hi + 0.05]
            for s in inside[:-1]:
                assert s.span.duration >= min_seg


def test_manifest_and_slices(tmp_path):
    planted = planted_speech_like(1)
    segs = segment(planted.audio)
    mpath = tmp_path / "segments.json"
    write_segment_manifest(segs, mpath)
    assert read_segment_manifest(mpath) == segs
    paths = write_segment_slices(planted.audio, segs, tmp_path / "slices")
    assert [p.stem for p in paths] == [s.id for s in segs]
    first = load_wav(paths[0])
    assert abs(len(first.samples) - segs[0].span.duration * RATE) <= 1
