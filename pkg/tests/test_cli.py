from __future__ import annotations

import csv
import io
import json

import pytest

from privscribe.audio import write_wav
from privscribe.cli import main
from privscribe.synth import planted_speech_like, synthetic_sentences


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_segment(tmp_path, capsys):
    planted = planted_speech_like(3)
    wav = tmp_path / "a.wav"
    write_wav(wav, planted.audio)
    code, out, _ = _run(capsys, "segment", str(wav), "--slices", str(tmp_path / "slices"), "-v")
    assert code == 0
    rows = json.loads(out)
    assert rows and all(r["kind"] == "true" for r in rows)
    assert len(list((tmp_path / "slices").glob("*.wav"))) == len(rows)


def test_scrub(tmp_path, capsys):
    (tmp_path / "t.txt").write_text("Then Mr. Kogan spoke near the river.")
    (tmp_path / "s.json").write_text(json.dumps([{"id": "a", "text": "then mr kogan spoke"}, {"id": "b", "text": "near the river"}]))
    (tmp_path / "kw.txt").write_text("river\n")
    code, out, _ = _run(
        capsys, "scrub", "--transcript", str(tmp_path / "t.txt"), "--segments", str(tmp_path / "s.json"),
        "--keywords", str(tmp_path / "kw.txt"),
    )
    doc = json.loads(out)
    assert code == 0
    assert doc["keywords"] == {"kogan": "entity", "river": "user"}
    assert doc["flagged"] == ["a", "b"]


def test_plan(tmp_path, capsys):
    code, out, _ = _run(
        capsys, "plan", "--epsilon", "1", "--delta", "0.05", "--distance", "2", "--vocab-size", "483",
        "--out", str(tmp_path / "noise.json"),
    )
    assert code == 0
    summary = json.loads(out)
    assert abs(summary["expected_noise_words"] - 2915) / 2915 < 0.1
    assert summary["expected_cost_usd"] == pytest.approx(0.68, abs=0.02)
    assert json.loads((tmp_path / "noise.json").read_text())["n_partitions"] == 1


def test_plan_bad_params(capsys):
    code, _, err = _run(capsys, "plan", "--epsilon", "1", "--delta", "0.9", "--distance", "2", "--vocab-size", "3")
    assert code == 2
    assert "delta" in err


def _run_inputs(tmp_path):
    texts = synthetic_sentences(5, 40)
    texts[2] = "then mr kogan testified"
    segs = [{"id": f"seg-{k:05d}", "text": t} for k, t in enumerate(texts)]
    (tmp_path / "segs.json").write_text(json.dumps(segs))
    (tmp_path / "t.txt").write_text(". ".join(texts[:2]) + ". Then Mr. Kogan testified. " + ". ".join(texts[3:]))
    (tmp_path / "corpus.txt").write_text(". ".join(synthetic_sentences(77, 5000)))
    (tmp_path / "lm.txt").write_text("\n".join(synthetic_sentences(78, 2000)))
    return texts


def test_run_evaluate_attack(tmp_path, capsys):
    texts = _run_inputs(tmp_path)
    out_dir = tmp_path / "out"
    code, out, _ = _run(
        capsys, "run", "--segments", str(tmp_path / "segs.json"), "--transcript", str(tmp_path / "t.txt"),
        "--dummy-corpus", str(tmp_path / "corpus.txt"), "--providers", "2", "--seed", "3",
        "--out-dir", str(out_dir),
    )
    assert code == 0
    assert (out_dir / "transcript.txt").read_text().strip() == " ".join(texts)
    for name in ("manifest.json", "vocabulary.json", "noise.json", "provider-0.json", "provider-1.json"):
        assert (out_dir / name).exists()
    view = json.loads((out_dir / "provider-0.json").read_text())
    assert all("kogan" not in row["text"] for row in view)

    (tmp_path / "ref.txt").write_text(" ".join(texts))
    code, out, _ = _run(
        capsys, "evaluate", "--reference", str(tmp_path / "ref.txt"), "--hypothesis", str(out_dir / "transcript.txt"),
    )
    assert code == 0 and json.loads(out)["wer"] == 0
    code, out, _ = _run(
        capsys, "evaluate", "--reference", str(tmp_path / "ref.txt"), "--hypothesis", str(tmp_path / "t.txt"),
        "--format", "csv",
    )
    assert out.splitlines()[0] == "metric,value"

    code, out, _ = _run(
        capsys, "attack", "--sends", str(out_dir / "provider-0.json"), "--manifest", str(out_dir / "manifest.json"),
        "--lm-corpus", str(tmp_path / "lm.txt"), "--trials", "5",
    )
    assert code == 0
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert 0 <= float(row["tau"]) <= 1
    assert 0 <= float(row["dummy_selection_rate"]) <= 1


def test_run_noisy_mock(tmp_path, capsys):
    texts = _run_inputs(tmp_path)
    code, _, _ = _run(
        capsys, "run", "--segments", str(tmp_path / "segs.json"), "--dummy-corpus", str(tmp_path / "corpus.txt"),
        "--p-sub", "0.3", "--no-scrub", "--out-dir", str(tmp_path / "o"),
    )
    assert code == 0
    assert (tmp_path / "o" / "transcript.txt").read_text().strip() != " ".join(texts)


def test_missing_file(capsys):
    code, _, err = _run(capsys, "evaluate", "--reference", "/nonexistent", "--hypothesis", "/nonexistent")
    assert code == 2
    assert err


def test_module_entry():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "privscribe", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "segment" in res.stdout
