"""Command-line entry point: ``privscribe <subcommand>``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__

log = logging.getLogger("privscribe")


def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_or_print(text: str, path) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load_segments(path):
    from .segments import Segment

    return [Segment.from_dict(d) for d in json.loads(_read(path))]


def cmd_segment(args) -> int:
    from .audio import load_wav
    from .segmentation import SegmentationConfig, segment, write_segment_slices

    cfg = SegmentationConfig(
        silence_db=args.silence_db,
        silence_min_s=args.silence_min,
        unvoiced_min_s=args.unvoiced_min,
        boundary_pad_s=args.pad,
        min_segment_s=args.min_segment,
    )
    audio = load_wav(args.wav)
    segs = segment(audio, cfg)
    rows = [
        {"id": s.id, "start_s": round(s.span.start_s, 6), "end_s": round(s.span.end_s, 6), "kind": s.kind.value}
        for s in segs
    ]
    _write_or_print(json.dumps(rows, indent=2), args.out)
    if args.slices:
        write_segment_slices(audio, segs, args.slices)
    log.info("%d segments from %.2f s of audio", len(segs), audio.duration)
    return 0


def cmd_scrub(args) -> int:
    from .scrub import detect_entities, flag_segments, load_keywords

    user = load_keywords(args.keywords) if args.keywords else None
    keywords = detect_entities(_read(args.transcript), user)
    doc = {"keywords": {k: v.value for k, v in sorted(keywords.entries.items())}}
    if args.segments:
        flagged, clean = flag_segments(_load_segments(args.segments), keywords, args.score)
        doc["score"] = args.score
        doc["flagged"] = [s.id for s in flagged]
        doc["clean"] = [s.id for s in clean]
    _write_or_print(json.dumps(doc, indent=2), args.out)
    return 0


def cmd_plan(args) -> int:
    from .dp import DpParams, dist_for, dist_moments, sample_noise_plan
    from .dummies import CostModel, noise_cost
    from .text import Vocabulary

    params = DpParams(args.epsilon, args.delta, args.distance, args.providers)
    dist = dist_for(params, calibrate=not args.raw_center)
    if args.vocab:
        words = Vocabulary.from_json(_read(args.vocab)).words
    else:
        words = tuple(f"w{j}" for j in range(args.vocab_size))
    plan = sample_noise_plan(dist, len(words), args.providers, args.seed).with_words(words)
    if args.out:
        Path(args.out).write_text(plan.to_json(), encoding="utf-8")
    mom = dist_moments(dist)
    expected = len(words) * mom.mean * args.providers
    _, usd = noise_cost(round(expected), CostModel(args.rate, args.price))
    summary = {
        "eps_eff": dist.eps_eff,
        "delta_eff": dist.delta_eff,
        "eta0": dist.eta0,
        "center": dist.center,
        "mean": mom.mean,
        "variance": mom.variance,
        "closed_form_variance": mom.closed_form_variance,
        "vocab_size": len(words),
        "expected_noise_words": expected,
        "sampled_noise_words": plan.total,
        "expected_cost_usd": usd,
    }
    print(json.dumps(summary, indent=2))
    return 0


def cmd_run(args) -> int:
    from .audio import load_wav
    from .clients import HttpClient, MockClient
    from .dp import DpParams
    from .orchestrator import PipelineConfig, run_pipeline, save_manifest
    from .scrub import load_keywords
    from .text import VocabConfig, load_baseline

    segments = _load_segments(args.segments)
    transcript = _read(args.transcript) if args.transcript else " ".join(s.text or "" for s in segments)
    params = DpParams(args.epsilon, args.delta, args.distance, args.providers)
    vcfg = VocabConfig(
        m_percentile=args.m_percentile,
        tfidf_threshold=args.tfidf_threshold if args.baseline else float("inf"),
        out_of_domain_count=args.out_of_domain,
    )
    cfg = PipelineConfig(
        params, seed=args.seed, sensitivity=args.score, k_max=args.k_max,
        voice_mode=args.voice_mode, vocab=vcfg, scrub=not args.no_scrub,
    )
    if args.clients == "mock":
        oracle = {s.id: s.text or "" for s in segments}
        clients = [MockClient(oracle, args.p_sub, args.seed + i, f"mock-{i}") for i in range(args.providers)]
    else:
        if not args.endpoint:
            raise SystemExit("--endpoint is required with --clients http")
        audio = load_wav(args.wav) if args.wav else None
        endpoints = args.endpoint
        if len(endpoints) == 1:
            endpoints = endpoints * args.providers
        if len(endpoints) != args.providers:
            raise SystemExit("give one --endpoint, or one per provider")
        clients = [HttpClient(url, f"http-{i}", audio) for i, url in enumerate(endpoints)]

    result = run_pipeline(
        segments, transcript, _read(args.dummy_corpus), clients, cfg,
        user_keywords=load_keywords(args.keywords) if args.keywords else None,
        baseline=load_baseline(args.baseline, vcfg) if args.baseline else None,
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_manifest(result.manifest, out / "manifest.json")
    (out / "transcript.txt").write_text(result.transcript + "\n", encoding="utf-8")
    (out / "vocabulary.json").write_text(result.vocabulary.to_json(), encoding="utf-8")
    (out / "noise.json").write_text(result.noise.to_json(), encoding="utf-8")
    for i, (send, resp) in enumerate(zip(result.sends, result.responses)):
        view = [{"id": s.id, "text": r} for s, r in zip(send, resp)]
        (out / f"provider-{i}.json").write_text(json.dumps(view, indent=2), encoding="utf-8")
    log.info(
        "%d segments, %d flagged for local transcription, %d dummies across %d provider(s)",
        len(segments), len(result.flagged_ids), result.noise.total, args.providers,
    )
    print(str(out / "transcript.txt"))
    return 0


def cmd_evaluate(args) -> int:
    from .metrics import edit_counts, stylometry_l2

    ref, hyp = _read(args.reference), _read(args.hypothesis)
    ec = edit_counts(ref, hyp)
    if ec.ref_len == 0:
        raise SystemExit("reference transcript is empty")
    report = {
        "wer": ec.wer,
        "substitutions": ec.substitutions,
        "deletions": ec.deletions,
        "insertions": ec.insertions,
        "reference_words": ec.ref_len,
        "stylometry_l2": stylometry_l2(ref, hyp),
    }
    if args.format == "json":
        _write_or_print(json.dumps(report, indent=2), args.out)
    else:
        lines = ["metric,value"] + [f"{k},{v}" for k, v in report.items()]
        _write_or_print("\n".join(lines), args.out)
    return 0


def cmd_attack(args) -> int:
    from .attacks import next_segment_attack, reorder_attack, train_ngram
    from .metrics import kendall_tau_norm
    from .orchestrator import load_manifest
    from .text import surface_tokens

    view = json.loads(_read(args.sends))
    texts = {row["id"]: row["text"] for row in view}
    manifest = load_manifest(args.manifest)
    pm = manifest.providers[args.provider]
    original = {pm.sent_ids[p]: o for p, o in zip(pm.true_positions, pm.original_indices)}
    if len(original) < 2:
        raise SystemExit("provider holds fewer than two true segments")
    lm_corpus = [surface_tokens(line) for line in _read(args.lm_corpus).splitlines() if line.strip()]
    model = train_ngram(lm_corpus, args.order, args.alpha)

    first = min(original, key=original.get)
    pool = {k: v for k, v in texts.items() if k != first}
    order = reorder_attack(texts[first], pool, model)
    tau = kendall_tau_norm([original[k] for k in order if k in original])

    dummy_ids = set(pm.dummy_ids)
    trials = sorted(original, key=original.get)[: args.trials]
    hits = 0
    for sid in trials:
        cands = {k: v for k, v in texts.items() if k != sid}
        hits += next_segment_attack(texts[sid], cands, model) in dummy_ids
    rate = hits / len(trials)
    frac = len(dummy_ids) / max(1, len(texts) - 1)

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["seed", "tau", "dummy_selection_rate", "dummy_fraction"])
    writer.writerow([manifest.seed, f"{tau:.4f}", f"{rate:.4f}", f"{frac:.4f}"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="privscribe", description="Privacy-preserving transcription pipeline.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("segment", parents=[common], help="split a WAV file into speech segments")
    s.add_argument("wav")
    s.add_argument("--out", help="write the segment manifest here instead of stdout")
    s.add_argument("--slices", help="directory for per-segment WAV files")
    s.add_argument("--silence-db", type=float, default=-35.0)
    s.add_argument("--silence-min", type=float, default=0.5)
    s.add_argument("--unvoiced-min", type=float, default=0.020)
    s.add_argument("--pad", type=float, default=0.040)
    s.add_argument("--min-segment", type=float, default=0.0)
    s.set_defaults(func=cmd_segment)

    s = sub.add_parser("scrub", parents=[common], help="find sensitive keywords and flag segments")
    s.add_argument("--transcript", required=True, help="offline transcript (text)")
    s.add_argument("--segments", help="JSON list of {id, text}")
    s.add_argument("--keywords", help="user keyword file, one per line")
    s.add_argument("--score", type=float, default=0.9, help="sensitivity threshold in [0, 1]")
    s.add_argument("--out")
    s.set_defaults(func=cmd_scrub)

    s = sub.add_parser("plan", parents=[common], help="sample a DP noise plan")
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--distance", type=int, required=True)
    s.add_argument("--providers", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--vocab", help="vocabulary JSON")
    g.add_argument("--vocab-size", type=int)
    s.add_argument("--raw-center", action="store_true", help="centre the noise at the formula eta0")
    s.add_argument("--rate", type=float, default=2.57, help="speaking rate, words per second")
    s.add_argument("--price", type=float, default=0.0006, help="USD per second of audio")
    s.add_argument("--out", help="write the noise plan JSON here")
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("run", parents=[common], help="run the full pipeline")
    s.add_argument("--clients", choices=("mock", "http"), default="mock")
    s.add_argument("--endpoint", action="append", help="provider URL (repeat per provider)")
    s.add_argument("--segments", required=True, help="JSON list of {id, text[, start_s, end_s]}")
    s.add_argument("--transcript", help="offline transcript; defaults to the joined segment texts")
    s.add_argument("--dummy-corpus", required=True)
    s.add_argument("--wav", help="source audio, sent as WAV slices to http providers")
    s.add_argument("--keywords")
    s.add_argument("--baseline", help="directory of .txt files for TF-IDF")
    s.add_argument("--epsilon", type=float, default=1.0)
    s.add_argument("--delta", type=float, default=0.05)
    s.add_argument("--distance", type=int, default=2)
    s.add_argument("--providers", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--score", type=float, default=0.9)
    s.add_argument("--no-scrub", action="store_true")
    s.add_argument("--m-percentile", type=float, default=0.2)
    s.add_argument("--tfidf-threshold", type=float, default=5.0)
    s.add_argument("--out-of-domain", type=int, default=0)
    s.add_argument("--k-max", type=int, default=8)
    s.add_argument("--p-sub", type=float, default=0.0, help="mock word substitution rate")
    s.add_argument("--voice-mode", default="none", choices=("none", "cloning", "one_to_one", "many_to_one"))
    s.add_argument("--out-dir", default="run-out")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("evaluate", parents=[common], help="WER and stylometry distance between transcripts")
    s.add_argument("--reference", required=True)
    s.add_argument("--hypothesis", required=True)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--out")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("attack", parents=[common], help="re-ordering and next-segment attacks on a provider view")
    s.add_argument("--sends", required=True, help="provider-N.json written by 'run'")
    s.add_argument("--manifest", required=True, help="manifest.json, used only for scoring")
    s.add_argument("--provider", type=int, default=0)
    s.add_argument("--lm-corpus", required=True, help="auxiliary text for the attacker's LM, one segment per line")
    s.add_argument("--order", type=int, default=3)
    s.add_argument("--alpha", type=float, default=0.1)
    s.add_argument("--trials", type=int, default=50)
    s.set_defaults(func=cmd_attack)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    from .errors import PrivscribeError

    try:
        return args.func(args)
    except (PrivscribeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
