"""Command-line entry points: detect, mitigate, evaluate, synth, validate-dataset.

Configuration precedence is flag > environment > config file > built-in
default. Exit codes are a stable contract: 0 success, 1 usage or I/O error,
2 detection-positive (corpus mean faithfulness below threshold), 3 strict
validation failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from veriscope import corpus as corpus_io
from veriscope import jsonio, metrics, mitigation
from veriscope.clients import EmbeddingClient, ProviderConfig
from veriscope.embedding import DETERMINISTIC_HASH, REMOTE, EmbedderSpec, embed_texts
from veriscope.errors import (
    ContractViolation,
    DatasetValidationError,
    ProviderUnavailable,
    UsageError,
    VeriscopeError,
)
from veriscope.faithfulness import CaptionPair, score_corpus
from veriscope.kb import SOURCE_REFERENCE, build_session_kb
from veriscope.mitigation import split_claims

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DETECTED = 2
EXIT_VALIDATION = 3

ENV_EMBED_ENDPOINT = "VERISCOPE_EMBED_ENDPOINT"
ENV_GEN_ENDPOINT = "VERISCOPE_GEN_ENDPOINT"
ENV_TIMEOUT_MS = "VERISCOPE_TIMEOUT_MS"

_DEFAULTS = {
    "embedder": "hash",
    "dim": 256,
    "threshold": 0.5,
    "tau_g": 0.5,
    "k": 5,
    "max_iter": 3,
    "reviser": "stub",
    "format": "both",
    "strict": False,
    "normalize": True,
    "out": "veriscope-out",
    "seed": 42,
    "n": 100,
    "rate": 0.5,
    "embed_endpoint": None,
    "gen_endpoint": None,
    "timeout_ms": 30000,
    "max_retries": 2,
    "backoff_ms": 250,
    "corpus": None,
    "captions": None,
    "predictions": None,
    "qa": None,
    "base_sentences": None,
    "substitution_lexicon": None,
    "appendix_pool": None,
}

_CONFIG_TYPES = {
    "embedder": str,
    "dim": int,
    "threshold": (int, float),
    "tau_g": (int, float),
    "k": int,
    "max_iter": int,
    "reviser": str,
    "format": str,
    "strict": bool,
    "normalize": bool,
    "out": str,
    "seed": int,
    "n": int,
    "rate": (int, float),
    "embed_endpoint": str,
    "gen_endpoint": str,
    "timeout_ms": int,
    "max_retries": int,
    "backoff_ms": int,
    "corpus": str,
    "captions": str,
    "predictions": str,
    "qa": str,
    "base_sentences": list,
    "substitution_lexicon": list,
    "appendix_pool": list,
}


@dataclass
class RunConfig:
    command: str
    embedder: str
    dim: int
    threshold: float
    tau_g: float
    k: int
    max_iter: int
    reviser: str
    format: str
    strict: bool
    normalize: bool
    out: Path
    seed: int
    n: int
    rate: float
    embed_endpoint: str | None
    gen_endpoint: str | None
    timeout_ms: int
    max_retries: int
    backoff_ms: int
    corpus: str | None
    captions: str | None
    predictions: str | None
    qa: str | None
    base_sentences: tuple | None
    substitution_lexicon: tuple | None
    appendix_pool: tuple | None


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage, which collides with the
    # detection-positive exit code; route parse errors through UsageError
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file mirroring the run options")
    common.add_argument("--embedder", choices=["hash", "remote"], default=None)
    common.add_argument("--dim", type=int, default=None, help="embedding dimension (default 256)")
    common.add_argument("--threshold", type=float, default=None, help="hallucination threshold (default 0.5)")
    common.add_argument("--tau-g", dest="tau_g", type=float, default=None, help="grounding threshold (default 0.5)")
    common.add_argument("--k", type=int, default=None, help="evidence hits per claim (default 5)")
    common.add_argument("--max-iter", dest="max_iter", type=int, default=None, help="revision budget (default 3)")
    common.add_argument("--reviser", choices=["stub", "llm"], default=None)
    common.add_argument("--format", choices=["json", "csv", "both"], default=None)
    common.add_argument("--strict", action="store_true", default=None, help="abort/flag on dataset defects")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--embed-endpoint", dest="embed_endpoint", default=None)
    common.add_argument("--gen-endpoint", dest="gen_endpoint", default=None)
    common.add_argument("--timeout-ms", dest="timeout_ms", type=int, default=None)
    common.add_argument("--max-retries", dest="max_retries", type=int, default=None)
    common.add_argument("--backoff-ms", dest="backoff_ms", type=int, default=None)

    parser = _Parser(prog="veriscope", description="Caption hallucination detection and post-hoc RAG mitigation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", parents=[common], help="score generated captions against references")
    p.add_argument("--corpus", default=None, help="forged corpus JSON (id/generated/reference/label rows)")
    p.add_argument("--captions", default=None, help="reference captions JSON (video id -> duration/timestamps/sentences)")
    p.add_argument("--predictions", default=None, help="generated captions JSON (video id -> list of captions)")

    p = sub.add_parser("mitigate", parents=[common], help="verify and revise captions against per-video evidence")
    p.add_argument("--corpus", default=None)
    p.add_argument("--captions", default=None)
    p.add_argument("--predictions", default=None)

    p = sub.add_parser("evaluate", parents=[common], help="QA answer accuracy")
    p.add_argument("--qa", default=None, help="gold QA JSON (list of video_id/question/answer rows)")
    p.add_argument("--predictions", default=None, help="predicted answers JSON keyed by '<video_id>#<occurrence>'")
    p.add_argument("--no-normalize", dest="normalize", action="store_false", default=None,
                   help="require literal string equality instead of case/whitespace-insensitive match")

    p = sub.add_parser("synth", parents=[common], help="forge a labeled synthetic corpus")
    p.add_argument("--n", type=int, default=None, help="number of pairs (default 100)")
    p.add_argument("--rate", type=float, default=None, help="hallucination rate (default 0.5)")

    p = sub.add_parser("validate-dataset", parents=[common], help="check dataset files and print stats")
    p.add_argument("--captions", default=None)
    p.add_argument("--qa", default=None)

    return parser


def _load_config_file(path) -> dict:
    try:
        raw = jsonio.read_json(path)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError(f"config {path} must be a JSON object")
    unknown = sorted(set(raw) - set(_CONFIG_TYPES))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    for key, value in raw.items():
        if value is not None and not isinstance(value, _CONFIG_TYPES[key]):
            raise UsageError(f"config key {key!r} has wrong type {type(value).__name__}")
        if isinstance(value, bool) and _CONFIG_TYPES[key] is int:
            raise UsageError(f"config key {key!r} has wrong type bool")
    return raw


def _env_int(name: str):
    raw = os.environ.get(name)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"{name} must be an integer, got {raw!r}") from exc


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags, environment, config file, and defaults (in that order)."""
    file_cfg = _load_config_file(args.config) if getattr(args, "config", None) else {}
    env = {
        "embed_endpoint": os.environ.get(ENV_EMBED_ENDPOINT),
        "gen_endpoint": os.environ.get(ENV_GEN_ENDPOINT),
        "timeout_ms": _env_int(ENV_TIMEOUT_MS),
    }

    def pick(name):
        value = getattr(args, name, None)
        if value is None:
            value = env.get(name)
        if value is None:
            value = file_cfg.get(name)
        if value is None:
            value = _DEFAULTS[name]
        return value

    cfg = RunConfig(
        command=args.command,
        embedder=pick("embedder"),
        dim=pick("dim"),
        threshold=float(pick("threshold")),
        tau_g=float(pick("tau_g")),
        k=pick("k"),
        max_iter=pick("max_iter"),
        reviser=pick("reviser"),
        format=pick("format"),
        strict=bool(pick("strict")),
        normalize=bool(pick("normalize")),
        out=Path(pick("out")),
        seed=pick("seed"),
        n=pick("n"),
        rate=float(pick("rate")),
        embed_endpoint=pick("embed_endpoint"),
        gen_endpoint=pick("gen_endpoint"),
        timeout_ms=pick("timeout_ms"),
        max_retries=pick("max_retries"),
        backoff_ms=pick("backoff_ms"),
        corpus=pick("corpus"),
        captions=pick("captions"),
        predictions=pick("predictions"),
        qa=pick("qa"),
        base_sentences=tuple(file_cfg["base_sentences"]) if file_cfg.get("base_sentences") else None,
        substitution_lexicon=tuple(map(tuple, file_cfg["substitution_lexicon"]))
        if file_cfg.get("substitution_lexicon")
        else None,
        appendix_pool=tuple(file_cfg["appendix_pool"]) if file_cfg.get("appendix_pool") else None,
    )
    if cfg.embedder not in ("hash", "remote"):
        raise UsageError(f"embedder must be 'hash' or 'remote', got {cfg.embedder!r}")
    if cfg.reviser not in ("stub", "llm"):
        raise UsageError(f"reviser must be 'stub' or 'llm', got {cfg.reviser!r}")
    if cfg.format not in ("json", "csv", "both"):
        raise UsageError(f"format must be json, csv, or both, got {cfg.format!r}")
    return cfg


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------


def _embedder(cfg: RunConfig):
    """(EmbedderSpec, optional shared client) for this run."""
    if cfg.embedder == "hash":
        return EmbedderSpec(kind=DETERMINISTIC_HASH, dim=cfg.dim), None
    if not cfg.embed_endpoint:
        raise UsageError(
            f"remote embedder needs an endpoint (--embed-endpoint, {ENV_EMBED_ENDPOINT}, or config)"
        )
    spec = EmbedderSpec(kind=REMOTE, dim=cfg.dim, endpoint=cfg.embed_endpoint)
    client = EmbeddingClient(
        ProviderConfig(
            endpoint=cfg.embed_endpoint,
            timeout_ms=cfg.timeout_ms,
            max_retries=cfg.max_retries,
            backoff_base_ms=cfg.backoff_ms,
        )
    )
    return spec, client


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _emit(cfg: RunConfig, report, name: str) -> list[Path]:
    formats = ("json", "csv") if cfg.format == "both" else (cfg.format,)
    paths = []
    for fmt in formats:
        path = cfg.out / f"{name}.{fmt}"
        metrics.emit_report(report, fmt, path)
        paths.append(path)
    return paths


def _read_predictions_map(path) -> dict:
    try:
        raw = jsonio.read_json(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError(f"{path}: predictions must be an object keyed by video id")
    for key, value in raw.items():
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise UsageError(f"{path}: predictions for {key!r} must be a list of strings")
    return raw


def _load_pairs(cfg: RunConfig):
    """Caption pairs plus, for each pair id, the KB sentence texts backing it."""
    if cfg.corpus and (cfg.captions or cfg.predictions):
        raise UsageError("pass either --corpus or --captions/--predictions, not both")
    if cfg.corpus:
        labeled = corpus_io.load_forged_corpus(cfg.corpus)
        pairs = [pair for pair, _ in labeled]
        kb_texts = {}
        ref_keys: dict = {}
        for pair in pairs:
            if pair.reference not in ref_keys:
                ref_keys[pair.reference] = f"ref{len(ref_keys)}"
            sentences = tuple(split_claims(pair.reference)) or (pair.reference,)
            kb_texts[pair.id] = (ref_keys[pair.reference], sentences)
        return pairs, kb_texts
    if cfg.captions and cfg.predictions:
        records, issues = corpus_io.load_captions(cfg.captions, strict=cfg.strict)
        for issue in issues:
            _warn(f"skipped: {issue}")
        predictions = _read_predictions_map(cfg.predictions)
        pairs, coverage = corpus_io.pairs_from_records(records, predictions)
        print(f"coverage: paired={coverage.paired_events}/{coverage.total_events}")
        by_video = {r.video_id: r for r in records}
        kb_texts = {}
        for pair in pairs:
            video_id = pair.id.rsplit("#", 1)[0]
            record = by_video[video_id]
            sentences = []
            for event in record.events:
                sentences.extend(split_claims(event.caption) or [event.caption])
            kb_texts[pair.id] = (video_id, tuple(sentences))
        return pairs, kb_texts
    raise UsageError("need --corpus, or --captions together with --predictions")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_detect(cfg: RunConfig) -> int:
    pairs, _ = _load_pairs(cfg)
    spec, client = _embedder(cfg)
    report = score_corpus(pairs, spec, threshold=cfg.threshold, client=client)
    written = _emit(cfg, report, "faithfulness_report")
    print(
        f"n={report.n} corpus_mean={report.corpus_mean} "
        f"hallucinations={report.hallucination_count} threshold={report.threshold}"
    )
    for path in written:
        print(f"wrote {path}")
    return EXIT_DETECTED if report.corpus_mean < cfg.threshold else EXIT_OK


def _build_kb(key: str, sentences, spec, client, cache: dict):
    if key in cache:
        return cache[key]
    embeddings = embed_texts(list(sentences), spec, client=client)
    kb = build_session_kb(
        key, [(emb, text, SOURCE_REFERENCE, None) for emb, text in zip(embeddings, sentences)]
    )
    cache[key] = kb
    return kb


def cmd_mitigate(cfg: RunConfig) -> int:
    pairs, kb_texts = _load_pairs(cfg)
    if not pairs:
        raise UsageError("no caption pairs to mitigate")
    spec, client = _embedder(cfg)
    gen_cfg = None
    if cfg.reviser == "llm":
        if not cfg.gen_endpoint:
            raise UsageError(
                f"llm reviser needs a generation endpoint (--gen-endpoint, {ENV_GEN_ENDPOINT}, or config)"
            )
        gen_cfg = ProviderConfig(
            endpoint=cfg.gen_endpoint,
            timeout_ms=cfg.timeout_ms,
            max_retries=cfg.max_retries,
            backoff_base_ms=cfg.backoff_ms,
        )

    before = score_corpus(pairs, spec, threshold=cfg.threshold, client=client)
    written = _emit(cfg, before, "detect_before")

    kb_cache: dict = {}
    reports = []
    revised_pairs = []
    fallbacks = 0
    for pair in pairs:
        key, sentences = kb_texts[pair.id]
        kb = _build_kb(key, sentences, spec, client, kb_cache)
        outcome = mitigation.mitigate(
            pair.generated,
            kb,
            spec,
            k=cfg.k,
            tau_g=cfg.tau_g,
            max_iter=cfg.max_iter,
            reviser=cfg.reviser,
            gen_cfg=gen_cfg,
            client=client,
        )
        reports.append(mitigation.mitigation_report(pair.id, outcome))
        revised_pairs.append(
            CaptionPair(id=pair.id, generated=outcome.revised, reference=pair.reference)
        )
        if outcome.fallback_used:
            fallbacks += 1

    written += _emit(cfg, reports, "mitigation_report")
    after = score_corpus(revised_pairs, spec, threshold=cfg.threshold, client=client)
    written += _emit(cfg, after, "detect_after")
    summary = metrics.report_to_obj(reports)
    print(
        f"n={summary['n']} "
        f"mean_grounded_before={summary['mean_grounded_fraction_before']} "
        f"mean_grounded_after={summary['mean_grounded_fraction_after']} "
        f"detect_mean_before={before.corpus_mean} detect_mean_after={after.corpus_mean}"
    )
    for path in written:
        print(f"wrote {path}")
    if fallbacks:
        _warn(f"generation provider unavailable; {fallbacks} caption(s) revised via stub fallback")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig) -> int:
    if not cfg.qa or not cfg.predictions:
        raise UsageError("evaluate needs --qa and --predictions")
    gold, issues = corpus_io.load_qa(cfg.qa, strict=cfg.strict)
    for issue in issues:
        _warn(f"skipped: {issue}")
    try:
        raw = jsonio.read_json(cfg.predictions)
    except OSError as exc:
        raise UsageError(f"cannot read {cfg.predictions}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{cfg.predictions} is not valid JSON: {exc}") from exc
    if isinstance(raw, dict):
        predictions = list(raw.items())
    elif isinstance(raw, list):
        try:
            predictions = [(row["id"], row["answer"]) for row in raw]
        except (TypeError, KeyError) as exc:
            raise UsageError(
                f"{cfg.predictions}: prediction rows need 'id' and 'answer' fields"
            ) from exc
    else:
        raise UsageError(f"{cfg.predictions}: predictions must be an object or an array")
    result = metrics.accuracy(predictions, gold, normalize=cfg.normalize)
    written = _emit(cfg, result, "accuracy")
    print(f"n={result.n} correct={result.correct} accuracy={result.accuracy}")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_synth(cfg: RunConfig) -> int:
    spec = corpus_io.SynthSpec(
        seed=cfg.seed,
        n_pairs=cfg.n,
        hallucination_rate=cfg.rate,
        substitution_lexicon=cfg.substitution_lexicon or corpus_io.DEFAULT_SUBSTITUTION_LEXICON,
        appendix_pool=cfg.appendix_pool or corpus_io.DEFAULT_APPENDIX_POOL,
    )
    bases = cfg.base_sentences or corpus_io.DEFAULT_BASE_SENTENCES
    labeled = corpus_io.forge_synthetic(spec, bases)
    path = cfg.out / "synth_corpus.json"
    jsonio.write_json_atomic(path, corpus_io.forged_corpus_to_obj(labeled))
    hallucinated = sum(1 for _, label in labeled if label)
    print(f"n={len(labeled)} hallucinated={hallucinated} seed={cfg.seed} rate={cfg.rate}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_validate_dataset(cfg: RunConfig) -> int:
    if not cfg.captions and not cfg.qa:
        raise UsageError("validate-dataset needs --captions and/or --qa")
    all_issues = []
    if cfg.captions:
        records, issues = corpus_io.load_captions(cfg.captions, strict=False)
        all_issues.extend(issues)
        stats = corpus_io.dataset_stats(records)
        print(
            f"captions: videos={stats['videos']} events={stats['events']} "
            f"mean_caption_words={stats['mean_caption_words']:.3f} "
            f"mean_duration_s={stats['mean_duration_s']:.3f}"
        )
    if cfg.qa:
        qa_pairs, issues = corpus_io.load_qa(cfg.qa, strict=False)
        all_issues.extend(issues)
        stats = corpus_io.qa_stats(qa_pairs)
        print(f"qa: pairs={stats['pairs']} videos={stats['videos']}")
    for issue in all_issues:
        print(f"defect: {issue}")
    print(f"defects={len(all_issues)}")
    if cfg.strict and all_issues:
        return EXIT_VALIDATION
    return EXIT_OK


_HANDLERS = {
    "detect": cmd_detect,
    "mitigate": cmd_mitigate,
    "evaluate": cmd_evaluate,
    "synth": cmd_synth,
    "validate-dataset": cmd_validate_dataset,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        return _HANDLERS[args.command](cfg)
    except DatasetValidationError as exc:
        for issue in exc.issues:
            print(f"error: {issue}", file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (UsageError, ProviderUnavailable, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VeriscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
