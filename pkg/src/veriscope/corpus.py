"""Dataset ingestion, validation, and the seeded synthetic corpus forge.

Readers accept ActivityNet-Captions-style files (top-level object keyed by
video id with parallel ``timestamps``/``sentences`` arrays) and QA files
(list of ``{"video_id", "question", "answer"}`` rows). Validation issues are
collected per record; strict mode aborts on the first pass, lenient mode
skips defective records and reports them.

The forge builds labeled (generated, reference) caption pairs with injected
hallucinations so the detector and mitigator can be exercised without any
model in the loop. Output is a pure function of (spec, base sentences): the
only randomness source is ``random.Random(seed).random()``, whose sequence
is stable across Python versions and platforms for a given seed.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from veriscope import jsonio
from veriscope.errors import DatasetValidationError, GenerationError, UsageError
from veriscope.faithfulness import CaptionPair
from veriscope.kernels import tokenize

# ---------------------------------------------------------------------------
# bundled forge fixture
#
# Constructed so that, under the 256-bucket hashing embedder, every perturbed
# pair scores well below 0.5 while clean pairs score exactly 1.0:
#   - base sentences are exactly three distinct tokens each;
#   - every lexicon replacement is eight tokens sharing no hash bucket with
#     any base token (and none with each other within a sentence);
#   - pool sentences share no tokens with the bases.
# Changing any string here shifts the detector-separation margins; the test
# suite pins the resulting score band.
# ---------------------------------------------------------------------------

DEFAULT_BASE_SENTENCES = (
    "a man surfs",
    "dogs bark loudly",
    "children play soccer",
    "woman cooks pasta",
    "the crowd cheers",
    "gymnast flips twice",
    "rain falls outside",
    "a choir sings",
    "two cars race",
    "chef slices onions",
)

DEFAULT_SUBSTITUTION_LEXICON = (
    ("surfs", "contemplates prism quasar rhetoric beneath hexagonal marmalade scaffolding"),
    ("bark", "nebula glacial thermodynamics amid quill zeppelin origami festivals"),
    ("soccer", "obsidian harpsichord tournaments beneath tapestry cipher cathedral lantern"),
    ("cooks", "calibrates saffron trombone algorithms across vermilion asteroid glacier"),
    ("cheers", "mumbles cryptic limestone sonnets beneath turquoise pendulum whisper"),
    ("flips", "juggles porcelain thunderstorm equations over sonata saffron dunes"),
    ("falls", "orbits fractured mahogany telescopes inside mosaic quartz silos"),
    ("sings", "sketches molten accordion blueprints across cobalt meridian plains"),
    ("race", "negotiates spiral eucalyptus treaties beneath velvet gravity fountains"),
    ("slices", "lagoon prismatic bassoon echoes inside chartreuse granite grottos"),
)

DEFAULT_APPENDIX_POOL = (
    "meanwhile seventeen translucent walruses rehearse baroque telemetry hymns beneath perforated zinc observatory ember nightly",
    "an itinerant nomad alphabetizes forgotten umbrella factories while juggling obelisk tangerine chandeliers every alternate thursday",
    "subterranean parliaments of disgruntled teapots paradox nocturnal confetti raven despite vigorous opposition from sentient barometers",
    "eleven iridescent yaks meticulously embroider cryptographic tapestries depicting secret migration routes of abandoned indigo escalators",
)


@dataclass(frozen=True)
class CaptionEvent:
    start: float
    end: float
    caption: str


@dataclass(frozen=True)
class VideoRecord:
    video_id: str
    duration: float
    events: tuple

    def __post_init__(self):
        if not self.events:
            raise UsageError(f"{self.video_id}: a video record needs at least one event")
        for ev in self.events:
            if not (0.0 <= ev.start < ev.end <= self.duration):
                raise UsageError(
                    f"{self.video_id}: event interval [{ev.start}, {ev.end}] "
                    f"violates 0 <= start < end <= duration ({self.duration})"
                )


@dataclass(frozen=True)
class QAPair:
    video_id: str
    question: str
    answer: str

    def __post_init__(self):
        if not self.question:
            raise UsageError(f"{self.video_id}: empty question")
        if not self.answer:
            raise UsageError(f"{self.video_id}: empty answer")


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the forge; output is fully determined by these fields."""

    seed: int
    n_pairs: int
    hallucination_rate: float
    substitution_lexicon: tuple = field(default=DEFAULT_SUBSTITUTION_LEXICON)
    appendix_pool: tuple = field(default=DEFAULT_APPENDIX_POOL)

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if self.n_pairs < 1:
            raise UsageError("n_pairs must be >= 1")
        if not 0.0 <= self.hallucination_rate <= 1.0:
            raise UsageError("hallucination_rate must be in [0, 1]")
        object.__setattr__(self, "substitution_lexicon", tuple(map(tuple, self.substitution_lexicon)))
        object.__setattr__(self, "appendix_pool", tuple(self.appendix_pool))
        for token, replacement in self.substitution_lexicon:
            if token == replacement:
                raise UsageError(f"lexicon entry {token!r} replaces a token with itself")
        if self.hallucination_rate > 0.0:
            if not self.substitution_lexicon:
                raise UsageError("substitution_lexicon must be non-empty when rate > 0")
            if not self.appendix_pool:
                raise UsageError("appendix_pool must be non-empty when rate > 0")


# ---------------------------------------------------------------------------
# loaders
# ---------------------------------------------------------------------------


def _read(path):
    try:
        return jsonio.read_json(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _validate_video(video_id, value) -> list[str]:
    if not isinstance(video_id, str) or not video_id:
        return [f"{video_id!r}: video id must be a non-empty string"]
    if not isinstance(value, dict):
        return [f"{video_id}: record must be an object"]
    issues = []
    duration = value.get("duration")
    if not _is_number(duration):
        issues.append(f"{video_id}: non-numeric duration {duration!r}")
    timestamps = value.get("timestamps")
    sentences = value.get("sentences")
    if not isinstance(timestamps, list) or not isinstance(sentences, list):
        issues.append(f"{video_id}: timestamps and sentences must be arrays")
        return issues
    if len(timestamps) != len(sentences):
        issues.append(
            f"{video_id}: arity mismatch ({len(timestamps)} timestamps, {len(sentences)} sentences)"
        )
        return issues
    if not timestamps:
        issues.append(f"{video_id}: no events")
    for i, (ts, sentence) in enumerate(zip(timestamps, sentences)):
        if not (isinstance(ts, list) and len(ts) == 2 and all(_is_number(t) for t in ts)):
            issues.append(f"{video_id}: timestamp {i} must be a [start, end] number pair")
            continue
        start, end = ts
        if start >= end:
            issues.append(f"{video_id}: inverted interval [{start}, {end}] at event {i}")
        elif _is_number(duration) and not (0.0 <= start and end <= duration):
            issues.append(
                f"{video_id}: event {i} interval [{start}, {end}] outside [0, {duration}]"
            )
        if not isinstance(sentence, str):
            issues.append(f"{video_id}: sentence {i} must be a string")
    return issues


def load_captions(path: str | Path, strict: bool = True):
    """Read a captions file. Returns (records, issues).

    Strict mode raises DatasetValidationError when any record is defective;
    lenient mode skips defective records and reports them in ``issues``.
    """
    raw = _read(path)
    if not isinstance(raw, dict):
        raise UsageError(f"{path}: top level must be an object keyed by video id")
    records = []
    issues = []
    for video_id, value in raw.items():
        problems = _validate_video(video_id, value)
        if problems:
            issues.extend(problems)
            continue
        events = tuple(
            CaptionEvent(start=float(ts[0]), end=float(ts[1]), caption=sentence)
            for ts, sentence in zip(value["timestamps"], value["sentences"])
        )
        records.append(VideoRecord(video_id=video_id, duration=float(value["duration"]), events=events))
    if strict and issues:
        raise DatasetValidationError(issues)
    return records, issues


def load_qa(path: str | Path, strict: bool = True):
    """Read a QA file (list of {"video_id","question","answer"}). Returns (pairs, issues)."""
    raw = _read(path)
    if not isinstance(raw, list):
        raise UsageError(f"{path}: top level must be an array of QA rows")
    pairs = []
    issues = []
    for i, row in enumerate(raw):
        if not isinstance(row, dict):
            issues.append(f"row {i}: must be an object")
            continue
        video_id = row.get("video_id")
        question = row.get("question")
        answer = row.get("answer")
        problems = []
        if not isinstance(video_id, str) or not video_id:
            problems.append(f"row {i}: missing video_id")
        if not isinstance(question, str) or not question:
            problems.append(f"row {i}: empty question")
        if not isinstance(answer, str) or not answer:
            problems.append(f"row {i}: empty answer")
        if problems:
            issues.extend(problems)
            continue
        pairs.append(QAPair(video_id=video_id, question=question, answer=answer))
    if strict and issues:
        raise DatasetValidationError(issues)
    return pairs, issues


@dataclass(frozen=True)
class PairCoverage:
    total_events: int
    paired_events: int

    @property
    def fraction(self) -> float:
        return self.paired_events / self.total_events if self.total_events else 1.0


def pairs_from_records(records, predictions):
    """Align generated captions with reference events. Returns (pairs, coverage).

    ``predictions`` maps video_id -> list of generated captions, aligned by
    event index; fewer predictions than events leaves the tail unpaired and
    accounted for in the coverage stat. Pair ids are "<video_id>#<event_index>".
    """
    by_id = {r.video_id: r for r in records}
    for video_id in predictions:
        if video_id not in by_id:
            raise UsageError(f"prediction for unknown video id {video_id!r}")
    pairs = []
    total_events = sum(len(r.events) for r in records)
    for record in records:
        generated = predictions.get(record.video_id, [])
        if len(generated) > len(record.events):
            raise UsageError(
                f"{record.video_id}: {len(generated)} predictions for {len(record.events)} events"
            )
        for index, text in enumerate(generated):
            pairs.append(
                CaptionPair(
                    id=f"{record.video_id}#{index}",
                    generated=text,
                    reference=record.events[index].caption,
                )
            )
    return pairs, PairCoverage(total_events=total_events, paired_events=len(pairs))


def dataset_stats(records) -> dict:
    """Summary numbers the validator prints (counts and means, not assertions)."""
    n_events = sum(len(r.events) for r in records)
    words = sum(len(e.caption.split()) for r in records for e in r.events)
    return {
        "videos": len(records),
        "events": n_events,
        "mean_caption_words": words / n_events if n_events else 0.0,
        "mean_duration_s": sum(r.duration for r in records) / len(records) if records else 0.0,
    }


def qa_stats(pairs) -> dict:
    return {"pairs": len(pairs), "videos": len({p.video_id for p in pairs})}


# ---------------------------------------------------------------------------
# synthetic forge
# ---------------------------------------------------------------------------


def _index_draw(rng: random.Random, n: int) -> int:
    # random() is the one generator method with a cross-version stability
    # guarantee, so every draw (including index picks) goes through it
    return min(int(rng.random() * n), n - 1)


def _multiset(text: str) -> Counter:
    return Counter(tokenize(text))


def _substitute(reference: str, lexicon, rng: random.Random) -> str:
    words = reference.split()
    before = _multiset(reference)
    start = _index_draw(rng, len(lexicon))
    for offset in range(len(lexicon)):
        token, replacement = lexicon[(start + offset) % len(lexicon)]
        if token not in words:
            continue
        at = words.index(token)
        candidate = " ".join(words[:at] + [replacement] + words[at + 1 :])
        if _multiset(candidate) != before:
            return candidate
    raise GenerationError(
        f"no lexicon entry changes the token multiset of {reference!r}"
    )


def _append(reference: str, pool, rng: random.Random) -> str:
    before = _multiset(reference)
    start = _index_draw(rng, len(pool))
    for offset in range(len(pool)):
        sentence = pool[(start + offset) % len(pool)]
        candidate = f"{reference} {sentence}"
        if _multiset(candidate) != before:
            return candidate
    raise GenerationError(
        f"no pool sentence changes the token multiset of {reference!r}"
    )


def forge_synthetic(spec: SynthSpec, base_sentences=DEFAULT_BASE_SENTENCES):
    """Produce n_pairs labeled (CaptionPair, hallucinated) tuples.

    Per pair, draws come off one random.Random(seed) stream in a fixed order:
      1. reference index into base_sentences;
      2. hallucination coin against hallucination_rate;
      and only when the coin says hallucinate:
      3. mode coin (< 0.5 substitutes a lexicon token, else appends a pool
         sentence);
      4. start index for the candidate scan, which walks forward (wrapping)
         until the perturbation changes the token multiset.
    Labels are sound by construction: a true label means the generated text's
    token multiset differs from the reference's; a false label means the two
    strings are identical.
    """
    base_sentences = list(base_sentences)
    if not base_sentences:
        raise UsageError("base_sentences must be non-empty")
    rng = random.Random(spec.seed)
    out = []
    for i in range(spec.n_pairs):
        reference = base_sentences[_index_draw(rng, len(base_sentences))]
        hallucinated = rng.random() < spec.hallucination_rate
        if hallucinated:
            if rng.random() < 0.5:
                generated = _substitute(reference, spec.substitution_lexicon, rng)
            else:
                generated = _append(reference, spec.appendix_pool, rng)
        else:
            generated = reference
        out.append(
            (CaptionPair(id=f"synth#{i}", generated=generated, reference=reference), hallucinated)
        )
    return out


def forged_corpus_to_obj(labeled_pairs) -> list:
    return [
        {"id": pair.id, "generated": pair.generated, "reference": pair.reference, "label": label}
        for pair, label in labeled_pairs
    ]


def load_forged_corpus(path: str | Path):
    """Read a forge output file back into [(CaptionPair, label), ...]."""
    raw = _read(path)
    if not isinstance(raw, list):
        raise UsageError(f"{path}: forged corpus must be a JSON array")
    out = []
    for i, row in enumerate(raw):
        if not isinstance(row, dict):
            raise UsageError(f"{path}: row {i} must be an object")
        try:
            pair = CaptionPair(id=row["id"], generated=row["generated"], reference=row["reference"])
            label = row["label"]
        except KeyError as exc:
            raise UsageError(f"{path}: row {i} is missing key {exc}") from exc
        if not isinstance(label, bool):
            raise UsageError(f"{path}: row {i} label must be boolean")
        out.append((pair, label))
    return out
