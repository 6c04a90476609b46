"""QA accuracy, detector quality on labeled corpora, and report emission.

Accuracy is the plain proportion of correct answers (indicator mean) with
optional case/whitespace normalization. Detector quality reinterprets stored
pair scores at an arbitrary threshold so a single scored corpus supports
threshold sweeps. Emission produces byte-stable JSON and CSV.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

from veriscope import jsonio
from veriscope.errors import UsageError
from veriscope.faithfulness import FaithfulnessReport

FORMAT_JSON = "json"
FORMAT_CSV = "csv"


@dataclass(frozen=True)
class AccuracyResult:
    n: int
    correct: int
    accuracy: float


@dataclass(frozen=True)
class DetectorQuality:
    threshold: float
    true_positives: int
    false_positives: int
    true_negatives: int
    false_negatives: int
    precision: float
    recall: float


def derive_qa_ids(gold) -> list[str]:
    """Stable ids for gold QA rows: "<video_id>#<occurrence>" in file order.

    The occurrence counter disambiguates the (common) case of several
    questions about the same video.
    """
    seen: dict = {}
    ids = []
    for row in gold:
        occurrence = seen.get(row.video_id, 0)
        seen[row.video_id] = occurrence + 1
        ids.append(f"{row.video_id}#{occurrence}")
    return ids


def _normalize_answer(text: str) -> str:
    return text.strip().lower()


def accuracy(predictions, gold, normalize: bool = True) -> AccuracyResult:
    """Proportion of predicted answers equal to gold answers.

    ``predictions`` is a list of (id, answer) keyed by the derived gold ids;
    the id sets must match one-to-one. With ``normalize`` (default) both
    sides are lowercased and whitespace-trimmed before comparison; without
    it the match is literal string equality.
    """
    gold = list(gold)
    if not gold:
        raise UsageError("gold set is empty")
    ids = derive_qa_ids(gold)
    by_id: dict = {}
    for pid, answer in predictions:
        if pid in by_id:
            raise UsageError(f"duplicate prediction id {pid!r}")
        by_id[pid] = answer
    if set(by_id) != set(ids):
        missing = sorted(set(ids) - set(by_id))
        unknown = sorted(set(by_id) - set(ids))
        raise UsageError(
            "prediction ids do not align with gold rows"
            + (f"; missing {missing[:5]}" if missing else "")
            + (f"; unknown {unknown[:5]}" if unknown else "")
        )
    correct = 0
    for pid, row in zip(ids, gold):
        answer = by_id[pid]
        expected = row.answer
        if normalize:
            answer = _normalize_answer(answer)
            expected = _normalize_answer(expected)
        if answer == expected:
            correct += 1
    return AccuracyResult(n=len(gold), correct=correct, accuracy=correct / len(gold))


def detector_quality(scored, labels, threshold: float) -> DetectorQuality:
    """Confusion matrix with hallucination as the positive class.

    Predicted positive means score < threshold (re-derived here, so the
    threshold may differ from the one the scores were first classified at).
    0/0 precision or recall is defined as 1.0.
    """
    if not 0.0 <= threshold <= 1.0:
        raise UsageError(f"threshold must be in [0, 1], got {threshold}")
    label_map: dict = {}
    for pid, flag in labels:
        if pid in label_map:
            raise UsageError(f"duplicate label id {pid!r}")
        label_map[pid] = flag
    scored = list(scored)
    scored_ids = [s.id for s in scored]
    if len(set(scored_ids)) != len(scored_ids):
        raise UsageError("duplicate ids among scored pairs")
    if set(scored_ids) != set(label_map):
        raise UsageError("scored pair ids do not align with label ids")
    tp = fp = tn = fn = 0
    for s in scored:
        predicted = s.score < threshold
        actual = label_map[s.id]
        if predicted and actual:
            tp += 1
        elif predicted:
            fp += 1
        elif actual:
            fn += 1
        else:
            tn += 1
    precision = tp / (tp + fp) if (tp + fp) else 1.0
    recall = tp / (tp + fn) if (tp + fn) else 1.0
    return DetectorQuality(
        threshold=threshold,
        true_positives=tp,
        false_positives=fp,
        true_negatives=tn,
        false_negatives=fn,
        precision=precision,
        recall=recall,
    )


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def report_to_obj(report):
    """JSON-ready dict for any report kind emit_report accepts."""
    if isinstance(report, FaithfulnessReport):
        return {
            "threshold": report.threshold,
            "n": report.n,
            "corpus_mean": report.corpus_mean,
            "pairs": [
                {"id": p.id, "score": p.score, "hallucination": p.hallucination}
                for p in report.pairs
            ],
        }
    if isinstance(report, AccuracyResult):
        return {"n": report.n, "correct": report.correct, "accuracy": report.accuracy}
    if isinstance(report, DetectorQuality):
        return {
            "threshold": report.threshold,
            "true_positives": report.true_positives,
            "false_positives": report.false_positives,
            "true_negatives": report.true_negatives,
            "false_negatives": report.false_negatives,
            "precision": report.precision,
            "recall": report.recall,
        }
    if isinstance(report, list):  # per-caption mitigation dicts
        n = len(report)
        before = sum(r["grounded_fraction_before"] for r in report)
        after = sum(r["grounded_fraction_after"] for r in report)
        return {
            "n": n,
            "mean_grounded_fraction_before": before / n if n else 1.0,
            "mean_grounded_fraction_after": after / n if n else 1.0,
            "captions": report,
        }
    raise UsageError(f"cannot serialize report of type {type(report).__name__}")


def _b(flag: bool) -> str:
    return "true" if flag else "false"


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def report_to_csv(report) -> str:
    ff = jsonio.format_float
    if isinstance(report, FaithfulnessReport):
        rows = [["id", "score", "hallucination"]]
        rows += [[p.id, ff(p.score), _b(p.hallucination)] for p in report.pairs]
        return _csv_text(rows)
    if isinstance(report, AccuracyResult):
        return _csv_text(
            [["n", "correct", "accuracy"], [str(report.n), str(report.correct), ff(report.accuracy)]]
        )
    if isinstance(report, DetectorQuality):
        return _csv_text(
            [
                ["threshold", "tp", "fp", "tn", "fn", "precision", "recall"],
                [
                    ff(report.threshold),
                    str(report.true_positives),
                    str(report.false_positives),
                    str(report.true_negatives),
                    str(report.false_negatives),
                    ff(report.precision),
                    ff(report.recall),
                ],
            ]
        )
    if isinstance(report, list):
        rows = [
            ["id", "changed", "iterations", "grounded_fraction_before", "grounded_fraction_after"]
        ]
        rows += [
            [
                r["id"],
                _b(r["changed"]),
                str(r["iterations"]),
                ff(r["grounded_fraction_before"]),
                ff(r["grounded_fraction_after"]),
            ]
            for r in report
        ]
        return _csv_text(rows)
    raise UsageError(f"cannot serialize report of type {type(report).__name__}")


def emit_report(report, format: str, path: str | Path) -> None:
    """Write one report file; identical inputs yield byte-identical files."""
    if format == FORMAT_JSON:
        jsonio.write_json_atomic(path, report_to_obj(report))
    elif format == FORMAT_CSV:
        jsonio.write_text_atomic(path, report_to_csv(report))
    else:
        raise UsageError(f"unknown report format {format!r}")
