"""Accuracy, detector quality, and deterministic report emission."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from veriscope.corpus import QAPair, SynthSpec, forge_synthetic
from veriscope.embedding import EmbedderSpec
from veriscope.errors import UsageError
from veriscope.faithfulness import PairScore, score_corpus
from veriscope.metrics import (
    AccuracyResult,
    DetectorQuality,
    accuracy,
    derive_qa_ids,
    detector_quality,
    emit_report,
    report_to_csv,
    report_to_obj,
)

GOLD = [
    QAPair(video_id="v1", question="q0", answer="surfboard"),
    QAPair(video_id="v1", question="q1", answer="beach"),
    QAPair(video_id="v2", question="q0", answer="vegetables"),
    QAPair(video_id="v2", question="q1", answer="kitchen"),
    QAPair(video_id="v2", question="q2", answer="food"),
]


def test_derive_qa_ids_counts_occurrences():
    assert derive_qa_ids(GOLD) == ["v1#0", "v1#1", "v2#0", "v2#1", "v2#2"]


def test_three_of_five_is_exactly_point_six():
    predictions = [
        ("v1#0", "surfboard"),
        ("v1#1", "mountain"),  # wrong
        ("v2#0", "vegetables"),
        ("v2#1", "garage"),  # wrong
        ("v2#2", "food"),
    ]
    result = accuracy(predictions, GOLD)
    assert result == AccuracyResult(n=5, correct=3, accuracy=0.6)
    assert result.accuracy * result.n == result.correct


def test_normalization_toggle():
    gold = [QAPair(video_id="v", question="q", answer="yes")]
    assert accuracy([("v#0", "Yes ")], gold, normalize=True).correct == 1
    assert accuracy([("v#0", "Yes ")], gold, normalize=False).correct == 0
    assert accuracy([("v#0", "yes")], gold, normalize=False).correct == 1


def test_accuracy_identity():
    predictions = list(zip(derive_qa_ids(GOLD), (row.answer for row in GOLD)))
    assert accuracy(predictions, GOLD).accuracy == 1.0


def test_accuracy_alignment_errors():
    with pytest.raises(UsageError):
        accuracy([("v1#0", "x")], GOLD)  # missing ids
    with pytest.raises(UsageError):
        accuracy(
            [(pid, "x") for pid in derive_qa_ids(GOLD)] + [("v9#0", "x")], GOLD
        )  # unknown id
    with pytest.raises(UsageError):
        accuracy([("v1#0", "x"), ("v1#0", "y")], GOLD[:1])  # duplicate
    with pytest.raises(UsageError):
        accuracy([], [])  # empty gold


def test_detector_quality_perfect_on_forged_corpus():
    labeled = forge_synthetic(SynthSpec(seed=42, n_pairs=120, hallucination_rate=0.5))
    report = score_corpus([p for p, _ in labeled], EmbedderSpec())
    labels = [(pair.id, label) for pair, label in labeled]
    quality = detector_quality(report.pairs, labels, threshold=0.5)
    assert quality.false_positives == 0 and quality.false_negatives == 0
    assert quality.precision == 1.0 and quality.recall == 1.0
    total = (
        quality.true_positives
        + quality.false_positives
        + quality.true_negatives
        + quality.false_negatives
    )
    assert total == 120


def test_detector_quality_threshold_zero_boundary():
    scored = [PairScore("a", 0.9, False), PairScore("b", 0.1, True)]
    labels = [("a", False), ("b", True)]
    quality = detector_quality(scored, labels, threshold=0.0)
    # no score is < 0, so nothing is predicted positive
    assert quality.true_positives == 0 and quality.false_positives == 0
    assert quality.recall == 0.0  # one real positive was missed
    assert quality.precision == 1.0  # vacuous 0/0


def test_detector_quality_sweep_matches_recount():
    labeled = forge_synthetic(SynthSpec(seed=42, n_pairs=80, hallucination_rate=0.5))
    report = score_corpus([p for p, _ in labeled], EmbedderSpec())
    labels = dict((pair.id, label) for pair, label in labeled)
    for threshold in (0.3, 0.5, 0.7):
        quality = detector_quality(report.pairs, list(labels.items()), threshold)
        tp = sum(1 for s in report.pairs if s.score < threshold and labels[s.id])
        fp = sum(1 for s in report.pairs if s.score < threshold and not labels[s.id])
        fn = sum(1 for s in report.pairs if s.score >= threshold and labels[s.id])
        tn = sum(1 for s in report.pairs if s.score >= threshold and not labels[s.id])
        assert (quality.true_positives, quality.false_positives) == (tp, fp)
        assert (quality.true_negatives, quality.false_negatives) == (tn, fn)


def test_detector_quality_alignment_errors():
    scored = [PairScore("a", 0.9, False)]
    with pytest.raises(UsageError):
        detector_quality(scored, [("b", True)], 0.5)
    with pytest.raises(UsageError):
        detector_quality(scored, [("a", True), ("a", False)], 0.5)
    with pytest.raises(UsageError):
        detector_quality(scored, [("a", True)], 1.5)


@given(
    st.lists(
        st.tuples(st.floats(min_value=0.0, max_value=1.0, allow_nan=False), st.booleans()),
        min_size=1,
        max_size=50,
    ),
    st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
)
@settings(max_examples=80, deadline=None)
def test_confusion_matrix_completeness(rows, threshold):
    scored = [PairScore(f"p{i}", score, score < threshold) for i, (score, _) in enumerate(rows)]
    labels = [(f"p{i}", flag) for i, (_, flag) in enumerate(rows)]
    q = detector_quality(scored, labels, threshold)
    assert (
        q.true_positives + q.false_positives + q.true_negatives + q.false_negatives
        == len(rows)
    )
    assert 0.0 <= q.precision <= 1.0 and 0.0 <= q.recall <= 1.0


# --- emission ----------------------------------------------------------------


def _sample_faithfulness():
    labeled = forge_synthetic(SynthSpec(seed=5, n_pairs=2, hallucination_rate=0.5))
    return score_corpus([p for p, _ in labeled], EmbedderSpec())


def test_emit_json_is_byte_stable(tmp_path):
    report = _sample_faithfulness()
    emit_report(report, "json", tmp_path / "a.json")
    emit_report(report, "json", tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_emit_json_round_trips_floats(tmp_path):
    report = _sample_faithfulness()
    emit_report(report, "json", tmp_path / "r.json")
    parsed = json.loads((tmp_path / "r.json").read_text(encoding="utf-8"))
    assert parsed["corpus_mean"] == report.corpus_mean
    assert parsed["n"] == report.n
    for row, scored in zip(parsed["pairs"], report.pairs):
        assert row["score"] == scored.score
        assert row["hallucination"] == scored.hallucination


def test_faithfulness_csv_layout(tmp_path):
    report = _sample_faithfulness()
    emit_report(report, "csv", tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "id,score,hallucination"
    assert len(lines) == 3  # header + 2 pairs


def test_accuracy_report_layouts(tmp_path):
    result = AccuracyResult(n=5, correct=3, accuracy=0.6)
    assert report_to_obj(result) == {"n": 5, "correct": 3, "accuracy": 0.6}
    lines = report_to_csv(result).splitlines()
    assert lines[0] == "n,correct,accuracy"
    assert lines[1].startswith("5,3,0.5999999999999999")


def test_quality_csv_layout():
    quality = DetectorQuality(
        threshold=0.5,
        true_positives=3,
        false_positives=1,
        true_negatives=4,
        false_negatives=0,
        precision=0.75,
        recall=1.0,
    )
    lines = report_to_csv(quality).splitlines()
    assert lines[0] == "threshold,tp,fp,tn,fn,precision,recall"
    assert lines[1] == "0.5,3,1,4,0,0.75,1.0"


def test_mitigation_report_list_emission(tmp_path):
    rows = [
        {
            "id": "c0",
            "original": "x",
            "revised": "y.",
            "iterations": 1,
            "changed": True,
            "grounded_fraction_before": 0.0,
            "grounded_fraction_after": 1.0,
            "reviser_fallback": False,
            "claims": [],
        }
    ]
    obj = report_to_obj(rows)
    assert obj["n"] == 1
    assert obj["mean_grounded_fraction_before"] == 0.0
    assert obj["mean_grounded_fraction_after"] == 1.0
    lines = report_to_csv(rows).splitlines()
    assert lines[0] == "id,changed,iterations,grounded_fraction_before,grounded_fraction_after"
    assert lines[1] == "c0,true,1,0.0,1.0"
    emit_report(rows, "json", tmp_path / "m.json")
    parsed = json.loads((tmp_path / "m.json").read_text(encoding="utf-8"))
    assert parsed["captions"][0]["id"] == "c0"


def test_emit_unknown_format_rejected(tmp_path):
    with pytest.raises(UsageError):
        emit_report(AccuracyResult(1, 1, 1.0), "xml", tmp_path / "r.xml")
