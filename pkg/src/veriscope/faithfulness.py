"""Caption faithfulness scoring: per-pair cosine, threshold classification,
and corpus aggregation (mean over all generated/reference pairs).

A pair scores the cosine between the embeddings of its generated and
reference caption; scores below the threshold (default 0.5, strict
inequality) flag the caption as hallucinated.
"""

from __future__ import annotations

from dataclasses import dataclass

from veriscope.embedding import EmbedderSpec, cosine, embed_texts
from veriscope.errors import UsageError

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class CaptionPair:
    """A generated caption and its ground-truth reference."""

    id: str
    generated: str
    reference: str

    def __post_init__(self):
        if not self.id:
            raise UsageError("pair id must be non-empty")


@dataclass(frozen=True)
class PairScore:
    id: str
    score: float
    hallucination: bool


@dataclass(frozen=True)
class FaithfulnessReport:
    pairs: tuple[PairScore, ...]
    corpus_mean: float
    threshold: float
    n: int

    @property
    def hallucination_count(self) -> int:
        return sum(1 for p in self.pairs if p.hallucination)


def classify(score: float, threshold: float) -> bool:
    """True iff the score falls strictly below the threshold.

    A score exactly equal to the threshold is NOT a hallucination.
    """
    if not 0.0 <= threshold <= 1.0:
        raise UsageError(f"threshold must be in [0, 1], got {threshold}")
    return score < threshold


def score_pair(
    pair: CaptionPair,
    spec: EmbedderSpec,
    threshold: float = DEFAULT_THRESHOLD,
    client=None,
) -> PairScore:
    gen, ref = embed_texts([pair.generated, pair.reference], spec, client=client)
    score = cosine(gen, ref)
    return PairScore(pair.id, score, classify(score, threshold))


def score_corpus(
    pairs,
    spec: EmbedderSpec,
    threshold: float = DEFAULT_THRESHOLD,
    client=None,
) -> FaithfulnessReport:
    """Score every pair and aggregate; input order is preserved in the output."""
    pairs = list(pairs)
    if not pairs:
        raise UsageError("corpus must be non-empty (mean undefined)")
    seen = set()
    for pair in pairs:
        if pair.id in seen:
            raise UsageError(f"duplicate pair id {pair.id!r}")
        seen.add(pair.id)
    gen_embs = embed_texts([p.generated for p in pairs], spec, client=client)
    ref_embs = embed_texts([p.reference for p in pairs], spec, client=client)
    scored = tuple(
        PairScore(pair.id, score, classify(score, threshold))
        for pair, score in zip(pairs, (cosine(g, r) for g, r in zip(gen_embs, ref_embs)))
    )
    corpus_mean = sum(p.score for p in scored) / len(scored)
    return FaithfulnessReport(pairs=scored, corpus_mean=corpus_mean, threshold=threshold, n=len(scored))
