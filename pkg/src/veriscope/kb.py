"""Per-video session knowledge base with exact cosine top-k search.

A knowledge base is built once per video at inference time from feature
vectors and metadata/caption text, is immutable afterwards, and serves
brute-force (exact) top-k semantic search. Stores are small (order 10^2-10^3
entries), so exactness is cheap and there is no approximate index to make
results nondeterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from veriscope import jsonio, kernels
from veriscope.embedding import Embedding
from veriscope.errors import UsageError

SOURCE_FRAME = "frame-feature"
SOURCE_METADATA = "metadata"
SOURCE_REFERENCE = "reference-caption"
SOURCES = (SOURCE_FRAME, SOURCE_METADATA, SOURCE_REFERENCE)


@dataclass(frozen=True)
class KnowledgeEntry:
    """One vector plus the text that backs it (empty text only for raw frame features)."""

    entry_id: str
    vector: Embedding
    text: str
    source: str
    timestamp: float | None = None

    def __post_init__(self):
        if self.source not in SOURCES:
            raise UsageError(f"unknown source {self.source!r}")
        if not self.text and self.source != SOURCE_FRAME:
            raise UsageError(f"entry {self.entry_id}: empty text is only allowed for {SOURCE_FRAME}")


@dataclass(frozen=True)
class SearchHit:
    entry_id: str
    score: float
    rank: int


class SessionKnowledgeBase:
    """Immutable ordered collection of entries sharing one vector dimension."""

    def __init__(self, video_id: str, entries):
        entries = tuple(entries)
        if not entries:
            raise UsageError("knowledge base requires at least one entry")
        dim = entries[0].vector.dim
        seen = set()
        for entry in entries:
            if entry.vector.dim != dim:
                raise UsageError(
                    f"entry {entry.entry_id}: dim {entry.vector.dim} does not match kb dim {dim}"
                )
            if entry.entry_id in seen:
                raise UsageError(f"duplicate entry id {entry.entry_id!r}")
            seen.add(entry.entry_id)
        self.video_id = video_id
        self.entries = entries
        self.dim = dim
        self._matrix = np.ascontiguousarray(np.vstack([e.vector.values for e in entries]))
        self._text_rows = np.array(
            [i for i, e in enumerate(entries) if e.text], dtype=np.intp
        )

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def text_bearing_count(self) -> int:
        return len(self._text_rows)

    def entry_by_id(self, entry_id: str) -> KnowledgeEntry:
        for entry in self.entries:
            if entry.entry_id == entry_id:
                return entry
        raise UsageError(f"no entry {entry_id!r}")


def build_session_kb(video_id: str, features) -> SessionKnowledgeBase:
    """Build a KB from (vector, text, source, timestamp) tuples, in input order.

    Entry ids are assigned deterministically as ``<video_id>/<index>``.
    Vectors may be Embedding instances or any 1-d float sequence.
    """
    features = list(features)
    if not features:
        raise UsageError("features must be non-empty")
    entries = []
    for index, (vector, text, source, timestamp) in enumerate(features):
        if not isinstance(vector, Embedding):
            vector = Embedding.from_values(vector)
        entries.append(
            KnowledgeEntry(
                entry_id=f"{video_id}/{index}",
                vector=vector,
                text=text,
                source=source,
                timestamp=timestamp,
            )
        )
    return SessionKnowledgeBase(video_id, entries)


def search(
    kb: SessionKnowledgeBase,
    query: Embedding,
    k: int,
    text_only: bool = False,
) -> list[SearchHit]:
    """Exact top-min(k, candidates) hits by cosine, descending.

    Ties break toward earlier insertion order; ranks run 1..k without gaps.
    ``text_only`` restricts candidates to entries with non-empty text (the
    grounding-eligible evidence).
    """
    if k < 1:
        raise UsageError("k must be >= 1")
    if query.dim != kb.dim:
        raise UsageError(f"query dim {query.dim} does not match kb dim {kb.dim}")
    if text_only:
        rows = kb._text_rows
        if len(rows) == 0:
            return []
        scores = kernels.batch_cosine(kb._matrix[rows], query.values)
    else:
        rows = np.arange(len(kb.entries), dtype=np.intp)
        scores = kernels.batch_cosine(kb._matrix, query.values)
    # stable sort on -score keeps insertion order among equal scores
    order = np.argsort(-scores, kind="stable")[: min(k, len(rows))]
    return [
        SearchHit(entry_id=kb.entries[rows[i]].entry_id, score=float(scores[i]), rank=rank)
        for rank, i in enumerate(order, start=1)
    ]


def save_snapshot(kb: SessionKnowledgeBase, path: str | Path) -> None:
    """Write the KB as JSON; vectors carry 17 significant digits and round-trip bit-exactly."""
    obj = {
        "video_id": kb.video_id,
        "dim": kb.dim,
        "entries": [
            {
                "entry_id": e.entry_id,
                "text": e.text,
                "source": e.source,
                "timestamp": e.timestamp,
                "vector": list(e.vector.values),
            }
            for e in kb.entries
        ],
    }
    jsonio.write_json_atomic(path, obj)


def load_snapshot(path: str | Path) -> SessionKnowledgeBase:
    obj = jsonio.read_json(path)
    try:
        dim = obj["dim"]
        entries = [
            KnowledgeEntry(
                entry_id=row["entry_id"],
                vector=Embedding.from_values(row["vector"]),
                text=row["text"],
                source=row["source"],
                timestamp=row["timestamp"],
            )
            for row in obj["entries"]
        ]
        kb = SessionKnowledgeBase(obj["video_id"], entries)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed kb snapshot {path}: {exc}") from exc
    if kb.dim != dim:
        raise UsageError(f"snapshot dim {dim} does not match vectors ({kb.dim})")
    return kb
