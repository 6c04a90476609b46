"""Embedding type, deterministic hash embedder, and cosine similarity.

The deterministic embedder is fully specified (FNV-1a signed feature hashing,
see ``_hashembed_py``) so every test and report is reproducible offline and
bit-exact. Remote embedders plug in through :class:`EmbedderSpec` with kind
``"remote"`` and are reached via :mod:`veriscope.clients`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from veriscope import kernels
from veriscope.errors import ContractViolation, UsageError

DETERMINISTIC_HASH = "deterministic-hash"
REMOTE = "remote"
DEFAULT_DIM = 256


@dataclass(frozen=True, eq=False)
class Embedding:
    """Fixed-dimension float64 vector.

    Invariants: ``dim == len(values)``, all entries finite. Vectors produced
    by :func:`embed_text` from token-bearing text have unit L2 norm; empty
    token streams yield the all-zero vector.
    """

    values: np.ndarray
    dim: int

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise UsageError("embedding values must be a 1-d vector")
        if arr.shape[0] != self.dim:
            raise UsageError(f"dim {self.dim} does not match {arr.shape[0]} values")
        if not np.isfinite(arr).all():
            raise UsageError("embedding values must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_values(cls, values) -> "Embedding":
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1:
            raise UsageError("embedding values must be a 1-d vector")
        return cls(arr, int(arr.shape[0]))


@dataclass(frozen=True)
class EmbedderSpec:
    """Which embedder to use: the in-process deterministic one, or a remote service."""

    kind: str = DETERMINISTIC_HASH
    dim: int = DEFAULT_DIM
    endpoint: str | None = None

    def __post_init__(self):
        if self.kind not in (DETERMINISTIC_HASH, REMOTE):
            raise UsageError(f"unknown embedder kind {self.kind!r}")
        if self.dim < 1:
            raise UsageError("dim must be >= 1")
        if self.kind == REMOTE and not self.endpoint:
            raise UsageError("remote embedder requires an endpoint")


def embed_text(text: str, spec: EmbedderSpec, client=None) -> Embedding:
    """Embed one text per ``spec``.

    Deterministic kind is a pure function of (text, dim). Remote kind posts
    to the configured endpoint; pass ``client`` (an
    :class:`~veriscope.clients.EmbeddingClient`) to reuse connections,
    otherwise a one-shot client is built from ``spec.endpoint``.
    """
    if spec.kind == DETERMINISTIC_HASH:
        return Embedding(kernels.embed_buckets(text, spec.dim), spec.dim)
    if client is None:
        from veriscope.clients import EmbeddingClient, ProviderConfig

        client = EmbeddingClient(ProviderConfig(endpoint=spec.endpoint))
    emb = client.embed([text])[0]
    if emb.dim != spec.dim:
        raise ContractViolation(f"remote returned dim {emb.dim}, spec requires {spec.dim}")
    return emb


_REMOTE_BATCH = 128


def embed_texts(texts: list[str], spec: EmbedderSpec, client=None) -> list[Embedding]:
    """Embed many texts; output order matches input order.

    Remote embedders are called in batches of up to 128 texts per request.
    """
    if spec.kind == DETERMINISTIC_HASH:
        return [Embedding(kernels.embed_buckets(t, spec.dim), spec.dim) for t in texts]
    if client is None:
        from veriscope.clients import EmbeddingClient, ProviderConfig

        client = EmbeddingClient(ProviderConfig(endpoint=spec.endpoint))
    out: list[Embedding] = []
    for start in range(0, len(texts), _REMOTE_BATCH):
        out.extend(client.embed(texts[start : start + _REMOTE_BATCH]))
    for emb in out:
        if emb.dim != spec.dim:
            raise ContractViolation(f"remote returned dim {emb.dim}, spec requires {spec.dim}")
    return out


def cosine(a: Embedding, b: Embedding) -> float:
    """Cosine similarity; returns exactly 0.0 when either vector has zero norm.

    The zero-norm convention keeps corpus means NaN-free and classifies empty
    captions as maximally unfaithful.
    """
    if a.dim != b.dim:
        raise UsageError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(kernels.cosine(a.values, b.values))
