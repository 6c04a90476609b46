"""Pure-Python hashing and similarity kernels.

Drop-in fallback for the compiled extension (``veriscope._hashembed``). The
two backends must stay bit-identical, so every float64 reduction here is a
plain sequential loop: the C side runs the same operations in the same order
and IEEE-754 guarantees equal results.

Embedding recipe (fixed, portable):
  * lowercase the text, split on every non-alphanumeric codepoint, drop
    empty tokens;
  * hash each token with 64-bit FNV-1a over its UTF-8 bytes;
  * bucket = hash mod dim, sign = +1 if bit 8 of the hash is clear else -1;
  * accumulate signs per bucket, then L2-normalize (all-zero when no tokens).
"""

from __future__ import annotations

import math

import numpy as np

FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash, byte-wise."""
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric codepoints, dropping empties."""
    tokens: list[str] = []
    current: list[str] = []
    for ch in text.lower():
        if ch.isalnum():
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


def embed_buckets(text: str, dim: int) -> np.ndarray:
    """Signed-hash bag-of-words vector, L2-normalized (zeros when no tokens)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    values = [0.0] * dim
    for token in tokenize(text):
        h = fnv1a64(token.encode("utf-8"))
        values[h % dim] += 1.0 if ((h >> 8) & 1) == 0 else -1.0
    norm_sq = 0.0
    for v in values:
        norm_sq += v * v
    if norm_sq > 0.0:
        norm = math.sqrt(norm_sq)
        values = [v / norm for v in values]
    return np.array(values, dtype=np.float64)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity with sequential accumulation; 0.0 if either norm is 0."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    dot = 0.0
    norm_a = 0.0
    norm_b = 0.0
    for x, y in zip(a.tolist(), b.tolist()):
        dot += x * y
        norm_a += x * x
        norm_b += y * y
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (math.sqrt(norm_a) * math.sqrt(norm_b))


def batch_cosine(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Row-wise cosine of ``matrix`` against ``query``."""
    if matrix.ndim != 2:
        raise ValueError("matrix must be 2-d")
    if matrix.shape[1] != len(query):
        raise ValueError(f"dim mismatch: {matrix.shape[1]} vs {len(query)}")
    out = np.empty(matrix.shape[0], dtype=np.float64)
    for i in range(matrix.shape[0]):
        out[i] = cosine(matrix[i], query)
    return out
