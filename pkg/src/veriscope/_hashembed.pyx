# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hashing and similarity kernels.

Bit-compatible with ``veriscope._hashembed_py``: identical token scan,
identical FNV-1a accumulation, identical sequential float64 reductions.
Compiled with -ffp-contract=off so no FMA contraction changes the rounding.
"""

from libc.math cimport sqrt

import numpy as np

cdef extern from *:
    bint Py_UNICODE_ISALNUM(Py_UCS4 ch)

ctypedef unsigned long long u64

cdef u64 _FNV_OFFSET = 14695981039346656037ULL
cdef u64 _FNV_PRIME = 1099511628211ULL


cdef inline u64 _fnv_byte(u64 h, unsigned char b) nogil:
    return (h ^ b) * _FNV_PRIME


cdef inline u64 _fnv_codepoint(u64 h, Py_UCS4 ch) nogil:
    # UTF-8 encode inline; callers only feed alphanumeric codepoints, so no
    # surrogates reach this path and the encoding matches str.encode("utf-8").
    cdef unsigned int c = <unsigned int> ch
    if c < 0x80:
        h = _fnv_byte(h, <unsigned char> c)
    elif c < 0x800:
        h = _fnv_byte(h, <unsigned char> (0xC0 | (c >> 6)))
        h = _fnv_byte(h, <unsigned char> (0x80 | (c & 0x3F)))
    elif c < 0x10000:
        h = _fnv_byte(h, <unsigned char> (0xE0 | (c >> 12)))
        h = _fnv_byte(h, <unsigned char> (0x80 | ((c >> 6) & 0x3F)))
        h = _fnv_byte(h, <unsigned char> (0x80 | (c & 0x3F)))
    else:
        h = _fnv_byte(h, <unsigned char> (0xF0 | (c >> 18)))
        h = _fnv_byte(h, <unsigned char> (0x80 | ((c >> 12) & 0x3F)))
        h = _fnv_byte(h, <unsigned char> (0x80 | ((c >> 6) & 0x3F)))
        h = _fnv_byte(h, <unsigned char> (0x80 | (c & 0x3F)))
    return h


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash, byte-wise."""
    cdef u64 h = _FNV_OFFSET
    cdef const unsigned char[::1] view = data
    cdef Py_ssize_t i
    for i in range(view.shape[0]):
        h = _fnv_byte(h, view[i])
    return h


def embed_buckets(text, int dim):
    """Signed-hash bag-of-words vector, L2-normalized (zeros when no tokens)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    cdef str low = text.lower()
    out_arr = np.zeros(dim, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, n = len(low)
    cdef Py_UCS4 ch
    cdef u64 h = _FNV_OFFSET
    cdef bint in_token = False
    cdef double norm_sq = 0.0, norm
    for i in range(n):
        ch = low[i]
        if Py_UNICODE_ISALNUM(ch):
            h = _fnv_codepoint(h, ch)
            in_token = True
        elif in_token:
            out[<Py_ssize_t> (h % <u64> dim)] += 1.0 if ((h >> 8) & 1) == 0 else -1.0
            h = _FNV_OFFSET
            in_token = False
    if in_token:
        out[<Py_ssize_t> (h % <u64> dim)] += 1.0 if ((h >> 8) & 1) == 0 else -1.0
    for i in range(dim):
        norm_sq += out[i] * out[i]
    if norm_sq > 0.0:
        norm = sqrt(norm_sq)
        for i in range(dim):
            out[i] = out[i] / norm
    return out_arr


def cosine(const double[::1] a, const double[::1] b) -> float:
    """Cosine similarity with sequential accumulation; 0.0 if either norm is 0."""
    cdef Py_ssize_t i, n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError(f"length mismatch: {n} vs {b.shape[0]}")
    cdef double dot = 0.0, norm_a = 0.0, norm_b = 0.0
    for i in range(n):
        dot += a[i] * b[i]
        norm_a += a[i] * a[i]
        norm_b += b[i] * b[i]
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (sqrt(norm_a) * sqrt(norm_b))


def batch_cosine(const double[:, ::1] matrix, const double[::1] query):
    """Row-wise cosine of ``matrix`` against ``query``."""
    cdef Py_ssize_t rows = matrix.shape[0], n = matrix.shape[1]
    if query.shape[0] != n:
        raise ValueError(f"dim mismatch: {n} vs {query.shape[0]}")
    out_arr = np.empty(rows, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t r, i
    cdef double dot, norm_a, norm_b
    for r in range(rows):
        dot = 0.0
        norm_a = 0.0
        norm_b = 0.0
        for i in range(n):
            dot += matrix[r, i] * query[i]
            norm_a += matrix[r, i] * matrix[r, i]
            norm_b += query[i] * query[i]
        if norm_a == 0.0 or norm_b == 0.0:
            out[r] = 0.0
        else:
            out[r] = dot / (sqrt(norm_a) * sqrt(norm_b))
    return out_arr
