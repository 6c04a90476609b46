"""Kernel backend selection.

Prefers the compiled extension and falls back to the pure-Python module when
the extension is missing (e.g. no C compiler at install time). Both backends
produce bit-identical results; set ``VERISCOPE_PURE_PYTHON=1`` to force the
fallback. ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

from veriscope import _hashembed_py as _pure

# tokenize has no hot loop of its own; the compiled path fuses it into
# embed_buckets, so the Python implementation is the single source of truth.
tokenize = _pure.tokenize

if os.environ.get("VERISCOPE_PURE_PYTHON") == "1":
    _impl = _pure
    BACKEND = "pure-python"
else:
    try:
        from veriscope import _hashembed as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure-python"

fnv1a64 = _impl.fnv1a64
embed_buckets = _impl.embed_buckets
cosine = _impl.cosine
batch_cosine = _impl.batch_cosine
