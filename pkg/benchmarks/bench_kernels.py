"""Compare the compiled hashing/similarity kernels against the pure-Python fallback.

Runs identical workloads through both backends, asserts the outputs are
bit-identical (the fallback is a drop-in, not an approximation), and prints a
timing table. When the compiled extension is unavailable only the fallback is
timed.

Usage:
    python benchmarks/bench_kernels.py --texts 2000 --dim 256 --repeat 5
"""

import argparse
import random
import time

import numpy as np

from veriscope import _hashembed_py as pure_backend

try:
    from veriscope import _hashembed as compiled_backend
except ImportError:
    compiled_backend = None

_WORDS = [
    "ocean", "gantry", "surfs", "lattice", "onion", "crowd", "프리즘", "ember",
    "2024", "naïve", "quartz", "ballad", "night", "rain", "engine", "metal",
    "telescope", "mosaic", "silo", "harmonic", "crimson", "zeppelin",
]


def make_texts(n: int, seed: int) -> list:
    rng = random.Random(seed)
    return [
        " ".join(rng.choice(_WORDS) for _ in range(rng.randrange(8, 17)))
        for _ in range(n)
    ]


def best_of(repeat: int, fn) -> float:
    """Best wall-clock seconds over ``repeat`` runs."""
    best = float("inf")
    for _ in range(repeat):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def run_backend(backend, texts: list, dim: int, repeat: int):
    """Time the three hot kernels; returns (timings, outputs) for parity checks."""
    embedded = [backend.embed_buckets(t, dim) for t in texts]
    matrix = np.ascontiguousarray(np.vstack(embedded))
    query = embedded[0]

    timings = {
        "embed_buckets": best_of(repeat, lambda: [backend.embed_buckets(t, dim) for t in texts]),
        "cosine": best_of(
            repeat, lambda: [backend.cosine(a, b) for a, b in zip(embedded, embedded[1:])]
        ),
        "batch_cosine": best_of(repeat, lambda: backend.batch_cosine(matrix, query)),
    }
    outputs = {
        "embed_buckets": matrix,
        "cosine": np.array([backend.cosine(a, b) for a, b in zip(embedded, embedded[1:])]),
        "batch_cosine": backend.batch_cosine(matrix, query),
    }
    return timings, outputs


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--texts", type=int, default=2000, help="number of synthetic texts")
    parser.add_argument("--dim", type=int, default=256, help="embedding dimension")
    parser.add_argument("--repeat", type=int, default=5, help="timing repeats (best is reported)")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    texts = make_texts(args.texts, args.seed)
    print(f"workload: {args.texts} texts, dim {args.dim}, best of {args.repeat}")

    pure_times, pure_out = run_backend(pure_backend, texts, args.dim, args.repeat)
    if compiled_backend is None:
        print("compiled extension not available; timing the pure-Python fallback only")
        for name, seconds in pure_times.items():
            print(f"  {name:<14} {seconds * 1e3:9.2f} ms")
        return 0

    compiled_times, compiled_out = run_backend(compiled_backend, texts, args.dim, args.repeat)
    for name in pure_out:
        if not np.array_equal(pure_out[name], compiled_out[name]):
            raise AssertionError(f"backend outputs differ for {name}")
    print("parity: all kernel outputs bit-identical across backends")
    print(f"  {'kernel':<14} {'pure (ms)':>10} {'compiled (ms)':>14} {'speedup':>8}")
    for name in pure_times:
        p = pure_times[name] * 1e3
        c = compiled_times[name] * 1e3
        print(f"  {name:<14} {p:>10.2f} {c:>14.2f} {p / c:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
