"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both backends run on the default benchmark corpus (258 short documents) and
on a synthetic 2000-token diff. Results are checked for equality first.
"""

from __future__ import annotations

import argparse
import random
import timeit

import numpy as np

from smartvector import _pure
from smartvector.bench import generate_corpus

try:
    from smartvector import _speedups
except ImportError:
    _speedups = None


def workloads():
    store, _ = generate_corpus()
    index = store.term_index
    q_terms, q_weights = index.query_vector("What is the current parental leave for Berlin staff?")
    rng = random.Random(0)
    a = np.array([rng.randrange(50) for _ in range(2000)], dtype=np.int64)
    b = a.copy()
    for pos in rng.sample(range(len(b)), 40):
        b[pos] = rng.randrange(50, 60)
    return {
        "accumulate_scores": lambda k: k.accumulate_scores(
            q_terms, q_weights, index.term_ptr, index.post_docs, index.post_vals, len(index)
        ),
        "pairwise_cosine": lambda k: k.pairwise_cosine(index.doc_ptr, index.doc_terms, index.doc_vals),
        "pairwise_jaccard": lambda k: k.pairwise_jaccard(index.uni_ptr, index.uni_terms),
        "lcs_matches": lambda k: k.lcs_matches(a, b),
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="timing repeats per kernel")
    args = parser.parse_args()
    if _speedups is None:
        print("compiled kernels are not built; only the pure-Python backend is available")
    print(f"{'kernel':<18} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for name, call in workloads().items():
        py = min(timeit.repeat(lambda: call(_pure), number=1, repeat=args.repeat)) * 1e3
        if _speedups is None:
            print(f"{name:<18} {py:>10.2f} {'-':>10} {'-':>8}")
            continue
        if not np.array_equal(call(_pure), call(_speedups)):
            raise SystemExit(f"{name}: backends disagree")
        cy = min(timeit.repeat(lambda: call(_speedups), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<18} {py:>10.2f} {cy:>10.2f} {py / cy:>7.1f}x")


if __name__ == "__main__":
    main()
