"""Pure-Python kernels; reference semantics for the Cython build in ``_speedups.pyx``.

Both implementations accumulate in the same order, so results agree bit for bit.
"""

from __future__ import annotations

import numpy as np


def accumulate_scores(q_terms, q_weights, term_ptr, post_docs, post_vals, n_docs):
    """Dot products of one sparse query against every row of an inverted index."""
    scores = [0.0] * n_docs
    ptr = term_ptr.tolist()
    docs = post_docs.tolist()
    vals = post_vals.tolist()
    for t, w in zip(q_terms.tolist(), q_weights.tolist()):
        for k in range(ptr[t], ptr[t + 1]):
            scores[docs[k]] += w * vals[k]
    return np.array(scores, dtype=np.float64)


def _rows(ptr, terms, vals=None):
    ptr = ptr.tolist()
    terms = terms.tolist()
    if vals is None:
        return [terms[ptr[i] : ptr[i + 1]] for i in range(len(ptr) - 1)]
    vals = vals.tolist()
    return [
        (terms[ptr[i] : ptr[i + 1]], vals[ptr[i] : ptr[i + 1]]) for i in range(len(ptr) - 1)
    ]


def pairwise_cosine(doc_ptr, doc_terms, doc_vals):
    """All-pairs dot products of rows with sorted term ids (rows are unit length)."""
    rows = _rows(doc_ptr, doc_terms, doc_vals)
    n = len(rows)
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        ti, vi = rows[i]
        out[i, i] = sum(v * v for v in vi)
        for j in range(i + 1, n):
            tj, vj = rows[j]
            a = b = 0
            acc = 0.0
            while a < len(ti) and b < len(tj):
                if ti[a] == tj[b]:
                    acc += vi[a] * vj[b]
                    a += 1
                    b += 1
                elif ti[a] < tj[b]:
                    a += 1
                else:
                    b += 1
            out[i, j] = out[j, i] = acc
    return out


def pairwise_jaccard(set_ptr, set_terms):
    """All-pairs Jaccard index of rows holding sorted unique term ids."""
    rows = _rows(set_ptr, set_terms)
    n = len(rows)
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        si = rows[i]
        out[i, i] = 1.0 if si else 0.0
        for j in range(i + 1, n):
            sj = rows[j]
            a = b = inter = 0
            while a < len(si) and b < len(sj):
                if si[a] == sj[b]:
                    inter += 1
                    a += 1
                    b += 1
                elif si[a] < sj[b]:
                    a += 1
                else:
                    b += 1
            union = len(si) + len(sj) - inter
            out[i, j] = out[j, i] = inter / union if union else 0.0
    return out


def lcs_matches(a, b):
    """Index pairs (i, j) of one longest common subsequence of two int arrays.

    Backtracking prefers advancing in ``a`` on ties, which makes the choice
    deterministic.
    """
    a = a.tolist()
    b = b.tolist()
    n, m = len(a), len(b)
    # table[i][j] = LCS length of a[i:], b[j:]
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, below = table[i], table[i + 1]
        ai = a[i]
        for j in range(m - 1, -1, -1):
            if ai == b[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = below[j] if below[j] >= row[j + 1] else row[j + 1]
    pairs = []
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            pairs.append((i, j))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)
