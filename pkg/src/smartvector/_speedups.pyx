# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Semantics are defined by ``smartvector._pure``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t

cnp.import_array()


def accumulate_scores(const int64_t[::1] q_terms, const double[::1] q_weights,
                      const int64_t[::1] term_ptr, const int64_t[::1] post_docs,
                      const double[::1] post_vals, Py_ssize_t n_docs):
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(n_docs, dtype=np.float64)
    cdef double[::1] scores = out
    cdef Py_ssize_t q, k, t
    cdef double w
    for q in range(q_terms.shape[0]):
        t = q_terms[q]
        w = q_weights[q]
        for k in range(term_ptr[t], term_ptr[t + 1]):
            scores[post_docs[k]] += w * post_vals[k]
    return out


def pairwise_cosine(const int64_t[::1] doc_ptr, const int64_t[::1] doc_terms,
                    const double[::1] doc_vals):
    cdef Py_ssize_t n = doc_ptr.shape[0] - 1
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] res = out
    cdef Py_ssize_t i, j, a, b, a_end, b_end
    cdef double acc
    for i in range(n):
        acc = 0.0
        for a in range(doc_ptr[i], doc_ptr[i + 1]):
            acc += doc_vals[a] * doc_vals[a]
        res[i, i] = acc
        a_end = doc_ptr[i + 1]
        for j in range(i + 1, n):
            a = doc_ptr[i]
            b = doc_ptr[j]
            b_end = doc_ptr[j + 1]
            acc = 0.0
            while a < a_end and b < b_end:
                if doc_terms[a] == doc_terms[b]:
                    acc += doc_vals[a] * doc_vals[b]
                    a += 1
                    b += 1
                elif doc_terms[a] < doc_terms[b]:
                    a += 1
                else:
                    b += 1
            res[i, j] = acc
            res[j, i] = acc
    return out


def pairwise_jaccard(const int64_t[::1] set_ptr, const int64_t[::1] set_terms):
    cdef Py_ssize_t n = set_ptr.shape[0] - 1
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] res = out
    cdef Py_ssize_t i, j, a, b, a_end, b_end, inter, union
    for i in range(n):
        res[i, i] = 1.0 if set_ptr[i + 1] > set_ptr[i] else 0.0
        a_end = set_ptr[i + 1]
        for j in range(i + 1, n):
            a = set_ptr[i]
            b = set_ptr[j]
            b_end = set_ptr[j + 1]
            inter = 0
            while a < a_end and b < b_end:
                if set_terms[a] == set_terms[b]:
                    inter += 1
                    a += 1
                    b += 1
                elif set_terms[a] < set_terms[b]:
                    a += 1
                else:
                    b += 1
            union = (a_end - set_ptr[i]) + (b_end - set_ptr[j]) - inter
            res[i, j] = <double>inter / union if union else 0.0
            res[j, i] = res[i, j]
    return out


def lcs_matches(const int64_t[::1] a, const int64_t[::1] b):
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0]
    cdef Py_ssize_t i, j, w = m + 1
    cdef cnp.ndarray[int32_t, ndim=1] table_arr = np.zeros((n + 1) * (m + 1), dtype=np.int32)
    cdef int32_t[::1] table = table_arr
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                table[i * w + j] = table[(i + 1) * w + j + 1] + 1
            elif table[(i + 1) * w + j] >= table[i * w + j + 1]:
                table[i * w + j] = table[(i + 1) * w + j]
            else:
                table[i * w + j] = table[i * w + j + 1]
    pairs = []
    i = 0
    j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            pairs.append((i, j))
            i += 1
            j += 1
        elif table[(i + 1) * w + j] >= table[i * w + j + 1]:
            i += 1
        else:
            j += 1
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)
