# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for layering, reachability counting and WESP.

Reachable sets are bitsets over the erroneous gates, one row of uint64 words
per gate, filled in reverse execution order.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport malloc, calloc, free

cnp.import_array()

NAME = "cython"


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int _popcount(uint64_t v) noexcept nogil:
    return __builtin_popcountll(v)


cdef int64_t[::1] _as_order(object order, Py_ssize_t n):
    if order is None:
        return np.arange(n, dtype=np.int64)
    return np.ascontiguousarray(order, dtype=np.int64)


def asap_layers(const int64_t[::1] qptr, const int64_t[::1] qidx, Py_ssize_t num_qubits, order=None):
    cdef Py_ssize_t n = qptr.shape[0] - 1
    cdef int64_t[::1] ordv = _as_order(order, n)
    out = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] res = out
    cdef int64_t* busy = <int64_t*> malloc(max(num_qubits, 1) * sizeof(int64_t))
    cdef Py_ssize_t k, g, p
    cdef int64_t lay
    with nogil:
        for k in range(num_qubits):
            busy[k] = -1
        for k in range(n):
            g = ordv[k]
            lay = -1
            for p in range(qptr[g], qptr[g + 1]):
                if busy[qidx[p]] > lay:
                    lay = busy[qidx[p]]
            lay += 1
            for p in range(qptr[g], qptr[g + 1]):
                busy[qidx[p]] = lay
            res[g] = lay
    free(busy)
    return out


cdef Py_ssize_t _fill_reach(const int64_t[::1] qptr, const int64_t[::1] qidx,
                            const unsigned char[::1] erroneous, Py_ssize_t num_qubits,
                            int64_t[::1] ordv, uint64_t* bits, Py_ssize_t words,
                            int64_t* rank) noexcept nogil:
    cdef Py_ssize_t n = qptr.shape[0] - 1
    cdef Py_ssize_t g, k, p, w, s
    cdef Py_ssize_t total = 0
    cdef int64_t* nxt = <int64_t*> malloc(max(num_qubits, 1) * sizeof(int64_t))
    for g in range(n):
        if erroneous[g]:
            rank[g] = total
            total += 1
        else:
            rank[g] = -1
    for k in range(num_qubits):
        nxt[k] = -1
    for k in range(n - 1, -1, -1):
        g = ordv[k]
        for p in range(qptr[g], qptr[g + 1]):
            s = nxt[qidx[p]]
            if s >= 0:
                for w in range(words):
                    bits[g * words + w] |= bits[s * words + w]
                if rank[s] >= 0:
                    bits[g * words + rank[s] // 64] |= (<uint64_t> 1) << (rank[s] % 64)
            nxt[qidx[p]] = g
    free(nxt)
    return total


def reach_counts(const int64_t[::1] qptr, const int64_t[::1] qidx,
                 const unsigned char[::1] erroneous, Py_ssize_t num_qubits, order=None):
    cdef Py_ssize_t n = qptr.shape[0] - 1
    cdef int64_t[::1] ordv = _as_order(order, n)
    cdef Py_ssize_t words = 1
    cdef Py_ssize_t g, w, c
    for g in range(n):
        if erroneous[g]:
            words += 1
    words = (words + 63) // 64
    cdef uint64_t* bits = <uint64_t*> calloc(max(n, 1) * words, sizeof(uint64_t))
    cdef int64_t* rank = <int64_t*> malloc(max(n, 1) * sizeof(int64_t))
    out = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] res = out
    with nogil:
        _fill_reach(qptr, qidx, erroneous, num_qubits, ordv, bits, words, rank)
        for g in range(n):
            c = 0
            for w in range(words):
                c += _popcount(bits[g * words + w])
            res[g] = c
    free(bits)
    free(rank)
    return out


def wesp_gate_product(const int64_t[::1] qptr, const int64_t[::1] qidx,
                      const unsigned char[::1] erroneous, const double[::1] errors,
                      Py_ssize_t num_qubits, order=None):
    cdef Py_ssize_t n = qptr.shape[0] - 1
    cdef int64_t[::1] ordv = _as_order(order, n)
    cdef Py_ssize_t words = 1
    cdef Py_ssize_t g, w, c, total
    cdef double emin = 2.0
    cdef double prod = 1.0
    cdef double eff
    for g in range(n):
        if erroneous[g]:
            words += 1
            if errors[g] < emin:
                emin = errors[g]
    words = (words + 63) // 64
    cdef uint64_t* bits = <uint64_t*> calloc(max(n, 1) * words, sizeof(uint64_t))
    cdef int64_t* rank = <int64_t*> malloc(max(n, 1) * sizeof(int64_t))
    with nogil:
        total = _fill_reach(qptr, qidx, erroneous, num_qubits, ordv, bits, words, rank)
        if total > 0:
            for g in range(n):
                if erroneous[g]:
                    c = 0
                    for w in range(words):
                        c += _popcount(bits[g * words + w])
                    eff = errors[g] + (<double> c) / (<double> total) * (errors[g] - emin)
                    if eff > 1.0:
                        eff = 1.0
                    prod *= 1.0 - eff
    free(bits)
    free(rank)
    return prod
