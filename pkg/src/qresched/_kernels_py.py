"""Pure-Python kernels, used when the compiled extension is unavailable.

Every function mirrors the signature of its counterpart in ``_kernels.pyx``.
Gates are given in CSR form (``qptr``/``qidx``); ``order`` is an optional
permutation listing gate ids in execution order.
"""
from __future__ import annotations

import numpy as np

NAME = "python"


def _order(order, n):
    return range(n) if order is None else [int(v) for v in order]


def asap_layers(qptr, qidx, num_qubits, order=None):
    n = len(qptr) - 1
    qptr = qptr.tolist()
    qidx = qidx.tolist()
    busy = [-1] * num_qubits
    out = [0] * n
    for g in _order(order, n):
        qs = qidx[qptr[g]:qptr[g + 1]]
        lay = max(busy[q] for q in qs) + 1
        for q in qs:
            busy[q] = lay
        out[g] = lay
    return np.asarray(out, dtype=np.int64)


def _reach_bits(qptr, qidx, erroneous, num_qubits, order):
    n = len(qptr) - 1
    qptr = qptr.tolist()
    qidx = qidx.tolist()
    err = erroneous.tolist()
    bit = [0] * n
    k = 0
    for g in range(n):
        if err[g]:
            bit[g] = 1 << k
            k += 1
    reach = [0] * n
    nxt = [-1] * num_qubits
    for g in reversed(list(_order(order, n))):
        acc = 0
        for q in qidx[qptr[g]:qptr[g + 1]]:
            s = nxt[q]
            if s >= 0:
                acc |= reach[s] | bit[s]
            nxt[q] = g
        reach[g] = acc
    return reach, k


def reach_counts(qptr, qidx, erroneous, num_qubits, order=None):
    reach, _ = _reach_bits(qptr, qidx, erroneous, num_qubits, order)
    return np.asarray([r.bit_count() if hasattr(r, "bit_count") else bin(r).count("1") for r in reach],
                      dtype=np.int64)


def wesp_gate_product(qptr, qidx, erroneous, errors, num_qubits, order=None):
    """Product over erroneous gates of ``1 - min(1, e + S/G * (e - min_e))``."""
    reach, total = _reach_bits(qptr, qidx, erroneous, num_qubits, order)
    if total == 0:
        return 1.0
    err = erroneous.tolist()
    e = errors.tolist()
    emin = min(e[g] for g in range(len(err)) if err[g])
    prod = 1.0
    for g in range(len(err)):
        if err[g]:
            s = bin(reach[g]).count("1")
            eff = e[g] + s / total * (e[g] - emin)
            prod *= 1.0 - min(1.0, eff)
    return prod
