"""Gate commutation checks and the depth-preserving swap condition.

``commute_by_rule`` is a fast table of known cases and answers ``None`` when
it does not know; ``commute_by_matrix`` compares ``U1 U2`` with ``U2 U1`` on
the joint support and is authoritative.  :func:`commutes` combines the two.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuit import Circuit, Gate
from .simulator import gate_matrix

MAX_SUPPORT = 3
_SELF_INVERSE_1Q = frozenset({"h", "x", "sx"})


class CommutationError(ValueError):
    pass


def _require_unitary(*gates: Gate) -> None:
    for g in gates:
        if not g.unitary:
            raise CommutationError(f"{g.kind} is not a unitary gate")


def commute_by_rule(g1: Gate, g2: Gate) -> bool | None:
    """True/False when a rule decides, None to defer to the matrix check."""
    if g1.kind in ("measure", "barrier") or g2.kind in ("measure", "barrier"):
        return False
    shared = set(g1.qubits) & set(g2.qubits)
    if not shared:
        return True
    k1, k2 = g1.kind, g2.kind
    if k1 == "cx" and k2 == "cx":
        c1, t1 = g1.qubits
        c2, t2 = g2.qubits
        if shared == {c1} and c1 == c2:
            return True
        if shared == {t1} and t1 == t2:
            return True
        if g1.qubits == g2.qubits:
            return True
        return None
    if k1 == "cx" or k2 == "cx":
        two, one = (g1, g2) if k1 == "cx" else (g2, g1)
        c, t = two.qubits
        q = one.qubits[0]
        if one.kind == "rz" and q == c:
            return True
        if one.kind in ("x", "sx") and q == t:
            return True
        return None
    # two single-qubit gates on the same qubit
    if k1 == "rz" and k2 == "rz":
        return True
    if k1 == k2 and k1 in _SELF_INVERSE_1Q:
        return True
    return None


@lru_cache(maxsize=65536)
def _matrix_commutes(key: tuple, tol: float) -> bool:
    gates, nq = key
    dim = 2**nq
    mats = []
    for kind, qubits, angle in gates:
        g = Gate(kind, qubits, angle=angle)
        mats.append(_embed(gate_matrix(g), qubits, nq))
    a, b = mats
    return float(np.max(np.abs(a @ b - b @ a))) <= tol


def _embed(mat: np.ndarray, qubits: tuple[int, ...], nq: int) -> np.ndarray:
    """Lift ``mat`` acting on ``qubits`` to the full little-endian space."""
    k = len(qubits)
    dim = 2**nq
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        sub_in = 0
        for pos, q in enumerate(qubits):
            sub_in |= ((col >> q) & 1) << (k - 1 - pos)
        rest = col
        for q in qubits:
            rest &= ~(1 << q)
        for sub_out in range(2**k):
            amp = mat[sub_out, sub_in]
            if amp == 0:
                continue
            row = rest
            for pos, q in enumerate(qubits):
                row |= ((sub_out >> (k - 1 - pos)) & 1) << q
            full[row, col] += amp
    return full


def commute_by_matrix(g1: Gate, g2: Gate, tol: float = 1e-12) -> bool:
    _require_unitary(g1, g2)
    support = sorted(set(g1.qubits) | set(g2.qubits))
    if len(support) > MAX_SUPPORT:
        raise CommutationError(f"joint support of {len(support)} qubits exceeds {MAX_SUPPORT}")
    relabel = {q: i for i, q in enumerate(support)}
    key = tuple(
        (g.kind, tuple(relabel[q] for q in g.qubits), g.angle) for g in (g1, g2)
    )
    return _matrix_commutes((key, len(support)), tol)


def commutes(g1: Gate, g2: Gate, tol: float = 1e-12) -> bool:
    if not (g1.unitary and g2.unitary):
        return False
    rule = commute_by_rule(g1, g2)
    if rule is not None:
        return rule
    return commute_by_matrix(g1, g2, tol)


@dataclass(frozen=True)
class SwapCandidate:
    first: int
    second: int
    shared_qubits: frozenset
    commutes: bool
    depth_safe: bool

    @property
    def legal(self) -> bool:
        return self.commutes and self.depth_safe


class Occupancy:
    """Sorted layers occupied on each qubit (gates and barriers)."""

    def __init__(self, per_qubit_layers: list[list[int]]):
        self.layers = per_qubit_layers

    @classmethod
    def of(cls, circuit: Circuit) -> "Occupancy":
        per_qubit: list[list[int]] = [[] for _ in range(circuit.num_qubits)]
        for gid, g in enumerate(circuit.gates):
            lay = int(circuit.layer_of[gid])
            for q in g.qubits:
                per_qubit[q].append(lay)
        return cls([sorted(v) for v in per_qubit])

    def busy(self, q: int, lo: int, hi: int) -> bool:
        """Whether qubit ``q`` is occupied on any layer in [lo, hi]."""
        lays = self.layers[q]
        k = bisect_left(lays, lo)
        return k < len(lays) and lays[k] <= hi


def depth_safe(a: Gate, b: Gate, t: int, tk: int, occ: Occupancy) -> bool | None:
    """Core of :func:`can_swap_preserving_depth` on raw layer data.

    Returns None when ``b`` is not an immediate dependent of ``a``.
    """
    shared = set(a.qubits) & set(b.qubits)
    if not shared or tk <= t:
        return None
    blocked = [occ.busy(q, t + 1, tk - 1) for q in shared]
    if all(blocked):
        return None
    if any(blocked):
        return False
    for q in a.qubits:
        if q not in shared and occ.busy(q, t + 1, tk):
            return False
    for q in b.qubits:
        if q not in shared and occ.busy(q, t, tk - 1):
            return False
    return True


def can_swap_preserving_depth(
    circuit: Circuit,
    g_i: int,
    g_j: int,
    occupancy: Occupancy | None = None,
) -> bool:
    """Whether exchanging ``g_i`` (layer t) with its dependent ``g_j``
    (layer t+k) keeps every other qubit's timeline intact.

    Qubits of ``g_i`` not shared with ``g_j`` must be idle on layers
    (t, t+k]; qubits of ``g_j`` not shared with ``g_i`` idle on [t, t+k).
    ``g_j`` must also directly follow ``g_i`` on every shared qubit.
    """
    gates = circuit.gates
    if not (0 <= g_i < len(gates) and 0 <= g_j < len(gates)):
        raise CommutationError("gate id out of range")
    occ = occupancy if occupancy is not None else Occupancy.of(circuit)
    ok = depth_safe(
        gates[g_i], gates[g_j], int(circuit.layer_of[g_i]), int(circuit.layer_of[g_j]), occ
    )
    if ok is None:
        raise CommutationError(f"gate {g_j} is not an immediate dependent of gate {g_i}")
    return ok


def swap_candidate(
    circuit: Circuit, g_i: int, g_j: int, occupancy: Occupancy | None = None
) -> SwapCandidate:
    a, b = circuit.gates[g_i], circuit.gates[g_j]
    return SwapCandidate(
        first=g_i,
        second=g_j,
        shared_qubits=frozenset(set(a.qubits) & set(b.qubits)),
        commutes=commutes(a, b),
        depth_safe=can_swap_preserving_depth(circuit, g_i, g_j, occupancy=occupancy),
    )
