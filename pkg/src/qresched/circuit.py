"""Circuit IR, ASAP layering and the gate dependency graph.

Gates are immutable values; a :class:`Circuit` owns an ordered gate tuple and
derives its layering on construction.  Gate ids are positional: they are the
index of the gate in ``Circuit.gates`` and are reassigned whenever a
transformation returns a new circuit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import _backend

SINGLE_QUBIT_KINDS = frozenset({"h", "x", "sx", "rz"})
UNITARY_KINDS = SINGLE_QUBIT_KINDS | {"cx"}
ALL_KINDS = UNITARY_KINDS | {"measure", "barrier"}
# kinds that carry a gate error; rz is virtual and error free
ERRONEOUS_KINDS = frozenset({"h", "x", "sx", "cx"})


class CircuitError(ValueError):
    """Raised for structurally invalid gates or circuits."""


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    clbit: int | None = None
    block_id: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ALL_KINDS:
            raise CircuitError(f"unsupported gate kind {self.kind!r}")
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"{self.kind} acts on repeated qubits {qubits}")
        if not qubits:
            raise CircuitError(f"{self.kind} acts on no qubits")
        if self.kind == "cx" and len(qubits) != 2:
            raise CircuitError("cx needs exactly two qubits")
        if self.kind in SINGLE_QUBIT_KINDS or self.kind == "measure":
            if len(qubits) != 1:
                raise CircuitError(f"{self.kind} needs exactly one qubit")
        if (self.kind == "rz") != (self.angle is not None):
            raise CircuitError("rz carries exactly one angle, other gates none")
        if (self.kind == "measure") != (self.clbit is not None):
            raise CircuitError("measure needs a classical bit")

    @property
    def erroneous(self) -> bool:
        return self.kind in ERRONEOUS_KINDS

    @property
    def unitary(self) -> bool:
        return self.kind in UNITARY_KINDS

    def signature(self) -> tuple:
        """Hashable identity ignoring the block tag."""
        return (self.kind, self.qubits, self.angle, self.clbit)

    def __str__(self) -> str:
        args = f"({self.angle:.6g})" if self.angle is not None else ""
        qs = ",".join(f"q{q}" for q in self.qubits)
        tail = f"->c{self.clbit}" if self.clbit is not None else ""
        return f"{self.kind}{args} {qs}{tail}"


def h(q: int) -> Gate:
    return Gate("h", (q,))


def x(q: int) -> Gate:
    return Gate("x", (q,))


def sx(q: int) -> Gate:
    return Gate("sx", (q,))


def rz(theta: float, q: int) -> Gate:
    return Gate("rz", (q,), angle=float(theta))


def cx(control: int, target: int) -> Gate:
    return Gate("cx", (control, target))


def measure(q: int, c: int) -> Gate:
    return Gate("measure", (q,), clbit=c)


def barrier(*qubits: int) -> Gate:
    return Gate("barrier", tuple(qubits))


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list over ``num_qubits`` qubits, layered ASAP."""

    num_qubits: int
    gates: tuple[Gate, ...] = ()
    num_clbits: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.num_qubits or min(g.qubits) < 0:
                raise CircuitError(f"{g} outside {self.num_qubits} qubits")
            if g.clbit is not None and not 0 <= g.clbit < self.num_clbits:
                raise CircuitError(f"{g} outside {self.num_clbits} classical bits")

    def __len__(self) -> int:
        return len(self.gates)

    def with_gates(self, gates: Iterable[Gate]) -> "Circuit":
        return Circuit(self.num_qubits, tuple(gates), self.num_clbits)

    @cached_property
    def arrays(self) -> "GateArrays":
        return GateArrays.from_gates(self.gates, self.num_qubits)

    @cached_property
    def layer_of(self) -> np.ndarray:
        """Layer index per gate id (barriers take a layer slot too)."""
        a = self.arrays
        return _backend.kernels.asap_layers(a.qptr, a.qidx, self.num_qubits)

    @property
    def layers(self) -> list[list[int]]:
        return build_layers(self)

    def measured_qubits(self) -> list[int]:
        return [g.qubits[0] for g in self.gates if g.kind == "measure"]

    def unitary_part(self) -> "Circuit":
        """The circuit with measures and barriers dropped."""
        return self.with_gates(g for g in self.gates if g.unitary)


@dataclass(frozen=True)
class GateArrays:
    """Flat CSR view of a gate list used by the compiled kernels."""

    qptr: np.ndarray
    qidx: np.ndarray
    erroneous: np.ndarray
    barrier: np.ndarray

    @classmethod
    def from_gates(cls, gates: Sequence[Gate], num_qubits: int) -> "GateArrays":
        qptr = np.zeros(len(gates) + 1, dtype=np.int64)
        flat: list[int] = []
        for i, g in enumerate(gates):
            flat.extend(g.qubits)
            qptr[i + 1] = len(flat)
        return cls(
            qptr=qptr,
            qidx=np.asarray(flat, dtype=np.int64),
            erroneous=np.fromiter((g.erroneous for g in gates), dtype=np.uint8, count=len(gates)),
            barrier=np.fromiter((g.kind == "barrier" for g in gates), dtype=np.uint8, count=len(gates)),
        )


def build_layers(circuit: Circuit) -> list[list[int]]:
    """Group gate ids by ASAP layer.

    A gate's layer is one more than the largest layer among its predecessors
    on any of its qubits.  Barriers are scheduled like gates so that they
    fence their qubits, but they do not count towards :func:`depth`.
    """
    layer_of = circuit.layer_of
    if len(layer_of) == 0:
        return []
    out: list[list[int]] = [[] for _ in range(int(layer_of.max()) + 1)]
    for gid, lay in enumerate(layer_of):
        out[lay].append(gid)
    return out


def depth(circuit: Circuit) -> int:
    layer_of = circuit.layer_of
    occupied = {int(layer_of[i]) for i, g in enumerate(circuit.gates) if g.kind != "barrier"}
    return len(occupied)


def gate_count(circuit: Circuit, erroneous_only: bool = False) -> int:
    if not erroneous_only:
        return len(circuit.gates)
    return sum(1 for g in circuit.gates if g.erroneous)


@dataclass(frozen=True)
class DependencyGraph:
    """Gate dependency DAG: an edge a -> b when b is the next gate after a on
    some shared qubit.  ``reach_counts[i]`` is the number of erroneous gates
    reachable from gate ``i`` (the gate itself excluded)."""

    num_nodes: int
    successors: tuple[tuple[int, ...], ...]
    predecessors: tuple[tuple[int, ...], ...]
    levels: tuple[int, ...]
    reach_counts: tuple[int, ...]
    erroneous: tuple[bool, ...] = field(repr=False, default=())

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a, succ in enumerate(self.successors) for b in succ]

    def _check(self, gate_id: int) -> None:
        if not 0 <= gate_id < self.num_nodes:
            raise KeyError(f"unknown gate id {gate_id}")


def _next_on_qubit(gates: Sequence[Gate], num_qubits: int) -> list[list[int]]:
    """For each gate, the index of the next gate on each of its qubits (-1 if none)."""
    nxt: list[list[int]] = [[-1] * len(g.qubits) for g in gates]
    last = [-1] * num_qubits
    for i in range(len(gates) - 1, -1, -1):
        for k, q in enumerate(gates[i].qubits):
            nxt[i][k] = last[q]
            last[q] = i
    return nxt


def build_dependency_graph(circuit: Circuit) -> DependencyGraph:
    gates = circuit.gates
    n = len(gates)
    succ: list[list[int]] = [[] for _ in range(n)]
    pred: list[list[int]] = [[] for _ in range(n)]
    for i, nexts in enumerate(_next_on_qubit(gates, circuit.num_qubits)):
        for j in nexts:
            if j >= 0 and j not in succ[i]:
                succ[i].append(j)
                pred[j].append(i)
    a = circuit.arrays
    reach = _backend.kernels.reach_counts(a.qptr, a.qidx, a.erroneous, circuit.num_qubits)
    return DependencyGraph(
        num_nodes=n,
        successors=tuple(tuple(sorted(s)) for s in succ),
        predecessors=tuple(tuple(sorted(p)) for p in pred),
        levels=tuple(int(v) for v in circuit.layer_of),
        reach_counts=tuple(int(v) for v in reach),
        erroneous=tuple(g.erroneous for g in gates),
    )


def reachable_count(graph: DependencyGraph, gate_id: int) -> int:
    graph._check(gate_id)
    return graph.reach_counts[gate_id]


def reachable_set(graph: DependencyGraph, gate_id: int) -> set[int]:
    """All nodes reachable from ``gate_id`` (any kind), excluding itself."""
    graph._check(gate_id)
    seen: set[int] = set()
    stack = list(graph.successors[gate_id])
    while stack:
        v = stack.pop()
        if v not in seen:
            seen.add(v)
            stack.extend(graph.successors[v])
    return seen


def immediate_dependents(graph: DependencyGraph, gate_id: int) -> set[int]:
    graph._check(gate_id)
    return set(graph.successors[gate_id])


def propagation_footprint(circuit: Circuit, gate_id: int) -> set[int]:
    """Output qubits a fault on ``gate_id`` can reach, assuming every later
    gate touching an affected qubit spreads the error to all its qubits.

    Barriers are fences, not interactions: they pass an error along its own
    qubit but never spread it sideways.
    """
    if not 0 <= gate_id < len(circuit.gates):
        raise CircuitError(f"unknown gate id {gate_id}")
    affected = set(circuit.gates[gate_id].qubits)
    for g in circuit.gates[gate_id + 1 :]:
        if g.kind != "barrier" and affected.intersection(g.qubits):
            affected.update(g.qubits)
    return affected
