"""Calibration data and success metrics: ESP, WESP, PST, AR and ARG."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Any, Mapping, Sequence

import numpy as np

from . import _backend
from .circuit import Circuit, Gate, build_dependency_graph, depth

SINGLE_QUBIT_ERROR_KINDS = ("h", "x", "sx", "rz")


class CalibrationError(ValueError):
    """Malformed calibration document or a circuit it does not cover."""


@dataclass(frozen=True)
class QubitCalibration:
    readout_error: float
    gate_errors: Mapping[str, float]


@dataclass(frozen=True)
class CalibrationData:
    name: str
    qubits: Mapping[int, QubitCalibration]
    edges: Mapping[frozenset, float]

    @property
    def coupling(self) -> set[tuple[int, int]]:
        return {tuple(sorted(e)) for e in self.edges}

    def readout_error(self, q: int) -> float:
        try:
            return self.qubits[q].readout_error
        except KeyError:
            raise CalibrationError(f"no calibration for qubit {q}") from None

    def gate_error(self, gate: Gate) -> float:
        if gate.kind in ("rz", "barrier", "measure"):
            for q in gate.qubits:
                if q not in self.qubits:
                    raise CalibrationError(f"no calibration for qubit {q}")
            return 0.0
        if gate.kind == "cx":
            try:
                return self.edges[frozenset(gate.qubits)]
            except KeyError:
                raise CalibrationError(
                    f"cx on uncoupled pair {gate.qubits} in calibration {self.name!r}"
                ) from None
        q = gate.qubits[0]
        if q not in self.qubits:
            raise CalibrationError(f"no calibration for qubit {q}")
        return self.qubits[q].gate_errors.get(gate.kind, 0.0)

    def to_document(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "qubits": [
                {"id": q, "readout_error": c.readout_error, "gate_errors": dict(c.gate_errors)}
                for q, c in sorted(self.qubits.items())
            ],
            "edges": [
                {"qubits": sorted(e), "cx_error": v}
                for e, v in sorted(self.edges.items(), key=lambda kv: sorted(kv[0]))
            ],
        }

    @classmethod
    def uniform(
        cls,
        num_qubits: int,
        coupling: Sequence[tuple[int, int]],
        *,
        single: float = 0.0,
        cx: float = 0.0,
        readout: float = 0.0,
        name: str = "uniform",
    ) -> "CalibrationData":
        qubits = {
            q: QubitCalibration(readout, {"h": single, "x": single, "sx": single, "rz": 0.0})
            for q in range(num_qubits)
        }
        return cls(name, qubits, {frozenset(e): cx for e in coupling})

    def with_edge_errors(self, errors: Mapping[tuple[int, int], float]) -> "CalibrationData":
        edges = dict(self.edges)
        for pair, v in errors.items():
            key = frozenset(pair)
            if key not in edges:
                raise CalibrationError(f"{pair} is not a coupled pair")
            edges[key] = v
        return CalibrationData(self.name, self.qubits, edges)


def _rate(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CalibrationError(f"{where}: expected a number, got {value!r}")
    v = float(value)
    if not 0.0 <= v <= 1.0:
        raise CalibrationError(f"{where}: rate {v} outside [0, 1]")
    return v


def calibration_from_dict(doc: Mapping[str, Any]) -> CalibrationData:
    if not isinstance(doc, Mapping):
        raise CalibrationError("calibration document must be an object")
    for key in ("name", "qubits", "edges"):
        if key not in doc:
            raise CalibrationError(f"missing top-level field {key!r}")
    qubits: dict[int, QubitCalibration] = {}
    for entry in doc["qubits"]:
        for key in ("id", "readout_error", "gate_errors"):
            if key not in entry:
                raise CalibrationError(f"qubit entry {entry.get('id', '?')}: missing {key!r}")
        q = entry["id"]
        if not isinstance(q, int) or q < 0:
            raise CalibrationError(f"bad qubit id {q!r}")
        if q in qubits:
            raise CalibrationError(f"duplicate qubit {q}")
        gate_errors = {}
        for kind, v in entry["gate_errors"].items():
            if kind not in SINGLE_QUBIT_ERROR_KINDS:
                raise CalibrationError(f"qubit {q}: unknown gate kind {kind!r}")
            gate_errors[kind] = _rate(v, f"qubit {q} {kind}")
        if gate_errors.get("rz", 0.0) != 0.0:
            raise CalibrationError(f"qubit {q}: rz error must be 0")
        gate_errors["rz"] = 0.0
        qubits[q] = QubitCalibration(_rate(entry["readout_error"], f"qubit {q} readout"), gate_errors)
    edges: dict[frozenset, float] = {}
    for entry in doc["edges"]:
        if "qubits" not in entry or "cx_error" not in entry:
            raise CalibrationError(f"edge entry missing 'qubits' or 'cx_error': {entry!r}")
        pair = entry["qubits"]
        if len(pair) != 2 or pair[0] == pair[1]:
            raise CalibrationError(f"bad edge {pair!r}")
        key = frozenset(pair)
        if key in edges:
            raise CalibrationError(f"duplicate edge {sorted(pair)}")
        for q in pair:
            if q not in qubits:
                raise CalibrationError(f"edge {sorted(pair)} names unknown qubit {q}")
        edges[key] = _rate(entry["cx_error"], f"edge {sorted(pair)}")
    return CalibrationData(str(doc["name"]), qubits, edges)


def load_calibration(source: str | bytes | IO) -> CalibrationData:
    """Read a JSON calibration document from text, bytes or a file object."""
    if hasattr(source, "read"):
        source = source.read()
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise CalibrationError(f"calibration is not valid JSON: {exc}") from None
    return calibration_from_dict(doc)


def gate_error(cal: CalibrationData, gate: Gate) -> float:
    return cal.gate_error(gate)


def gate_errors(circuit: Circuit, cal: CalibrationData) -> np.ndarray:
    return np.fromiter((cal.gate_error(g) for g in circuit.gates), dtype=float, count=len(circuit))


def readout_product(circuit: Circuit, cal: CalibrationData) -> float:
    prod = 1.0
    for q in circuit.measured_qubits():
        prod *= 1.0 - cal.readout_error(q)
    return prod


def esp(circuit: Circuit, cal: CalibrationData) -> float:
    prod = readout_product(circuit, cal)
    for g in circuit.gates:
        e = cal.gate_error(g)
        if g.erroneous:
            prod *= 1.0 - e
    return prod


@dataclass(frozen=True)
class GateMetric:
    gate_id: int
    kind: str
    qubits: tuple[int, ...]
    layer: int
    error: float
    reach: int
    weight: float
    penalty: float


@dataclass(frozen=True)
class MetricReport:
    esp: float
    wesp: float
    depth: int
    erroneous_gate_count: int
    measured_qubit_count: int
    per_gate: list[GateMetric] = field(default_factory=list)

    def recompute_wesp(self, readout: float) -> float:
        prod = readout
        for m in self.per_gate:
            prod *= 1.0 - min(1.0, m.error + m.penalty)
        return prod

    def to_dict(self) -> dict[str, Any]:
        return {
            "esp": self.esp,
            "wesp": self.wesp,
            "depth": self.depth,
            "G": self.erroneous_gate_count,
            "Q": self.measured_qubit_count,
            "per_gate": [
                {
                    "gate": f"{m.kind} {','.join(map(str, m.qubits))} @{m.layer}",
                    "e_g": m.error,
                    "S": m.reach,
                    "w": m.weight,
                    "lambda": m.penalty,
                }
                for m in self.per_gate
            ],
        }


def wesp(circuit: Circuit, cal: CalibrationData) -> MetricReport:
    """Weighted ESP.

    Each erroneous gate's error is raised by ``w * (e - min_e)`` where ``w``
    is the fraction of erroneous gates reachable from it in the dependency
    graph; the inflated rate is capped at 1.
    """
    errors = gate_errors(circuit, cal)
    graph = build_dependency_graph(circuit)
    readout = readout_product(circuit, cal)
    ids = [i for i, g in enumerate(circuit.gates) if g.erroneous]
    total = len(ids)
    per_gate: list[GateMetric] = []
    prod = readout
    plain = readout
    if total:
        emin = float(min(errors[i] for i in ids))
        for i in ids:
            e = float(errors[i])
            s = graph.reach_counts[i]
            w = s / total
            lam = w * (e - emin)
            per_gate.append(
                GateMetric(i, circuit.gates[i].kind, circuit.gates[i].qubits, graph.levels[i], e, s, w, lam)
            )
            prod *= 1.0 - min(1.0, e + lam)
            plain *= 1.0 - e
    return MetricReport(
        esp=plain,
        wesp=prod,
        depth=depth(circuit),
        erroneous_gate_count=total,
        measured_qubit_count=len(circuit.measured_qubits()),
        per_gate=per_gate,
    )


def wesp_value(circuit: Circuit, cal: CalibrationData, order: np.ndarray | None = None) -> float:
    """Scalar WESP through the compiled kernel (no per-gate report)."""
    a = circuit.arrays
    errors = gate_errors(circuit, cal)
    gates = _backend.kernels.wesp_gate_product(a.qptr, a.qidx, a.erroneous, errors, circuit.num_qubits, order)
    return gates * readout_product(circuit, cal)


def check_coverage(circuit: Circuit, cal: CalibrationData) -> None:
    """Raise :class:`CalibrationError` unless every gate and measure is covered."""
    for g in circuit.gates:
        cal.gate_error(g)
        if g.kind == "measure":
            cal.readout_error(g.qubits[0])


def pst(counts: Mapping[str, int], expected: str) -> float:
    total = sum(counts.values())
    if total < 1:
        raise ValueError("no trials in histogram")
    for key in counts:
        if len(key) != len(expected):
            raise ValueError(f"outcome {key!r} and expected {expected!r} differ in width")
    return counts.get(expected, 0) / total


def approximation_ratio(counts: Mapping[str, int], graph) -> float:
    from .qaoa import max_cost, maxcut_cost

    total = sum(counts.values())
    if total == 0:
        raise ValueError("empty histogram")
    best = max_cost(graph)
    if best == 0:
        raise ValueError("graph has zero maximum cut")
    mean = sum(c * maxcut_cost(bits, graph) for bits, c in counts.items()) / total
    return mean / best


def arg(ar_sim: float, ar_exec: float) -> float:
    """Approximation ratio gap in percent."""
    if ar_sim <= 0:
        raise ValueError("reference approximation ratio must be positive")
    return (ar_sim - ar_exec) / ar_sim * 100.0
