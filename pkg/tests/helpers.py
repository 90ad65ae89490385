"""Shared builders and independent oracles for the test suite."""
from __future__ import annotations

import itertools

import numpy as np

from qresched.circuit import Circuit, Gate, barrier, cx, h, measure, rz, sx, x
from qresched.metrics import CalibrationData


def line_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, i + 1) for i in range(n - 1)]


def all_pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def random_calibration(n: int, seed: int, pairs=None, *, dominant: float | None = None) -> CalibrationData:
    """Random rates; ``dominant`` makes one edge that many times noisier."""
    rng = np.random.default_rng(seed)
    pairs = all_pairs(n) if pairs is None else pairs
    cal = CalibrationData.uniform(n, pairs, single=0.0, cx=0.0, readout=0.0, name=f"rand{seed}")
    qubits = {}
    from qresched.metrics import QubitCalibration

    for q in range(n):
        s = float(rng.uniform(2e-4, 2e-3))
        qubits[q] = QubitCalibration(float(rng.uniform(0.005, 0.05)), {"h": s, "x": s, "sx": s, "rz": 0.0})
    edges = {frozenset(p): float(rng.uniform(0.005, 0.03)) for p in pairs}
    if dominant is not None:
        worst = pairs[int(rng.integers(len(pairs)))]
        edges[frozenset(worst)] = max(edges.values()) * dominant
    return CalibrationData(cal.name, qubits, edges)


def random_circuit(n: int, size: int, seed: int, *, measures: bool = True, barriers: bool = False) -> Circuit:
    """Seeded circuit over the full gate basis with cx on all pairs."""
    rng = np.random.default_rng(seed)
    gates: list[Gate] = []
    for _ in range(size):
        r = rng.random()
        if r < 0.45 and n > 1:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(cx(int(a), int(b)))
        elif r < 0.6:
            gates.append(rz(float(rng.uniform(-np.pi, np.pi)), int(rng.integers(n))))
        elif barriers and r < 0.65:
            qs = sorted(set(int(q) for q in rng.choice(n, size=int(rng.integers(1, n + 1)))))
            gates.append(barrier(*qs))
        else:
            kind = ("h", "x", "sx")[int(rng.integers(3))]
            gates.append(Gate(kind, (int(rng.integers(n)),)))
    if measures:
        gates.extend(measure(q, q) for q in range(n))
    return Circuit(n, tuple(gates), n if measures else 0)


def closure_reach(circuit: Circuit) -> list[set[int]]:
    """Reachable sets by a transitive closure over next-on-qubit edges."""
    n = len(circuit.gates)
    adj = [[False] * n for _ in range(n)]
    for i, g in enumerate(circuit.gates):
        for q in g.qubits:
            for j in range(i + 1, n):
                if q in circuit.gates[j].qubits:
                    adj[i][j] = True
                    break
    for k in range(n):
        for i in range(n):
            if adj[i][k]:
                for j in range(n):
                    if adj[k][j]:
                        adj[i][j] = True
    return [{j for j in range(n) if adj[i][j]} for i in range(n)]


def wesp_oracle(circuit: Circuit, cal: CalibrationData) -> float:
    """WESP straight from the definition via transitive closure."""
    reach = closure_reach(circuit)
    err = [i for i, g in enumerate(circuit.gates) if g.erroneous]
    prod = 1.0
    for q in circuit.measured_qubits():
        prod *= 1.0 - cal.readout_error(q)
    if not err:
        return prod
    rates = {i: cal.gate_error(circuit.gates[i]) for i in err}
    emin = min(rates.values())
    for i in err:
        s = sum(1 for j in reach[i] if circuit.gates[j].erroneous)
        lam = s / len(err) * (rates[i] - emin)
        prod *= 1.0 - min(1.0, rates[i] + lam)
    return prod


def longest_path_layers(circuit: Circuit) -> list[int]:
    """Layer of each gate as the longest predecessor chain, by memoised
    recursion over brute-force predecessor sets."""
    gates = circuit.gates
    preds = []
    for j, g in enumerate(gates):
        ps = set()
        for q in g.qubits:
            for i in range(j - 1, -1, -1):
                if q in gates[i].qubits:
                    ps.add(i)
                    break
        preds.append(ps)
    memo: dict[int, int] = {}

    def layer(j: int) -> int:
        if j not in memo:
            memo[j] = max((layer(i) + 1 for i in preds[j]), default=0)
        return memo[j]

    return [layer(j) for j in range(len(gates))]


def longest_path_depth(circuit: Circuit) -> int:
    lays = longest_path_layers(circuit)
    return len({lays[i] for i, g in enumerate(circuit.gates) if g.kind != "barrier"})
