"""Compare the compiled and pure-Python kernels on QAOA workloads.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``.
"""
from __future__ import annotations

import argparse
import itertools
import time

import numpy as np

from qresched import _backend
from qresched.metrics import CalibrationData
from qresched.qaoa import QaoaSpec, build_qaoa, random_graph
from qresched.rescheduler import reschedule_combined, reschedule_elementary


def _workload(n: int, degree: int, p: int, seed: int):
    graph = random_graph(n, degree, seed, regular=(n * degree) % 2 == 0)
    circuit = build_qaoa(QaoaSpec(graph, [0.4] * p, [0.3] * p))
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    cal = CalibrationData.uniform(n, pairs, cx=0.01, single=5e-4, readout=0.02).with_edge_errors(
        {e: float(rng.uniform(0.005, 0.05)) for e in pairs}
    )
    return circuit, cal


def _best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times) * 1e3


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    compiled = _backend.kernels.NAME
    if compiled != "cython":
        print("compiled kernels unavailable; only the Python backend is timed")
    rows = []
    for n, degree, p in ((10, 4, 1), (15, 6, 1), (15, 6, 2), (15, 8, 2)):
        circuit, cal = _workload(n, degree, p, seed=7)
        a = circuit.arrays
        errors = np.array([cal.gate_error(g) for g in circuit.gates])
        row = [f"n={n} d={degree} p={p}", len(circuit)]
        for name in dict.fromkeys((compiled, "python")):
            _backend.use(name)
            k = _backend.kernels
            row.append(_best(lambda: k.wesp_gate_product(a.qptr, a.qidx, a.erroneous, errors, circuit.num_qubits), args.repeat))
            row.append(_best(lambda: reschedule_elementary(circuit, cal), args.repeat))
            row.append(_best(lambda: reschedule_combined(circuit, cal), args.repeat))
        _backend.use(compiled)
        rows.append(row)
    backends = list(dict.fromkeys((compiled, "python")))
    head = ["workload", "gates"] + [f"{b}:{m}" for b in backends for m in ("wesp_ms", "elem_ms", "both_ms")]
    print("  ".join(f"{h:>16}" for h in head))
    for row in rows:
        print("  ".join(f"{v:>16.3f}" if isinstance(v, float) else f"{v!s:>16}" for v in row))


if __name__ == "__main__":
    main()
