"""Statevector simulation, unitary equivalence and stochastic Pauli sampling.

Qubit order is little-endian everywhere: qubit 0 is the least significant
bit of a basis-state index, and bitstrings are printed with classical bit 0
as the rightmost character.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .circuit import Circuit, Gate

if TYPE_CHECKING:
    from .metrics import CalibrationData

SAMPLING_QUBIT_LIMIT = 14
UNITARY_QUBIT_LIMIT = 6

_SQ2 = 1.0 / np.sqrt(2.0)
PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_FIXED = {
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "x": PAULI["X"],
    "sx": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex),
}
# |c t> with c the first tensor factor
CX_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


class SimulationError(ValueError):
    pass


def gate_matrix(gate: Gate) -> np.ndarray:
    """Matrix of a unitary gate; for cx the first tensor factor is the control."""
    if gate.kind == "rz":
        half = 0.5 * gate.angle
        return np.diag([np.exp(-1j * half), np.exp(1j * half)])
    if gate.kind == "cx":
        return CX_MATRIX
    try:
        return _FIXED[gate.kind]
    except KeyError:
        raise SimulationError(f"{gate.kind} has no unitary") from None


def _apply(state: np.ndarray, mat: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Apply ``mat`` to a batched state of shape (batch, 2, ..., 2).

    Tensor axis ``1 + (n - 1 - q)`` holds qubit ``q``.
    """
    k = len(qubits)
    axes = [1 + (n - 1 - q) for q in qubits]
    op = mat.reshape((2,) * (2 * k))
    out = np.tensordot(state, op, axes=(axes, list(range(k, 2 * k))))
    # tensordot appends the new axes at the end; move them back in place
    return np.moveaxis(out, list(range(out.ndim - k, out.ndim)), axes)


def _run(circuit: Circuit, state: np.ndarray) -> np.ndarray:
    n = circuit.num_qubits
    for g in circuit.gates:
        if g.unitary:
            state = _apply(state, gate_matrix(g), g.qubits, n)
    return state


def statevector(circuit: Circuit, qubit_limit: int = SAMPLING_QUBIT_LIMIT) -> np.ndarray:
    """Pre-measurement state of ``circuit`` applied to |0...0>."""
    n = circuit.num_qubits
    if n > qubit_limit:
        raise SimulationError(f"{n} qubits exceeds the limit of {qubit_limit}")
    state = np.zeros((1,) + (2,) * n, dtype=complex)
    state[(0,) * (n + 1)] = 1.0
    return _run(circuit, state).reshape(2**n)


def unitary(circuit: Circuit, qubit_limit: int = UNITARY_QUBIT_LIMIT) -> np.ndarray:
    n = circuit.num_qubits
    if n > qubit_limit:
        raise SimulationError(f"{n} qubits exceeds the limit of {qubit_limit}")
    dim = 2**n
    # batch axis indexes the input basis state
    state = np.eye(dim, dtype=complex).reshape((dim,) + (2,) * n)
    return _run(circuit, state).reshape(dim, dim).T


def unitary_distance(c1: Circuit, c2: Circuit) -> float:
    """Max-entry distance between U2^dag U1 and the nearest phase times identity."""
    if c1.num_qubits != c2.num_qubits:
        raise SimulationError("circuits act on different qubit counts")
    m = unitary(c2).conj().T @ unitary(c1)
    phase = np.trace(m) / m.shape[0]
    if abs(phase) > 0:
        phase /= abs(phase)
    return float(np.max(np.abs(m - phase * np.eye(m.shape[0]))))


def unitary_equivalent(c1: Circuit, c2: Circuit, tol: float = 1e-10) -> bool:
    return unitary_distance(c1, c2) <= tol


@dataclass(frozen=True)
class SimConfig:
    shots: int = 8192
    seed: int = 0
    qubit_limit: int = SAMPLING_QUBIT_LIMIT

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise SimulationError("shots must be >= 1")


def _shot_uniforms(seed: int, shots: range, width: int) -> np.ndarray:
    """Uniform draws for a block of shots; each shot owns an independent
    substream keyed by (seed, shot index)."""
    out = np.empty((len(shots), width))
    for row, s in enumerate(shots):
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(s,))
        out[row] = np.random.Generator(np.random.PCG64(ss)).random(width)
    return out


def _apply_pauli(state: np.ndarray, which: np.ndarray, q: int, n: int) -> np.ndarray:
    """Apply X (1), Y (2) or Z (3) on qubit ``q`` per batch row; 0 leaves it."""
    axis = 1 + (n - 1 - q)
    flip = (which == 1) | (which == 2)
    phase = (which == 2) | (which == 3)
    if flip.any():
        state[flip] = np.flip(state[flip], axis=axis)
    if phase.any():
        idx = [slice(None)] * state.ndim
        idx[axis] = 1
        sub = state[phase]
        sub[tuple(idx)] *= -1.0
        state[phase] = sub
    # Y is applied as Z X, equal to Y up to a global phase
    return state


def sample_noisy(
    circuit: Circuit,
    cal: "CalibrationData | None",
    config: SimConfig = SimConfig(),
    *,
    force_pauli: str | None = None,
    workers: int = 1,
    chunk: int | None = None,
) -> dict[str, int]:
    """Sample measurement outcomes under stochastic Pauli and readout noise.

    After each erroneous gate a fault fires with probability ``e_g``; when it
    fires every qubit of the gate independently receives X, Y or Z chosen
    uniformly (``force_pauli`` pins the choice, for tests).  Each measured
    bit is then flipped with probability ``e_m``.  Results depend only on
    ``(circuit, cal, config)``: every shot draws from its own substream, so
    chunking and ``workers`` do not change the histogram.
    """
    n = circuit.num_qubits
    if n > config.qubit_limit:
        raise SimulationError(f"{n} qubits exceeds the sampling limit of {config.qubit_limit}")
    measures = [g for g in circuit.gates if g.kind == "measure"]
    if not measures:
        raise SimulationError("circuit has no measurements")
    ops = [g for g in circuit.gates if g.unitary]
    if cal is None:
        errs = [0.0] * len(ops)
        readout = [0.0] * len(measures)
    else:
        errs = [cal.gate_error(g) for g in ops]
        readout = [cal.readout_error(g.qubits[0]) for g in measures]

    # column layout of the per-shot uniform draws
    cols: list[int] = []
    width = 0
    for g in ops:
        cols.append(width)
        if g.erroneous:
            width += 1 + len(g.qubits)
    meas_col = width
    width += len(measures) + 1
    forced = None if force_pauli is None else "IXYZ".index(force_pauli.upper())

    dim = 2**n
    if chunk is None:
        chunk = max(1, min(config.shots, (1 << 21) // dim))
    blocks = [range(s, min(s + chunk, config.shots)) for s in range(0, config.shots, chunk)]

    def run_block(shots: range) -> np.ndarray:
        u = _shot_uniforms(config.seed, shots, width)
        m = len(shots)
        state = np.zeros((m,) + (2,) * n, dtype=complex)
        state[(slice(None),) + (0,) * n] = 1.0
        for g, col, e in zip(ops, cols, errs):
            state = _apply(state, gate_matrix(g), g.qubits, n)
            if g.erroneous and e > 0.0:
                fire = u[:, col] < e
                if fire.any():
                    for k, q in enumerate(g.qubits):
                        which = np.zeros(m, dtype=np.int64)
                        pick = 1 + np.minimum((u[:, col + 1 + k] * 3).astype(np.int64), 2)
                        which[fire] = pick[fire] if forced is None else forced
                        state = _apply_pauli(state, which, q, n)
        probs = np.abs(state.reshape(m, dim)) ** 2
        cum = np.cumsum(probs, axis=1)
        cum /= cum[:, -1:]
        outcome = np.minimum((cum < u[:, -1:]).sum(axis=1), dim - 1)
        bits = np.zeros((m, circuit.num_clbits), dtype=np.uint8)
        for k, g in enumerate(measures):
            b = (outcome >> g.qubits[0]) & 1
            flipped = u[:, meas_col + k] < readout[k]
            bits[:, g.clbit] = b ^ flipped
        return bits

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_block, blocks))
    else:
        parts = [run_block(b) for b in blocks]
    allbits = np.concatenate(parts, axis=0)
    weights = 1 << np.arange(circuit.num_clbits, dtype=np.int64)
    values = allbits.astype(np.int64) @ weights
    uniq, counts = np.unique(values, return_counts=True)
    width_c = circuit.num_clbits
    return {format(int(v), f"0{width_c}b"): int(c) for v, c in zip(uniq, counts)}


def exact_distribution(circuit: Circuit) -> dict[str, float]:
    """Noiseless outcome probabilities over the classical register."""
    probs = np.abs(statevector(circuit)) ** 2
    measures = [g for g in circuit.gates if g.kind == "measure"]
    out: dict[str, float] = {}
    for idx, p in enumerate(probs):
        if p < 1e-15:
            continue
        bits = ["0"] * circuit.num_clbits
        for g in measures:
            bits[circuit.num_clbits - 1 - g.clbit] = str((idx >> g.qubits[0]) & 1)
        key = "".join(bits)
        out[key] = out.get(key, 0.0) + float(p)
    return out


# Pauli propagation through CNOT: symplectic (x, z) bits per qubit.
_LABEL = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {v: k for k, v in _LABEL.items()}


def pauli_conjugate_cx(pauli: str, on: str) -> tuple[str, str]:
    """Conjugate a single-qubit Pauli on the control or target of a CNOT.

    Returns the (control, target) labels of ``CX P CX``.  For single-qubit
    inputs the resulting sign is always +1.
    """
    pauli = pauli.upper()
    if pauli not in ("X", "Y", "Z") or on not in ("control", "target"):
        raise ValueError(f"bad Pauli input {pauli!r} on {on!r}")
    xc, zc = _BITS[pauli] if on == "control" else (0, 0)
    xt, zt = _BITS[pauli] if on == "target" else (0, 0)
    # X on control spreads to target, Z on target spreads to control
    xt ^= xc
    zc ^= zt
    return _LABEL[(xc, zc)], _LABEL[(xt, zt)]
