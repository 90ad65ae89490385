"""WESP-guided gate rescheduling.

Three passes share one search engine:

* :func:`reschedule_elementary` - greedy layer sweep over elementary gates.
* :func:`reschedule_zz` - the same sweep over ZZ phase blocks of a QAOA
  circuit, scored with block-level errors from :func:`lookahead_block_errors`.
* :func:`reschedule_combined` - block pass followed by the elementary pass.

:func:`exhaustive_reschedule` enumerates every schedule reachable through
legal swaps and serves as the optimality oracle for the greedy pass.

The engine keeps a permutation of gate ids sorted by (layer, id).  In that
order a legal swap of a gate with an immediate dependent is an exchange of
the two entries, so candidates are scored by the kernels without building
new circuit objects.
"""
from __future__ import annotations

import time
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import _backend
from .circuit import Circuit, Gate, depth
from .commutation import Occupancy, commutes, depth_safe
from .metrics import CalibrationData, check_coverage, gate_errors, readout_product, wesp_value

IMPROVE_RTOL = 1e-12


class RescheduleError(ValueError):
    pass


class ScheduleLimitExceeded(RescheduleError):
    def __init__(self, found: int, limit: int):
        self.found = found
        self.limit = limit
        super().__init__(f"more than {limit} schedules (found {found} so far)")


@dataclass(frozen=True)
class RescheduleResult:
    circuit: Circuit
    swaps_applied: int
    wesp_before: float
    wesp_after: float
    elapsed_ms: float
    level: str = "elementary"
    schedules: int | None = None
    stages: tuple["RescheduleResult", ...] = ()

    def to_dict(self) -> dict:
        out = {
            "level": self.level,
            "R": self.swaps_applied,
            "wesp_before": self.wesp_before,
            "wesp_after": self.wesp_after,
            "elapsed_ms": round(self.elapsed_ms, 3),
        }
        if self.schedules is not None:
            out["schedules"] = self.schedules
        if self.stages:
            out["stages"] = [s.to_dict() for s in self.stages]
        return out


def _improves(new: float, cur: float) -> bool:
    return new > cur + IMPROVE_RTOL * abs(cur)


class _Engine:
    """Schedule search state over ``units`` (gates or ZZ blocks)."""

    def __init__(
        self,
        units: Sequence,
        num_qubits: int,
        erroneous: np.ndarray,
        errors: np.ndarray,
        barrier: np.ndarray,
        can_commute: Callable[[int, int], bool],
        accept: Callable[[np.ndarray], bool] | None = None,
    ):
        self.units = units
        self.n = len(units)
        self.num_qubits = num_qubits
        qptr = np.zeros(self.n + 1, dtype=np.int64)
        flat: list[int] = []
        for i, u in enumerate(units):
            flat.extend(u.qubits)
            qptr[i + 1] = len(flat)
        self.qptr = qptr
        self.qidx = np.asarray(flat, dtype=np.int64)
        self.erroneous = np.ascontiguousarray(erroneous, dtype=np.uint8)
        self.errors = np.ascontiguousarray(errors, dtype=float)
        self.nonbarrier = ~np.asarray(barrier, dtype=bool)
        self.can_commute = can_commute
        self.accept = accept
        self.ids = np.arange(self.n, dtype=np.int64)
        self.set_order(self.ids)
        self.depth = self.depth_of(self.layers)

    # state -----------------------------------------------------------
    def layers_of(self, order: np.ndarray) -> np.ndarray:
        return _backend.kernels.asap_layers(self.qptr, self.qidx, self.num_qubits, order)

    def depth_of(self, layers: np.ndarray) -> int:
        return int(np.unique(layers[self.nonbarrier]).size)

    def value(self, order: np.ndarray) -> float:
        return _backend.kernels.wesp_gate_product(
            self.qptr, self.qidx, self.erroneous, self.errors, self.num_qubits, order
        )

    def set_order(self, order: np.ndarray, layers: np.ndarray | None = None) -> None:
        if layers is None:
            layers = self.layers_of(order)
        self.layers = layers
        self.order = np.lexsort((self.ids, layers))
        self.pos = np.empty(self.n, dtype=np.int64)
        self.pos[self.order] = self.ids
        seq: list[list[int]] = [[] for _ in range(self.num_qubits)]
        lay: list[list[int]] = [[] for _ in range(self.num_qubits)]
        lay_list = layers.tolist()
        for g in self.order.tolist():
            for q in self.units[g].qubits:
                seq[q].append(g)
                lay[q].append(lay_list[g])
        self.seq = seq
        self.lay_list = lay_list
        self.occ = Occupancy(lay)

    def dependents(self, g: int) -> list[int]:
        out: list[int] = []
        t = self.lay_list[g]
        for q in self.units[g].qubits:
            k = bisect_left(self.occ.layers[q], t) + 1
            if k < len(self.seq[q]):
                nxt = self.seq[q][k]
                if nxt not in out:
                    out.append(nxt)
        return out

    def key(self) -> tuple[int, ...]:
        return tuple(self.order.tolist())

    # moves -----------------------------------------------------------
    def try_swap(self, g: int, k: int) -> tuple[np.ndarray, np.ndarray] | None:
        """Order and layers after exchanging ``g`` with dependent ``k``, or
        None when the exchange is illegal or changes the depth."""
        if not self.can_commute(g, k):
            return None
        ok = depth_safe(self.units[g], self.units[k], self.lay_list[g], self.lay_list[k], self.occ)
        if not ok:
            return None
        new = self.order.copy()
        pg, pk = self.pos[g], self.pos[k]
        new[pg], new[pk] = k, g
        layers = self.layers_of(new)
        if self.depth_of(layers) != self.depth:
            return None
        if self.accept is not None and not self.accept(new):
            return None
        return new, layers

    def legal_moves(self):
        for g in self.order.tolist():
            for k in self.dependents(g):
                # exchanging identical gates yields the same circuit
                if self.units[g] == self.units[k]:
                    continue
                res = self.try_swap(g, k)
                if res is not None:
                    yield g, k, res

    # searches --------------------------------------------------------
    def greedy(self, sweeps: int = 1) -> int:
        applied = 0
        current = self.value(self.order)
        for _ in range(sweeps):
            visited: set[int] = set()
            applied_this_sweep = 0
            layer = 0
            while layer <= max(self.lay_list, default=-1):
                snapshot = [g for g in self.order.tolist() if self.lay_list[g] == layer]
                for g in snapshot:
                    if g in visited:
                        continue
                    visited.add(g)
                    best = None
                    best_val = current
                    for k in self.dependents(g):
                        res = self.try_swap(g, k)
                        if res is None:
                            continue
                        val = self.value(res[0])
                        if _improves(val, best_val):
                            best, best_val = res, val
                    if best is not None:
                        self.set_order(*best)
                        current = best_val
                        applied += 1
                        applied_this_sweep += 1
                layer += 1
            if applied_this_sweep == 0:
                break
        return applied

    def exhaustive(self, limit: int) -> tuple[np.ndarray, float, int]:
        start = (self.order.copy(), self.layers.copy())
        seen = {self.key()}
        best_key = self.key()
        best_val = self.value(self.order)
        best_order = self.order.copy()
        queue = deque([start])
        while queue:
            order, layers = queue.popleft()
            self.set_order(order, layers)
            for _, _, (new, new_layers) in list(self.legal_moves()):
                canon = np.lexsort((self.ids, new_layers))
                key = tuple(canon.tolist())
                if key in seen:
                    continue
                seen.add(key)
                if len(seen) > limit:
                    self.set_order(*start)
                    raise ScheduleLimitExceeded(len(seen), limit)
                val = self.value(canon)
                if _improves(val, best_val) or (not _improves(best_val, val) and key < best_key):
                    best_key, best_val, best_order = key, val, canon
                queue.append((new, new_layers))
        self.set_order(*start)
        return best_order, best_val, len(seen)


# elementary level -------------------------------------------------------

def _elementary_engine(circuit: Circuit, cal: CalibrationData) -> _Engine:
    gates = circuit.gates
    a = circuit.arrays

    def can_commute(g: int, k: int) -> bool:
        return commutes(gates[g], gates[k])

    return _Engine(gates, circuit.num_qubits, a.erroneous, gate_errors(circuit, cal), a.barrier, can_commute)


def _emit(circuit: Circuit, order: np.ndarray) -> Circuit:
    return circuit.with_gates(circuit.gates[i] for i in order.tolist())


def reschedule_elementary(circuit: Circuit, cal: CalibrationData, sweeps: int = 1) -> RescheduleResult:
    """Greedy WESP-maximising sweep over layers (one sweep by default).

    For every gate, each legal exchange with an immediate dependent is scored
    and the best strictly improving one is applied; otherwise the gate stays.
    """
    t0 = time.perf_counter()
    check_coverage(circuit, cal)
    before = wesp_value(circuit, cal)
    if len(circuit) == 0:
        return RescheduleResult(circuit, 0, before, before, 0.0)
    engine = _elementary_engine(circuit, cal)
    applied = engine.greedy(sweeps)
    out = circuit if applied == 0 else _emit(circuit, engine.order)
    after = wesp_value(out, cal) if applied else before
    return RescheduleResult(out, applied, before, after, (time.perf_counter() - t0) * 1e3)


def exhaustive_reschedule(circuit: Circuit, cal: CalibrationData, schedule_limit: int = 10000) -> RescheduleResult:
    """Best-WESP schedule among all reachable by legal depth-preserving swaps.

    Ties are broken towards the lexicographically smallest gate-id sequence.
    ``schedules`` in the result counts distinct schedules, the input included.
    """
    t0 = time.perf_counter()
    check_coverage(circuit, cal)
    before = wesp_value(circuit, cal)
    engine = _elementary_engine(circuit, cal)
    best_order, _, count = engine.exhaustive(schedule_limit)
    changed = not np.array_equal(best_order, engine.order)
    out = _emit(circuit, best_order) if changed else circuit
    after = wesp_value(out, cal)
    return RescheduleResult(
        out, int(changed), before, after, (time.perf_counter() - t0) * 1e3, level="exhaustive", schedules=count
    )


def enumerate_schedules(circuit: Circuit, cal: CalibrationData, schedule_limit: int = 10000) -> list[Circuit]:
    """All reachable schedules as circuits (the input first)."""
    engine = _elementary_engine(circuit, cal)
    seen = {engine.key(): engine.order.copy()}
    queue = deque([(engine.order.copy(), engine.layers.copy())])
    while queue:
        engine.set_order(*queue.popleft())
        for _, _, (new, new_layers) in list(engine.legal_moves()):
            canon = np.lexsort((engine.ids, new_layers))
            key = tuple(canon.tolist())
            if key not in seen:
                seen[key] = canon
                if len(seen) > schedule_limit:
                    raise ScheduleLimitExceeded(len(seen), schedule_limit)
                queue.append((new, new_layers))
    return [_emit(circuit, order) for order in seen.values()]


# ZZ block level ---------------------------------------------------------

@dataclass(frozen=True)
class ZZBlock:
    block_id: int
    qubits: tuple[int, int]
    angle: float
    elementary_ids: tuple[int, ...]
    block_error: float = 0.0


class _Unit(NamedTuple):
    qubits: tuple[int, ...]
    members: tuple[int, ...]
    block: int | None


def find_blocks(circuit: Circuit) -> dict[int, ZZBlock]:
    """Validate the block tags of a circuit and return its ZZ blocks."""
    members: dict[int, list[int]] = {}
    for i, g in enumerate(circuit.gates):
        if g.block_id is not None:
            members.setdefault(g.block_id, []).append(i)
        elif g.kind == "cx":
            raise RescheduleError(f"gate {i} ({g}) is an untagged two-qubit gate")
    blocks: dict[int, ZZBlock] = {}
    for b, ids in members.items():
        gs = [circuit.gates[i] for i in ids]
        shape = [g.kind for g in gs]
        if shape != ["cx", "rz", "cx"]:
            raise RescheduleError(f"block {b} is {shape}, expected cx, rz, cx")
        a, t = gs[0].qubits
        if gs[2].qubits != (a, t) or gs[1].qubits != (t,):
            raise RescheduleError(f"block {b} is not cx(a,b) rz(b) cx(a,b)")
        for i in range(ids[0] + 1, ids[2]):
            if i not in ids and set(circuit.gates[i].qubits) & {a, t}:
                raise RescheduleError(f"block {b} is interleaved with gate {i} ({circuit.gates[i]})")
        blocks[b] = ZZBlock(b, (a, t), gs[1].angle, tuple(ids))
    return blocks


def lookahead_block_errors(
    circuit: Circuit, cal: CalibrationData, aggregation: str = "complement"
) -> dict[int, float]:
    """Error rate of every ZZ block from its elementary gates, in one scan.

    ``aggregation="complement"`` gives ``1 - prod(1 - e)``; ``"product"``
    multiplies the raw elementary error rates instead.
    """
    if aggregation not in ("complement", "product"):
        raise ValueError(f"unknown aggregation {aggregation!r}")
    blocks = find_blocks(circuit)
    out: dict[int, float] = {}
    for b, blk in blocks.items():
        errs = [cal.gate_error(circuit.gates[i]) for i in blk.elementary_ids]
        if aggregation == "complement":
            ok = 1.0
            for e in errs:
                ok *= 1.0 - e
            out[b] = 1.0 - ok
        else:
            # the rz member is error free; multiply the rates that exist
            prod = 1.0
            for i, e in zip(blk.elementary_ids, errs):
                if circuit.gates[i].erroneous:
                    prod *= e
            out[b] = prod
    return out


def block_units(circuit: Circuit) -> list[_Unit]:
    """Collapse each ZZ block into one unit placed at its first gate."""
    blocks = find_blocks(circuit)
    units: list[_Unit] = []
    for i, g in enumerate(circuit.gates):
        if g.block_id is None:
            units.append(_Unit(g.qubits, (i,), None))
        elif blocks[g.block_id].elementary_ids[0] == i:
            blk = blocks[g.block_id]
            units.append(_Unit(blk.qubits, blk.elementary_ids, blk.block_id))
    return units


def _expand(units: Sequence[_Unit], order: np.ndarray) -> np.ndarray:
    return np.fromiter(
        (m for u in order.tolist() for m in units[u].members), dtype=np.int64
    )


def blocks_commute_by_matrix(circuit: Circuit, a: _Unit, b: _Unit) -> bool:
    """Exact commutation of two blocks on their joint support."""
    from .simulator import unitary

    support = sorted(set(a.qubits) | set(b.qubits))
    if len(support) > 4:
        raise RescheduleError("block pair spans more than four qubits")
    relabel = {q: i for i, q in enumerate(support)}
    gates = [circuit.gates[i] for i in a.members + b.members]
    local = [Gate(g.kind, tuple(relabel[q] for q in g.qubits), g.angle) for g in gates]
    na = len(a.members)
    ab = unitary(Circuit(len(support), tuple(local)))
    ba = unitary(Circuit(len(support), tuple(local[na:] + local[:na])))
    return float(np.max(np.abs(ab - ba))) <= 1e-10


def _zz_engine(circuit: Circuit, cal: CalibrationData, aggregation: str) -> tuple[_Engine, list[_Unit]]:
    units = block_units(circuit)
    berr = lookahead_block_errors(circuit, cal, aggregation)
    is_block = np.array([u.block is not None for u in units], dtype=np.uint8)
    errors = np.array([berr[u.block] if u.block is not None else 0.0 for u in units])
    barrier = np.array([circuit.gates[u.members[0]].kind == "barrier" for u in units])
    def can_commute(g: int, k: int) -> bool:
        # validated blocks are diagonal ZZ phases, so any two commute;
        # blocks_commute_by_matrix is the exact check used by the tests
        return units[g].block is not None and units[k].block is not None

    elem = circuit.arrays
    elem_depth = depth(circuit)

    def accept(order: np.ndarray) -> bool:
        layers = _backend.kernels.asap_layers(elem.qptr, elem.qidx, circuit.num_qubits, _expand(units, order))
        return int(np.unique(layers[elem.barrier == 0]).size) == elem_depth

    return _Engine(units, circuit.num_qubits, is_block, errors, barrier, can_commute, accept), units


def block_wesp(circuit: Circuit, cal: CalibrationData, aggregation: str = "complement") -> float:
    """WESP over ZZ blocks: blocks are the erroneous units, readout included."""
    engine, _ = _zz_engine(circuit, cal, aggregation)
    return engine.value(engine.order) * readout_product(circuit, cal)


def reschedule_zz(
    circuit: Circuit,
    cal: CalibrationData,
    sweeps: int = 1,
    aggregation: str = "complement",
) -> RescheduleResult:
    """Greedy rescheduling of commuting ZZ blocks scored by block-level WESP.

    ``wesp_before``/``wesp_after`` are block-level values; the elementary
    values are in the ``stages`` entry of the result.  A block order that
    lowers the elementary WESP of the circuit is not emitted.
    """
    t0 = time.perf_counter()
    check_coverage(circuit, cal)
    elem_before = wesp_value(circuit, cal)
    engine, units = _zz_engine(circuit, cal, aggregation)
    readout = readout_product(circuit, cal)
    before = engine.value(engine.order) * readout
    start = engine.order.copy()
    applied = engine.greedy(sweeps)
    out = circuit
    after = before
    if applied:
        candidate = _emit(circuit, _expand(units, engine.order))
        if wesp_value(candidate, cal) + IMPROVE_RTOL * elem_before < elem_before:
            engine.set_order(start)
            applied = 0
        else:
            out = candidate
            after = engine.value(engine.order) * readout
    elem_after = wesp_value(out, cal) if applied else elem_before
    elapsed = (time.perf_counter() - t0) * 1e3
    elementary = RescheduleResult(out, applied, elem_before, elem_after, elapsed, level="zz-elementary")
    return RescheduleResult(out, applied, before, after, elapsed, level="zz", stages=(elementary,))


def reschedule_combined(
    circuit: Circuit,
    cal: CalibrationData,
    sweeps: int = 1,
    aggregation: str = "complement",
) -> RescheduleResult:
    """ZZ-block pass followed by the elementary pass; WESP values are elementary."""
    t0 = time.perf_counter()
    zz = reschedule_zz(circuit, cal, sweeps=sweeps, aggregation=aggregation)
    elem = reschedule_elementary(zz.circuit, cal, sweeps=sweeps)
    before = zz.stages[0].wesp_before
    return RescheduleResult(
        elem.circuit,
        zz.swaps_applied + elem.swaps_applied,
        before,
        elem.wesp_after,
        (time.perf_counter() - t0) * 1e3,
        level="both",
        stages=(zz, elem),
    )
