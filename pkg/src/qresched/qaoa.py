"""Max-Cut QAOA circuit generation and cost evaluation."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import IO, Any, Iterable, Mapping, Sequence

import numpy as np

from .circuit import Circuit, Gate, h, measure, rz, sx

BRUTE_FORCE_LIMIT = 20


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    weight: float = 1.0


@dataclass(frozen=True)
class MaxCutGraph:
    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(self.edges))
        if self.n < 2:
            raise GraphError("graph needs at least two nodes")
        seen = set()
        for e in self.edges:
            if e.u == e.v:
                raise GraphError(f"self loop on node {e.u}")
            if not (0 <= e.u < self.n and 0 <= e.v < self.n):
                raise GraphError(f"edge ({e.u}, {e.v}) outside {self.n} nodes")
            if e.weight < 0:
                raise GraphError(f"negative weight on ({e.u}, {e.v})")
            key = frozenset((e.u, e.v))
            if key in seen:
                raise GraphError(f"duplicate edge ({e.u}, {e.v})")
            seen.add(key)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple], weight: float = 1.0) -> "MaxCutGraph":
        edges = []
        for p in pairs:
            u, v = p[0], p[1]
            w = p[2] if len(p) > 2 else weight
            edges.append(Edge(int(u), int(v), float(w)))
        return cls(n, tuple(edges))

    def to_document(self) -> dict[str, Any]:
        return {"n": self.n, "edges": [{"u": e.u, "v": e.v, "weight": e.weight} for e in self.edges]}


def load_graph(source: str | bytes | IO) -> MaxCutGraph:
    if hasattr(source, "read"):
        source = source.read()
    try:
        doc = json.loads(source)
        n = doc["n"]
        edges = [Edge(int(e["u"]), int(e["v"]), float(e.get("weight", 1.0))) for e in doc["edges"]]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise GraphError(f"bad graph document: {exc}") from None
    if not isinstance(n, int):
        raise GraphError("'n' must be an integer")
    return MaxCutGraph(n, tuple(edges))


def triangle(weight: float = 1.0) -> MaxCutGraph:
    return MaxCutGraph.from_pairs(3, [(0, 1), (1, 2), (0, 2)], weight)


def path_graph(n: int, weight: float = 1.0) -> MaxCutGraph:
    return MaxCutGraph.from_pairs(n, [(i, i + 1) for i in range(n - 1)], weight)


def random_graph(
    n: int,
    degree: int,
    seed: int,
    *,
    regular: bool = False,
    weight_range: tuple[float, float] = (0.1, 1.0),
) -> MaxCutGraph:
    """Seeded random weighted graph.

    ``regular=True`` draws a ``degree``-regular graph (a circulant graph
    randomised by degree-preserving edge swaps); otherwise every node pair is joined with
    probability ``degree / (n - 1)`` (average degree ``degree``).
    """
    rng = np.random.default_rng(seed)
    lo, hi = weight_range
    if regular:
        if n * degree % 2 or degree >= n:
            raise GraphError(f"no {degree}-regular graph on {n} nodes")
        chosen = _random_regular(n, degree, rng)
    else:
        prob = min(1.0, degree / (n - 1))
        chosen = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < prob]
    weights = rng.uniform(lo, hi, size=len(chosen))
    return MaxCutGraph(n, tuple(Edge(u, v, round(float(w), 6)) for (u, v), w in zip(chosen, weights)))


def _random_regular(n: int, degree: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Circulant start graph shuffled by degree-preserving double edge swaps."""
    edges = {tuple(sorted((u, (u + k) % n))) for u in range(n) for k in range(1, degree // 2 + 1)}
    if degree % 2:
        edges |= {(u, u + n // 2) for u in range(n // 2)}
    edges = sorted(edges)
    present = set(edges)
    for _ in range(10 * len(edges)):
        i, j = rng.choice(len(edges), size=2, replace=False)
        (a, b), (c, d) = edges[i], edges[j]
        if rng.random() < 0.5:
            c, d = d, c
        e1, e2 = tuple(sorted((a, d))), tuple(sorted((c, b)))
        if a == d or c == b or e1 in present or e2 in present:
            continue
        present -= {edges[i], edges[j]}
        present |= {e1, e2}
        edges[i], edges[j] = e1, e2
    return sorted(edges)


@dataclass(frozen=True)
class QaoaSpec:
    graph: MaxCutGraph
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "gammas", tuple(float(v) for v in self.gammas))
        object.__setattr__(self, "betas", tuple(float(v) for v in self.betas))
        if not self.gammas or len(self.gammas) != len(self.betas):
            raise GraphError("need p >= 1 matching gamma and beta values")

    @property
    def p(self) -> int:
        return len(self.gammas)


def zz_gates(a: int, b: int, theta: float, block_id: int) -> list[Gate]:
    """exp(-i theta/2 Z_a Z_b) as cx, rz on the target, cx."""
    return [
        Gate("cx", (a, b), block_id=block_id),
        Gate("rz", (b,), angle=theta, block_id=block_id),
        Gate("cx", (a, b), block_id=block_id),
    ]


def rx_gates(theta: float, q: int) -> list[Gate]:
    """RX(theta) in the {rz, sx} basis, exact up to global phase."""
    return [rz(math.pi / 2, q), sx(q), rz(theta + math.pi, q), sx(q), rz(math.pi / 2, q)]


def build_qaoa(
    spec: QaoaSpec, coupling: Iterable[tuple[int, int]] | None = None, measure_all: bool = True
) -> Circuit:
    graph = spec.graph
    allowed = None if coupling is None else {frozenset(e) for e in coupling}
    gates: list[Gate] = [h(q) for q in range(graph.n)]
    block = 0
    for gamma, beta in zip(spec.gammas, spec.betas):
        for e in graph.edges:
            if allowed is not None and frozenset((e.u, e.v)) not in allowed:
                raise GraphError(f"edge ({e.u}, {e.v}) is not in the coupling map")
            gates.extend(zz_gates(e.u, e.v, 2.0 * gamma * e.weight, block))
            block += 1
        for q in range(graph.n):
            gates.extend(rx_gates(2.0 * beta, q))
    if measure_all:
        gates.extend(measure(q, q) for q in range(graph.n))
    return Circuit(graph.n, tuple(gates), graph.n if measure_all else 0)


def block_tags(circuit: Circuit) -> dict[int, int]:
    return {i: g.block_id for i, g in enumerate(circuit.gates) if g.block_id is not None}


def apply_block_tags(circuit: Circuit, tags: Mapping[int, int]) -> Circuit:
    gates = list(circuit.gates)
    for i, b in tags.items():
        i = int(i)
        if not 0 <= i < len(gates):
            raise GraphError(f"tag for gate index {i} outside the circuit")
        g = gates[i]
        gates[i] = Gate(g.kind, g.qubits, g.angle, g.clbit, int(b))
    return circuit.with_gates(gates)


def maxcut_cost(bitstring: str, graph: MaxCutGraph) -> float:
    """Cut weight; character ``n-1-k`` of the string is node ``k``."""
    if len(bitstring) != graph.n:
        raise GraphError(f"bitstring width {len(bitstring)} != {graph.n} nodes")
    bit = bitstring[::-1]
    return float(sum(e.weight for e in graph.edges if bit[e.u] != bit[e.v]))


def cost_vector(graph: MaxCutGraph) -> np.ndarray:
    """Cut weight for every basis index (little-endian)."""
    idx = np.arange(2**graph.n)
    out = np.zeros(2**graph.n)
    for e in graph.edges:
        out += e.weight * (((idx >> e.u) ^ (idx >> e.v)) & 1)
    return out


def max_cost(graph: MaxCutGraph) -> float:
    if graph.n > BRUTE_FORCE_LIMIT:
        raise GraphError(f"brute force limited to {BRUTE_FORCE_LIMIT} nodes")
    return float(cost_vector(graph).max())


def expected_cost(state: np.ndarray, graph: MaxCutGraph) -> float:
    return float(np.dot(np.abs(state) ** 2, cost_vector(graph)))


def default_angles(p: int = 1) -> tuple[Sequence[float], Sequence[float]]:
    """Fixed reference angles used when none are supplied."""
    return [0.4] * p, [0.3] * p
