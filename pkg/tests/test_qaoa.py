import itertools
import json

import numpy as np
import pytest

from qresched.circuit import Circuit, depth
from qresched.metrics import approximation_ratio
from qresched.qaoa import (
    GraphError,
    MaxCutGraph,
    QaoaSpec,
    apply_block_tags,
    block_tags,
    build_qaoa,
    cost_vector,
    expected_cost,
    load_graph,
    max_cost,
    maxcut_cost,
    path_graph,
    random_graph,
    rx_gates,
    triangle,
)
from qresched.simulator import exact_distribution, gate_matrix, sample_noisy, statevector, unitary, unitary_equivalent, SimConfig


def test_triangle_structure():
    c = build_qaoa(QaoaSpec(triangle(), [0.4], [0.3]))
    kinds = [g.kind for g in c.gates]
    assert kinds[:3] == ["h"] * 3
    assert len(set(block_tags(c).values())) == 3
    assert kinds.count("sx") == 6  # two per mixer
    assert kinds.count("measure") == 3


def test_p2_doubles_blocks():
    g = triangle()
    c1 = build_qaoa(QaoaSpec(g, [0.4], [0.3]))
    c2 = build_qaoa(QaoaSpec(g, [0.4, 0.2], [0.3, 0.1]))
    assert len(set(block_tags(c2).values())) == 2 * len(set(block_tags(c1).values()))
    assert depth(c2) > depth(c1)


def test_blocks_on_declared_edges_only():
    c = build_qaoa(QaoaSpec(path_graph(4), [0.4], [0.3]))
    pairs = {tuple(g.qubits) for g in c.gates if g.kind == "cx"}
    assert pairs == {(0, 1), (1, 2), (2, 3)}


def test_coupling_violation():
    with pytest.raises(GraphError):
        build_qaoa(QaoaSpec(triangle(), [0.4], [0.3]), coupling=[(0, 1), (1, 2)])


def test_rx_decomposition():
    for theta in np.linspace(-3, 3, 7):
        c = Circuit(1, tuple(rx_gates(theta, 0)))
        want = np.array([[np.cos(theta / 2), -1j * np.sin(theta / 2)], [-1j * np.sin(theta / 2), np.cos(theta / 2)]])
        u = unitary(c)
        phase = want[0, 0] / u[0, 0] if abs(u[0, 0]) > 1e-9 else want[0, 1] / u[0, 1]
        assert np.allclose(u * phase, want, atol=1e-12)


def test_zz_block_is_phase():
    c = build_qaoa(QaoaSpec(MaxCutGraph.from_pairs(2, [(0, 1, 1.5)]), [0.4], [0.0]), measure_all=False)
    block = Circuit(2, tuple(g for g in c.gates if g.block_id is not None))
    theta = 2 * 0.4 * 1.5
    want = np.diag(np.exp(-1j * theta / 2 * np.array([1, -1, -1, 1])))
    assert unitary_equivalent(block, block) and np.allclose(
        unitary(block) * (want[0, 0] / unitary(block)[0, 0]), want, atol=1e-12
    )


def test_cost_values():
    g = triangle()
    assert maxcut_cost("010", g) == 2 and maxcut_cost("000", g) == 0
    assert max_cost(g) == 2
    assert maxcut_cost("01", MaxCutGraph.from_pairs(2, [(0, 1, 3.5)])) == 3.5
    with pytest.raises(GraphError):
        maxcut_cost("01", g)


def test_brute_force_limit():
    with pytest.raises(GraphError):
        max_cost(path_graph(21))


def test_cost_symmetry():
    g = random_graph(6, 3, seed=4)
    for i in range(64):
        s = format(i, "06b")
        comp = "".join("1" if ch == "0" else "0" for ch in s)
        assert maxcut_cost(s, g) == maxcut_cost(comp, g)


def test_cost_vector_matches_strings():
    g = random_graph(5, 2, seed=2)
    vec = cost_vector(g)
    for i in range(32):
        assert vec[i] == pytest.approx(maxcut_cost(format(i, "05b"), g))


def test_exact_ar_matches_expectation():
    g = random_graph(5, 2, seed=8)
    c = build_qaoa(QaoaSpec(g, [0.5], [0.35]))
    dist = exact_distribution(c)
    mean = sum(p * maxcut_cost(b, g) for b, p in dist.items())
    state = statevector(c.unitary_part())
    assert mean / max_cost(g) == pytest.approx(expected_cost(state, g) / max_cost(g), abs=1e-9)


def test_path_sampled_ar_matches_statevector():
    g = path_graph(3)
    c = build_qaoa(QaoaSpec(g, [0.4], [0.3]))
    counts = sample_noisy(c, None, SimConfig(shots=8192, seed=5))
    exact = expected_cost(statevector(c.unitary_part()), g) / max_cost(g)
    var = np.dot(np.abs(statevector(c.unitary_part())) ** 2, (cost_vector(g) / max_cost(g) - exact) ** 2)
    assert abs(approximation_ratio(counts, g) - exact) <= 4 * np.sqrt(var / 8192)


def test_block_permutations_equivalent():
    g = MaxCutGraph.from_pairs(4, [(0, 1, 0.3), (1, 2, 0.9), (0, 2, 0.5), (2, 3, 0.7)])
    c = build_qaoa(QaoaSpec(g, [0.45], [0.2]), measure_all=False)
    head = [gt for gt in c.gates if gt.kind == "h"]
    blocks = {}
    for gt in c.gates:
        if gt.block_id is not None:
            blocks.setdefault(gt.block_id, []).append(gt)
    tail = [gt for gt in c.gates if gt.block_id is None and gt.kind != "h"]
    for perm in itertools.permutations(blocks):
        body = [gt for b in perm for gt in blocks[b]]
        assert unitary_equivalent(c, c.with_gates(head + body + tail))


def test_graph_validation():
    with pytest.raises(GraphError):
        MaxCutGraph.from_pairs(3, [(0, 0)])
    with pytest.raises(GraphError):
        MaxCutGraph.from_pairs(3, [(0, 1), (1, 0)])
    with pytest.raises(GraphError):
        MaxCutGraph(1, ())
    with pytest.raises(GraphError):
        MaxCutGraph.from_pairs(3, [(0, 1, -1.0)])
    with pytest.raises(GraphError):
        load_graph('{"edges": []}')


def test_graph_document_round_trip():
    g = random_graph(6, 3, seed=1)
    assert load_graph(json.dumps(g.to_document())) == g


def test_random_graph_modes():
    reg = random_graph(15, 6, seed=3, regular=True)
    deg = np.zeros(15, dtype=int)
    for e in reg.edges:
        deg[e.u] += 1
        deg[e.v] += 1
    assert set(deg) == {6}
    assert random_graph(15, 6, seed=3) == random_graph(15, 6, seed=3)
    with pytest.raises(GraphError):
        random_graph(5, 3, seed=0, regular=True)


def test_tags_round_trip():
    c = build_qaoa(QaoaSpec(triangle(), [0.4], [0.3]))
    bare = c.with_gates(g.__class__(g.kind, g.qubits, g.angle, g.clbit) for g in c.gates)
    assert apply_block_tags(bare, block_tags(c)) == c
    with pytest.raises(GraphError):
        apply_block_tags(bare, {999: 0})
