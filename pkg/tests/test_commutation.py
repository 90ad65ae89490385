import itertools

import numpy as np
import pytest

from qresched.circuit import Circuit, Gate, barrier, cx, depth, h, measure, rz, sx, x
from qresched.commutation import (
    CommutationError,
    Occupancy,
    can_swap_preserving_depth,
    commute_by_matrix,
    commute_by_rule,
    commutes,
    swap_candidate,
)
from qresched.simulator import unitary_equivalent

from helpers import random_circuit


def _all_gates(support: int, angles):
    out = []
    for q in range(support):
        out += [h(q), x(q), sx(q)] + [rz(a, q) for a in angles]
    for a, b in itertools.permutations(range(support), 2):
        out.append(cx(a, b))
    return out


class TestRules:
    def test_cx_shared_control(self):
        assert commute_by_rule(cx(0, 1), cx(0, 2)) is True

    def test_rz_on_control(self):
        assert commute_by_rule(rz(0.7, 0), cx(0, 1)) is True

    def test_cx_chain_unknown_then_false(self):
        assert commute_by_rule(cx(0, 1), cx(1, 2)) is None
        assert commute_by_matrix(cx(0, 1), cx(1, 2)) is False
        assert commutes(cx(0, 1), cx(1, 2)) is False

    def test_measure_barrier_never(self):
        assert commute_by_rule(measure(0, 0), h(1)) is False
        assert commute_by_rule(barrier(0, 1), h(0)) is False
        assert commutes(measure(0, 0), h(1)) is False

    def test_self(self):
        for g in (h(0), cx(0, 1), rz(0.3, 1)):
            assert commute_by_matrix(g, g)

    def test_h_x(self):
        assert commute_by_matrix(h(0), x(0)) is False

    def test_x_on_target(self):
        assert commute_by_matrix(cx(0, 1), x(1)) is True

    def test_matrix_limits(self):
        with pytest.raises(CommutationError):
            commute_by_matrix(cx(0, 1), cx(2, 3))
        with pytest.raises(CommutationError):
            commute_by_matrix(measure(0, 0), h(0))

    def test_rule_sound_against_matrix(self):
        angles = list(np.linspace(-np.pi, np.pi, 16))
        gates = _all_gates(3, angles)
        for g1, g2 in itertools.product(gates, repeat=2):
            rule = commute_by_rule(g1, g2)
            if rule is True:
                assert commute_by_matrix(g1, g2, tol=1e-12), (g1, g2)


def _circ(*gates, n=3):
    return Circuit(n, tuple(gates))


class TestDepthSafe:
    def test_shared_control_pair(self):
        c = _circ(cx(0, 1), cx(0, 2))
        assert can_swap_preserving_depth(c, 0, 1)

    def test_occupied_q2_at_t(self):
        c = _circ(cx(0, 1), h(2), cx(0, 2))
        assert list(c.layer_of) == [0, 0, 1]
        assert not can_swap_preserving_depth(c, 0, 2)

    def test_k3_with_gate_on_q1(self):
        # cx(0,1)@0 ... cx(0,2)@3 with q1 busy at layer 2
        c = Circuit(4, (cx(0, 1), h(2), h(2), h(2), cx(0, 2), h(3), h(3), cx(1, 3)))
        t, tk = int(c.layer_of[0]), int(c.layer_of[4])
        assert (t, tk) == (0, 3)
        assert c.layer_of[7] == 2
        assert not can_swap_preserving_depth(c, 0, 4)

    def test_not_dependent(self):
        c = _circ(cx(0, 1), h(2))
        with pytest.raises(CommutationError):
            can_swap_preserving_depth(c, 0, 1)

    def test_occupancy_busy(self):
        occ = Occupancy([[0, 3, 5]])
        assert occ.busy(0, 1, 3) and not occ.busy(0, 1, 2) and occ.busy(0, 5, 9)

    def test_candidate_fields(self):
        c = _circ(cx(0, 1), cx(0, 2))
        cand = swap_candidate(c, 0, 1)
        assert cand.legal and cand.shared_qubits == frozenset({0})

    def test_swap_safety_random(self):
        """Legal swaps never deepen the circuit and keep the unitary.

        A swap may shorten it (the dependent can slide below layer t), which
        is why the rescheduler also compares depths before accepting.
        """
        checked = 0
        for seed in range(40):
            c = random_circuit(4, 25, seed=seed, measures=False)
            occ = Occupancy.of(c)
            from qresched.circuit import build_dependency_graph

            g = build_dependency_graph(c)
            for a in range(len(c.gates)):
                for b in g.successors[a]:
                    cand = swap_candidate(c, a, b, occupancy=occ)
                    if not cand.legal:
                        continue
                    # exchange the pair in (layer, id) order
                    order = sorted(range(len(c.gates)), key=lambda i: (c.layer_of[i], i))
                    pa, pb = order.index(a), order.index(b)
                    order[pa], order[pb] = b, a
                    swapped = c.with_gates(c.gates[i] for i in order)
                    assert depth(swapped) <= depth(c)
                    assert sorted(map(str, swapped.gates)) == sorted(map(str, c.gates))
                    assert unitary_equivalent(c, swapped)
                    checked += 1
        assert checked > 20
