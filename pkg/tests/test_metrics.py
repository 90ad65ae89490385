import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qresched.circuit import Circuit, barrier, cx, h, measure, rz, sx, x
from qresched.metrics import (
    CalibrationData,
    CalibrationError,
    approximation_ratio,
    arg,
    esp,
    gate_error,
    load_calibration,
    pst,
    wesp,
    wesp_value,
)
from qresched.qaoa import path_graph, triangle

from helpers import random_calibration, random_circuit, wesp_oracle


def _doc(**over):
    doc = {
        "name": "line5",
        "qubits": [
            {"id": q, "readout_error": 0.02, "gate_errors": {"h": 1e-3, "x": 1e-3, "sx": 1e-3, "rz": 0}}
            for q in range(5)
        ],
        "edges": [{"qubits": [q, q + 1], "cx_error": 0.01} for q in range(4)],
    }
    doc.update(over)
    return doc


class TestCalibration:
    def test_line_coupling(self):
        cal = load_calibration(json.dumps(_doc()))
        assert cal.coupling == {(0, 1), (1, 2), (2, 3), (3, 4)}

    def test_out_of_range(self):
        doc = _doc()
        doc["edges"][0]["cx_error"] = 1.2
        with pytest.raises(CalibrationError):
            load_calibration(json.dumps(doc))

    def test_missing_readout(self):
        doc = _doc()
        del doc["qubits"][3]["readout_error"]
        with pytest.raises(CalibrationError, match="readout_error"):
            load_calibration(json.dumps(doc))

    def test_duplicates(self):
        doc = _doc()
        doc["qubits"].append(dict(doc["qubits"][0]))
        with pytest.raises(CalibrationError, match="duplicate"):
            load_calibration(json.dumps(doc))
        doc = _doc()
        doc["edges"].append({"qubits": [1, 0], "cx_error": 0.02})
        with pytest.raises(CalibrationError, match="duplicate"):
            load_calibration(json.dumps(doc))

    def test_nonzero_rz_rejected(self):
        doc = _doc()
        doc["qubits"][0]["gate_errors"]["rz"] = 0.01
        with pytest.raises(CalibrationError):
            load_calibration(json.dumps(doc))

    def test_bad_json(self):
        with pytest.raises(CalibrationError):
            load_calibration("{not json")

    def test_document_round_trip(self):
        cal = load_calibration(json.dumps(_doc()))
        again = load_calibration(json.dumps(cal.to_document()))
        assert again == cal


class TestGateError:
    cal = CalibrationData.uniform(4, [(0, 1), (1, 2), (2, 3)], single=1e-3, cx=0.01).with_edge_errors({(1, 2): 0.02})

    def test_rz_zero(self):
        assert gate_error(self.cal, rz(1.0, 2)) == 0.0

    def test_edge_rate_symmetric(self):
        assert gate_error(self.cal, cx(1, 2)) == 0.02 == gate_error(self.cal, cx(2, 1))

    def test_uncoupled(self):
        with pytest.raises(CalibrationError):
            gate_error(self.cal, cx(0, 3))

    def test_barrier_measure_zero(self):
        assert gate_error(self.cal, barrier(0, 1)) == 0.0
        assert gate_error(self.cal, measure(0, 0)) == 0.0


class TestEsp:
    def test_hand_value(self):
        cal = CalibrationData.uniform(3, [(0, 1), (1, 2)], readout=0.03).with_edge_errors({(0, 1): 0.01, (1, 2): 0.02})
        c = Circuit(3, (cx(0, 1), cx(1, 2), measure(2, 0)), 1)
        assert esp(c, cal) == pytest.approx(0.99 * 0.98 * 0.97, abs=1e-15)
        assert round(esp(c, cal), 6) == 0.941094

    def test_noiseless(self):
        cal = CalibrationData.uniform(3, [(0, 1), (1, 2)])
        assert esp(random_circuit(3, 20, seed=1, measures=True).with_gates(
            g for g in random_circuit(3, 20, seed=1).gates if g.kind != "cx" or abs(g.qubits[0] - g.qubits[1]) == 1
        ), cal) == 1.0

    def test_order_free(self):
        cal = random_calibration(3, seed=4)
        c1 = Circuit(3, (cx(0, 1), cx(0, 2), measure(0, 0)), 1)
        c2 = Circuit(3, (cx(0, 2), cx(0, 1), measure(0, 0)), 1)
        assert esp(c1, cal) == pytest.approx(esp(c2, cal), abs=1e-15)


class TestWesp:
    def test_two_gate_chain(self):
        cal = CalibrationData.uniform(3, [(0, 1), (1, 2)], readout=0.01).with_edge_errors({(0, 1): 0.02, (1, 2): 0.01})
        c = Circuit(3, (cx(0, 1), cx(1, 2)) + tuple(measure(q, q) for q in range(3)), 3)
        r = wesp(c, cal)
        assert r.erroneous_gate_count == 2
        assert [m.reach for m in r.per_gate] == [1, 0]
        assert [m.weight for m in r.per_gate] == [0.5, 0.0]
        assert r.per_gate[0].penalty == pytest.approx(0.005)
        assert r.wesp == pytest.approx(0.975 * 0.99 * 0.99**3, abs=1e-15)
        # the product is 0.93658110975; the 6th digit rounds down
        assert f"{r.wesp:.5f}" == "0.93658"
        assert r.wesp == pytest.approx(wesp_oracle(c, cal), abs=1e-15)

    def test_uniform_equals_esp(self):
        cal = CalibrationData.uniform(4, [(0, 1), (1, 2), (2, 3), (0, 2), (0, 3), (1, 3)], single=0.01, cx=0.01, readout=0.02)
        c = random_circuit(4, 30, seed=9)
        r = wesp(c, cal)
        assert all(m.penalty == 0 for m in r.per_gate)
        assert abs(r.wesp - r.esp) <= 1e-12

    def test_no_erroneous_gates(self):
        cal = CalibrationData.uniform(1, [], readout=0.1)
        r = wesp(Circuit(1, (rz(0.2, 0), measure(0, 0)), 1), cal)
        assert r.per_gate == [] and r.wesp == r.esp == pytest.approx(0.9)

    def test_penalty_clamped(self):
        cal = CalibrationData.uniform(3, [(0, 1), (1, 2)]).with_edge_errors({(0, 1): 0.9, (1, 2): 0.0})
        c = Circuit(3, (cx(0, 1), cx(0, 1), cx(1, 2), cx(1, 2)))
        r = wesp(c, cal)
        assert r.wesp == 0.0 and r.per_gate[0].error + r.per_gate[0].penalty > 1

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 40), st.integers(0, 10**6))
    def test_against_oracle(self, n, size, seed):
        c = random_circuit(n, size, seed, barriers=True)
        cal = random_calibration(n, seed)
        r = wesp(c, cal)
        assert r.wesp == pytest.approx(wesp_oracle(c, cal), rel=1e-12, abs=1e-15)
        assert wesp_value(c, cal) == pytest.approx(r.wesp, rel=1e-12, abs=1e-15)
        assert 0.0 <= r.wesp <= r.esp + 1e-15 <= 1.0 + 1e-15
        readout = math.prod(1 - cal.readout_error(q) for q in c.measured_qubits())
        assert r.recompute_wesp(readout) == pytest.approx(r.wesp, rel=1e-12, abs=1e-15)
        assert [m.gate_id for m in r.per_gate] == [i for i, g in enumerate(c.gates) if g.erroneous]

    def test_equal_iff_no_penalty(self):
        cal = random_calibration(4, seed=2)
        r = wesp(random_circuit(4, 20, seed=2), cal)
        assert (r.wesp == r.esp) == all(m.penalty == 0 for m in r.per_gate)

    def test_order_sensitivity(self):
        """Moving the noisiest gate later raises WESP at equal ESP."""
        cal = CalibrationData.uniform(3, [(0, 1), (0, 2)], readout=0.01).with_edge_errors({(0, 1): 0.05, (0, 2): 0.01})
        first = Circuit(3, (cx(0, 1), cx(0, 2), h(0), measure(0, 0)), 1)
        last = Circuit(3, (cx(0, 2), cx(0, 1), h(0), measure(0, 0)), 1)
        assert esp(first, cal) == pytest.approx(esp(last, cal), abs=1e-15)
        assert wesp(last, cal).wesp > wesp(first, cal).wesp

    def test_report_dict(self):
        cal = random_calibration(2, seed=0)
        d = wesp(Circuit(2, (h(0), cx(0, 1), measure(1, 0)), 1), cal).to_dict()
        assert d["G"] == 2 and d["Q"] == 1 and len(d["per_gate"]) == 2


class TestOutcomeMetrics:
    def test_pst(self):
        assert pst({"110": 7056, "010": 1136}, "110") == 0.861328125
        assert pst({"1": 10}, "1") == 1.0
        assert pst({"0": 10}, "1") == 0.0

    def test_pst_width(self):
        with pytest.raises(ValueError):
            pst({"10": 3}, "1")

    def test_pst_empty(self):
        with pytest.raises(ValueError):
            pst({}, "1")

    def test_ar(self):
        g = triangle()
        assert approximation_ratio({"010": 5, "101": 5}, g) == 1.0
        assert approximation_ratio({"000": 1, "010": 1}, g) == 0.5
        with pytest.raises(ValueError):
            approximation_ratio({}, g)

    def test_ar_zero_cut(self):
        from qresched.qaoa import MaxCutGraph

        with pytest.raises(ValueError):
            approximation_ratio({"00": 1}, MaxCutGraph(2, ()))

    def test_arg(self):
        assert arg(0.9, 0.72) == pytest.approx(20.0)
        assert arg(0.8, 0.8) == 0.0
        with pytest.raises(ValueError):
            arg(0.0, 0.5)

    def test_ar_in_unit_interval(self):
        g = path_graph(4)
        counts = {format(i, "04b"): i + 1 for i in range(16)}
        assert 0.0 <= approximation_ratio(counts, g) <= 1.0
