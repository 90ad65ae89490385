"""Command-line interface: ``qresched {metrics,reschedule,simulate,qaoa}``.

Reports go to stdout as JSON with sorted keys.  Bitstrings are little-endian:
the rightmost character is classical bit 0.  Exit status is 0 on success,
2 for bad input and 3 when a rescheduled circuit fails its self-check.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from collections import Counter
from pathlib import Path

from . import __version__
from .circuit import Circuit, CircuitError, depth
from .metrics import CalibrationError, approximation_ratio, arg, load_calibration, pst, wesp
from .qaoa import GraphError, QaoaSpec, apply_block_tags, block_tags, build_qaoa, load_graph
from .qasm import QasmError, emit_qasm, parse_qasm
from .rescheduler import (
    RescheduleError,
    exhaustive_reschedule,
    reschedule_combined,
    reschedule_elementary,
    reschedule_zz,
)
from .simulator import SimConfig, SimulationError, exact_distribution, sample_noisy, unitary_distance

VERIFY_QUBIT_LIMIT = 6
EXIT_INPUT = 2
EXIT_INVARIANT = 3


class InvariantViolation(RuntimeError):
    pass


class InputError(ValueError):
    pass


def tags_path(qasm_path: str | Path) -> Path:
    """Sidecar holding gate-index -> block-id tags for a circuit file."""
    return Path(qasm_path).with_suffix(".tags.json")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_circuit(path: str, tags: str | None = None) -> tuple[Circuit, str]:
    text = _read(path)
    circuit = parse_qasm(text)
    sidecar = Path(tags) if tags else tags_path(path)
    if tags or sidecar.exists():
        try:
            doc = json.loads(_read(str(sidecar)))
            circuit = apply_block_tags(circuit, {int(k): int(v) for k, v in doc.items()})
        except (json.JSONDecodeError, AttributeError, ValueError) as exc:
            raise InputError(f"bad tag sidecar {sidecar}: {exc}") from None
    return circuit, hashlib.sha256(text.encode()).hexdigest()


def _write_circuit(circuit: Circuit, out: str) -> None:
    Path(out).write_text(emit_qasm(circuit), encoding="utf-8")
    tags = block_tags(circuit)
    if tags:
        tags_path(out).write_text(json.dumps({str(k): v for k, v in tags.items()}, indent=2) + "\n")


def _emit(report: dict) -> None:
    sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")


def cmd_metrics(args) -> dict:
    circuit, digest = _load_circuit(args.qasm)
    cal = load_calibration(_read(args.calibration))
    report = wesp(circuit, cal).to_dict()
    report["lambda_zero"] = all(m["lambda"] == 0.0 for m in report["per_gate"])
    return {"command": "metrics", "input_sha256": digest, "metrics": report}


def _multiset(c: Circuit) -> Counter:
    return Counter(g.signature() for g in c.gates)


def cmd_reschedule(args) -> dict:
    circuit, digest = _load_circuit(args.qasm, args.tags)
    cal = load_calibration(_read(args.calibration))
    if args.exhaustive is not None:
        if args.level != "elementary":
            raise InputError("--exhaustive applies to --level elementary only")
        result = exhaustive_reschedule(circuit, cal, args.exhaustive)
    elif args.level == "elementary":
        result = reschedule_elementary(circuit, cal, sweeps=args.sweeps)
    else:
        if not block_tags(circuit):
            raise InputError(f"--level {args.level} needs ZZ block tags (use --tags)")
        run = reschedule_zz if args.level == "zz" else reschedule_combined
        result = run(circuit, cal, sweeps=args.sweeps)
    out = result.circuit
    if depth(out) != depth(circuit) or _multiset(out) != _multiset(circuit):
        raise InvariantViolation("rescheduled circuit changed depth or gate multiset")
    verified = None
    if args.verify and circuit.num_qubits <= VERIFY_QUBIT_LIMIT:
        dist = unitary_distance(circuit.unitary_part(), out.unitary_part())
        if dist > 1e-10:
            raise InvariantViolation(f"rescheduled circuit is not equivalent (deviation {dist:.3g})")
        verified = True
    _write_circuit(out, args.output)
    before, after = wesp(circuit, cal), wesp(out, cal)
    return {
        "command": "reschedule",
        "input_sha256": digest,
        "level": args.level,
        "R": result.swaps_applied,
        "depth": depth(out),
        "elapsed_ms": round(result.elapsed_ms, 3),
        "result": result.to_dict(),
        "before": {"esp": before.esp, "wesp": before.wesp},
        "after": {"esp": after.esp, "wesp": after.wesp},
        "verified": verified,
        "output": args.output,
    }


def _sim_summary(circuit: Circuit, cal, config: SimConfig, args, graph) -> dict:
    counts = sample_noisy(circuit, cal, config, workers=args.workers)
    out: dict = {"histogram": counts}
    if args.expected is not None:
        if len(args.expected) != circuit.num_clbits:
            raise InputError(f"--expected has {len(args.expected)} bits, circuit has {circuit.num_clbits}")
        out["pst"] = pst(counts, args.expected)
    else:
        ideal = exact_distribution(circuit)
        scale = 1 << 40
        ar_sim = approximation_ratio({k: round(v * scale) for k, v in ideal.items()}, graph)
        ar_exec = approximation_ratio(counts, graph)
        out.update({"ar": ar_exec, "ar_ideal": ar_sim, "arg": arg(ar_sim, ar_exec)})
    return out


def cmd_simulate(args) -> dict:
    if (args.expected is None) == (args.graph is None):
        raise InputError("give exactly one of --expected or --graph")
    circuit, digest = _load_circuit(args.qasm)
    cal = load_calibration(_read(args.calibration))
    graph = load_graph(_read(args.graph)) if args.graph else None
    if graph is not None and graph.n != circuit.num_clbits:
        raise InputError(f"graph has {graph.n} nodes, circuit measures {circuit.num_clbits} bits")
    config = SimConfig(shots=args.shots, seed=args.seed)
    report = {
        "command": "simulate",
        "input_sha256": digest,
        "shots": args.shots,
        "seed": args.seed,
        "bit_order": "little-endian (rightmost character is clbit 0)",
        "result": _sim_summary(circuit, cal, config, args, graph),
    }
    if args.compare:
        base, base_digest = _load_circuit(args.compare)
        report["base"] = _sim_summary(base, cal, config, args, graph)
        report["base_sha256"] = base_digest
        key = "pst" if args.expected is not None else "ar"
        report["delta_" + key] = report["result"][key] - report["base"][key]
    return report


def _angles(text: str, p: int, name: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"--{name} must be numbers separated by commas") from None
    if len(values) == 1:
        values = values * p
    if len(values) != p:
        raise InputError(f"--{name} needs 1 or {p} values")
    return values


def cmd_qaoa(args) -> dict:
    graph = load_graph(_read(args.graph))
    spec = QaoaSpec(graph, _angles(args.gamma, args.p, "gamma"), _angles(args.beta, args.p, "beta"))
    circuit = build_qaoa(spec)
    _write_circuit(circuit, args.output)
    return {
        "command": "qaoa",
        "nodes": graph.n,
        "p": spec.p,
        "blocks": len(set(block_tags(circuit).values())),
        "gates": len(circuit),
        "depth": depth(circuit),
        "output": args.output,
        "tags": str(tags_path(args.output)),
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qresched", description="Noise-aware gate rescheduling of mapped quantum circuits.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("metrics", help="ESP and WESP of a circuit")
    m.add_argument("--qasm", required=True)
    m.add_argument("--calibration", required=True)
    m.set_defaults(func=cmd_metrics)

    r = sub.add_parser("reschedule", help="reorder gates to raise WESP at fixed depth")
    r.add_argument("--qasm", required=True)
    r.add_argument("--calibration", required=True)
    r.add_argument("--level", choices=("elementary", "zz", "both"), default="elementary")
    r.add_argument("--sweeps", type=int, default=1)
    r.add_argument("--exhaustive", type=int, metavar="LIMIT")
    r.add_argument("--tags", help="block-tag sidecar (default: <qasm>.tags.json if present)")
    r.add_argument("-o", "--output", required=True)
    r.add_argument("--no-verify", dest="verify", action="store_false",
                   help=f"skip the unitary check done for <= {VERIFY_QUBIT_LIMIT} qubits")
    r.set_defaults(func=cmd_reschedule)

    s = sub.add_parser("simulate", help="noisy sampling with PST or AR")
    s.add_argument("--qasm", required=True)
    s.add_argument("--calibration", required=True)
    s.add_argument("--shots", type=int, default=8192)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--expected")
    s.add_argument("--graph")
    s.add_argument("--compare", metavar="BASE")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    q = sub.add_parser("qaoa", help="generate a tagged Max-Cut QAOA circuit")
    q.add_argument("--graph", required=True)
    q.add_argument("--gamma", required=True)
    q.add_argument("--beta", required=True)
    q.add_argument("--p", type=int, default=1)
    q.add_argument("-o", "--output", required=True)
    q.set_defaults(func=cmd_qaoa)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "sweeps", 1) < 1 or getattr(args, "shots", 1) < 1:
        print("qresched: error: --sweeps and --shots must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        report = args.func(args)
    except InvariantViolation as exc:
        print(f"qresched: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (InputError, QasmError, CalibrationError, GraphError, RescheduleError,
            SimulationError, CircuitError, OSError) as exc:
        print(f"qresched: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
