"""OpenQASM 2.0 subset reader and writer.

Supported statements: an optional ``OPENQASM 2.0`` header, ``include`` (ignored),
one ``qreg``, at most one ``creg``, the gates ``h x sx rz cx``, ``barrier``
and ``measure``.  Angles accept arithmetic over numbers and ``pi``.
"""
from __future__ import annotations

import ast
import math
import operator
import re

from .circuit import Circuit, CircuitError, Gate

_GATE_ARITY = {"h": 1, "x": 1, "sx": 1, "rz": 1, "cx": 2}
_TOKEN = re.compile(
    r"\s*(?:(?P<comment>//[^\n]*)|(?P<stmt>[^;]*?)\s*;)", re.S
)


class QasmError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class UnsupportedGateError(QasmError):
    pass


class RegisterRangeError(QasmError):
    pass


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_angle(expr: str) -> float:
    def walk(node: ast.AST) -> float:
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        raise ValueError(expr)

    try:
        return walk(ast.parse(expr.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise ValueError(f"cannot evaluate angle {expr!r}") from None


_ARG = re.compile(r"^(?P<reg>[A-Za-z_]\w*)\s*(?:\[\s*(?P<idx>\d+)\s*\])?$")
_HEAD = re.compile(r"^(?P<name>[A-Za-z_]\w*)\s*(?:\((?P<params>[^)]*)\))?\s*(?P<rest>.*)$", re.S)


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def parse_qasm(text: str) -> Circuit:
    qreg: tuple[str, int] | None = None
    creg: tuple[str, int] | None = None
    gates: list[Gate] = []
    seen_header = False
    pos = 0
    end = len(text)
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:]
            if rest.strip():
                lead = len(rest) - len(rest.lstrip())
                line, col = _line_col(text, pos + lead)
                raise QasmError("statement is missing ';'", line, col)
            break
        pos = m.end()
        if m.group("comment") is not None:
            continue
        stmt = m.group("stmt")
        start = m.start("stmt")
        line, col = _line_col(text, start)

        def fail(msg: str, cls: type[QasmError] = QasmError) -> QasmError:
            return cls(msg, line, col)

        if not stmt:
            continue
        if stmt.startswith("OPENQASM"):
            if seen_header or qreg is not None or gates:
                raise fail("OPENQASM header must come first")
            if not re.fullmatch(r"OPENQASM\s+2(\.0)?", stmt):
                raise fail(f"unsupported version: {stmt!r}")
            seen_header = True
            continue
        if stmt.startswith("include"):
            if not re.fullmatch(r'include\s+"[^"]+"', stmt):
                raise fail(f"malformed include: {stmt!r}")
            continue
        decl = re.fullmatch(r"(qreg|creg)\s+([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]", stmt)
        if decl:
            kind, name, size = decl.group(1), decl.group(2), int(decl.group(3))
            if kind == "qreg":
                if qreg is not None:
                    raise fail("only one qreg is supported")
                qreg = (name, size)
            else:
                if creg is not None:
                    raise fail("only one creg is supported")
                creg = (name, size)
            continue
        if stmt.startswith(("gate ", "opaque ", "if", "reset")):
            raise fail(f"unsupported statement {stmt.split()[0]!r}", UnsupportedGateError)
        if stmt.startswith("measure"):
            mm = re.fullmatch(r"measure\s+(.+?)\s*->\s*(.+)", stmt, re.S)
            if not mm:
                raise fail(f"malformed measure: {stmt!r}")
            qs = _resolve(mm.group(1), qreg, "qreg", fail)
            cs = _resolve(mm.group(2), creg, "creg", fail)
            if len(qs) != len(cs):
                raise fail("measure register sizes differ")
            gates.extend(Gate("measure", (q,), clbit=c) for q, c in zip(qs, cs))
            continue
        head = _HEAD.match(stmt)
        if head is None:
            raise fail(f"cannot parse statement {stmt!r}")
        name, params, rest = head.group("name"), head.group("params"), head.group("rest")
        args = [a.strip() for a in rest.split(",")] if rest.strip() else []
        if name == "barrier":
            qs: list[int] = []
            for a in args:
                qs.extend(_resolve(a, qreg, "qreg", fail))
            if not qs:
                raise fail("barrier needs qubits")
            gates.append(Gate("barrier", tuple(dict.fromkeys(qs))))
            continue
        if name not in _GATE_ARITY:
            raise fail(f"unsupported gate {name!r}", UnsupportedGateError)
        if len(args) != _GATE_ARITY[name]:
            raise fail(f"{name} takes {_GATE_ARITY[name]} qubit argument(s), got {len(args)}")
        if (name == "rz") != (params is not None):
            raise fail(f"{name}: wrong number of parameters")
        angle = None
        if params is not None:
            try:
                angle = _eval_angle(params)
            except ValueError as exc:
                raise fail(str(exc)) from None
        resolved = [_resolve(a, qreg, "qreg", fail) for a in args]
        if any(len(r) != 1 for r in resolved):
            raise fail(f"{name} needs indexed qubit arguments")
        try:
            gates.append(Gate(name, tuple(r[0] for r in resolved), angle=angle))
        except CircuitError as exc:
            raise fail(str(exc)) from None
    if qreg is None:
        raise QasmError("no qreg declared")
    return Circuit(qreg[1], tuple(gates), creg[1] if creg else 0)


def _resolve(arg: str, reg, what: str, fail) -> list[int]:
    m = _ARG.match(arg.strip())
    if m is None:
        raise fail(f"bad register argument {arg!r}")
    if reg is None or m.group("reg") != reg[0]:
        raise fail(f"undeclared {what} {m.group('reg')!r}", RegisterRangeError)
    if m.group("idx") is None:
        return list(range(reg[1]))
    idx = int(m.group("idx"))
    if idx >= reg[1]:
        raise fail(f"index {idx} out of range for {what} {reg[0]}[{reg[1]}]", RegisterRangeError)
    return [idx]


def _fmt_angle(theta: float) -> str:
    return format(theta, ".17g")


def emit_qasm(circuit: Circuit, qreg: str = "q", creg: str = "c") -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg {qreg}[{circuit.num_qubits}];"]
    if circuit.num_clbits:
        lines.append(f"creg {creg}[{circuit.num_clbits}];")
    for g in circuit.gates:
        qs = ",".join(f"{qreg}[{q}]" for q in g.qubits)
        if g.kind == "measure":
            lines.append(f"measure {qs} -> {creg}[{g.clbit}];")
        elif g.kind == "rz":
            lines.append(f"rz({_fmt_angle(g.angle)}) {qs};")
        else:
            lines.append(f"{g.kind} {qs};")
    return "\n".join(lines) + "\n"
