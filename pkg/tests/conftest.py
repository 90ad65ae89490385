import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: dict[int, tuple[str, bool, str]] = {}


class Criterion:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        reason = str(exc).splitlines()[0] if exc is not None and str(exc) else ""
        detail = self.detail if ok else f"{self.detail} {exc_type.__name__}: {reason}".strip()
        _CRITERIA[self.number] = (self.title, ok, detail)
        line = f"criterion {self.number:2d} {'PASS' if ok else 'FAIL'}  {self.title}  {detail}"
        print(line)
        return False


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}  {detail}")
