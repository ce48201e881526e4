from __future__ import annotations

import pytest

from expsums.polynomial import parse_polynomial


def poly(text: str, names: str = "x,y"):
    return parse_polynomial(text, names.split(","))


@pytest.fixture
def P():
    return poly


ACCEPTANCE_LINES: list[str] = []


def report(k: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {k:2d} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
