from __future__ import annotations

import pytest

from hgplift import basegen, hgp
from hgplift.lift import build_lifted_matrices, code_from_shift_tables, packaged_b15_p64

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    """Log one acceptance line, then assert it."""
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line, flush=True)
    assert ok, line


@pytest.fixture
def acceptance_record():
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def b7():
    return basegen.named_base("b7")


@pytest.fixture(scope="session")
def b15():
    return basegen.named_base("b15t")


@pytest.fixture(scope="session")
def code_b7(b7):
    return hgp.build_hgp(b7)


@pytest.fixture(scope="session")
def code_b15(b15):
    return hgp.build_hgp(b15)


@pytest.fixture(scope="session")
def supplementary():
    """Packaged B15 shift tables at P=64 and the lifted code they define."""
    a = packaged_b15_p64()
    base = code_from_shift_tables(a)
    return a, base, build_lifted_matrices(base, a)
