import numpy as np
import pytest

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_report():
    def record(number: int, ok: bool, detail: str) -> None:
        line = f"AC{number:02d} {'PASS' if ok else 'FAIL'}: {detail}"
        _ACCEPTANCE[number] = line
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
