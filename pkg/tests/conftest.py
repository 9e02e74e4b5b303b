import pytest

_CRITERION_LINES = []


class CriterionRecorder:
    """Collects one pass/fail line per acceptance criterion.

    Lines print immediately (outside capture) and again in the terminal
    summary so they are visible in any pytest invocation.
    """

    def __init__(self, capfd):
        self._capfd = capfd

    def record(self, number: int, description: str, ok: bool) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {description}"
        _CRITERION_LINES.append(line)
        with self._capfd.disabled():
            print(line, flush=True)
        assert ok, line


@pytest.fixture
def criterion(capfd):
    return CriterionRecorder(capfd)


def pytest_terminal_summary(terminalreporter):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERION_LINES:
            terminalreporter.write_line(line)
