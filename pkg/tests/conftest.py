import pytest

_RESULTS: list[str] = []


@pytest.fixture
def report_line():
    """Record a one-line verdict that is echoed in the terminal summary."""

    def record(label: str, ok: bool, detail: str) -> None:
        _RESULTS.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0].split()[0])):
            terminalreporter.write_line(line)
