import pytest

_REPORT = []


@pytest.fixture
def report():
    """Record one acceptance line; printed immediately and again in the summary."""
    def record(number, ok, seconds, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({seconds:.2f} s) {detail}"
        print(line)
        _REPORT.append(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_REPORT, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
