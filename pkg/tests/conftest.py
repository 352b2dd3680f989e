import pytest

ACCEPTANCE = []


@pytest.fixture
def accept(request):
    """Record one acceptance line: accept(number, ok, detail)."""

    def record(number, ok, detail):
        ACCEPTANCE.append((number, request.node.name, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name} ({detail})")
