import pytest

_ACCEPTANCE = []


class AcceptanceLog:
    """Collects one pass/fail line per acceptance criterion."""

    def record(self, cid, title, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {cid}: {title} -- {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
