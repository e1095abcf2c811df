import pytest

_RESULTS = {}


class AcceptanceLog:
    def record(self, number, title, passed, detail):
        _RESULTS[number] = (title, bool(passed), detail)
        return passed


@pytest.fixture(scope="session")
def acceptance_log():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_RESULTS):
        title, ok, detail = _RESULTS[n]
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} | {detail}")
    passed = sum(ok for _, ok, _ in _RESULTS.values())
    tr.write_line(f"{passed}/{len(_RESULTS)} acceptance criteria passed")
