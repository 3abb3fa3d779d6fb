import pytest

_RESULTS = {}


@pytest.fixture
def acceptance():
    """``acceptance(k, passed, detail)`` records one acceptance line."""
    def record(k, passed, detail):
        _RESULTS[k] = (bool(passed), detail)
        print(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_RESULTS):
        passed, detail = _RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
