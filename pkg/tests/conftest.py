import pytest

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(number, title, passed, detail)."""

    def record(number, title, passed, detail=""):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        _CRITERIA.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA, key=lambda x: x[0]):
        terminalreporter.write_line(line)
