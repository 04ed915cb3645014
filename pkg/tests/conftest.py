import pytest

_CRITERIA: dict[int, tuple[str, bool]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; call with (number, title, passed)."""

    def record(number: int, title: str, passed: bool, detail: str = ""):
        line = f"CRITERION {number:2d} {'PASS' if passed else 'FAIL'}: {title}"
        if detail:
            line += f" [{detail}]"
        print(line)
        _CRITERIA[number] = (line, passed)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number][0])
