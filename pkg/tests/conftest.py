import pytest

ACCEPTANCE = pytest.StashKey[dict]()
CRITERIA = 12


@pytest.fixture
def acceptance(request):
    """Record one acceptance criterion's outcome for the end-of-run summary."""
    results = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(number, title, passed, detail=""):
        results[number] = (title, bool(passed), detail)
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {title}: {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE, None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in range(1, CRITERIA + 1):
        if number in results:
            title, passed, detail = results[number]
            status = "PASS" if passed else "FAIL"
        else:
            title, status, detail = "(not recorded)", "FAIL", "test errored or was deselected"
        terminalreporter.write_line(f"[{status}] criterion {number:2d} {title}: {detail}")
