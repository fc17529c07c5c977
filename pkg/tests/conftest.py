import pytest

_CRITERIA = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_CRITERIA] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; returns the pass flag for asserting."""
    lines = request.config.stash[_CRITERIA]

    def report(label: str, ok: bool | None, detail: str) -> bool | None:
        # ok=None records an informational line without a verdict
        verdict = "INFO" if ok is None else ("PASS" if ok else "FAIL")
        line = f"{label}: {verdict}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
