import pytest

ACCEPTANCE_LOG = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LOG] = []


@pytest.fixture
def acceptance(request):
    """record(number, title, passed, detail): one summary line per acceptance criterion."""
    log = request.config.stash[ACCEPTANCE_LOG]

    def record(number: int, title: str, passed: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}  [{detail}]"
        log.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LOG, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
