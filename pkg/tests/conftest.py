import pytest

CRITERIA = range(1, 12)
RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[RESULTS] = {}


@pytest.fixture
def record(request):
    """Store one acceptance verdict; it is also printed in the terminal summary."""
    store = request.config.stash[RESULTS]

    def rec(num: int, ok: bool, detail: str) -> bool:
        store[num] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}")
        return bool(ok)

    return rec


def pytest_terminal_summary(terminalreporter, config):
    store = config.stash[RESULTS]
    if not store:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in CRITERIA:
        ok, detail = store.get(num, (False, "not run"))
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}")
