import pytest

RESULTS = {}


def record(key, passed, detail):
    RESULTS[key] = (bool(passed), detail)
    line = f"{'PASS' if passed else 'FAIL'} criterion {key}: {detail}"
    print(line, flush=True)
    return line


@pytest.fixture
def criterion():
    return record


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: [int(p) if p.isdigit() else p for p in k.replace(".", " ").split()]):
        passed, detail = RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {key}: {detail}")
