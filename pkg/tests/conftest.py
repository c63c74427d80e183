import pytest

ACCEPTANCE = pytest.StashKey[dict]()
CRITERIA = range(1, 9)


def pytest_addoption(parser):
    parser.addoption("--slow", action="store_true", default=False, help="run order-6 identity checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--slow"):
        return
    skip = pytest.mark.skip(reason="needs --slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def criterion(request):
    """Record one acceptance outcome; the terminal summary lists them all."""
    log = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(key, passed, detail):
        log[key] = (bool(passed), detail)
        print(f"criterion {key}: {'PASS' if passed else 'FAIL'} ({detail})")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(ACCEPTANCE, None)
    if not log:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    keys = sorted(log, key=lambda k: (int(str(k).split()[0]), str(k)))
    for k in keys:
        passed, detail = log[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if passed else 'FAIL'} ({detail})")
    missing = [k for k in CRITERIA if not any(int(str(x).split()[0]) == k for x in log)]
    for k in missing:
        terminalreporter.write_line(f"criterion {k}: NOT RUN")
