import pytest
from hypothesis import HealthCheck, settings

from tropmaps.relmaps import RamificationData
from tropmaps.trees import parse_splits, tree_from_splits

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ALPHA = "1,4;1,3,4;5,6"
NEIGHBOUR = "3,4;1,3,4;5,6"
X6 = (-4, -4, 5, 1, 1, 1)

_acceptance: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for n in getattr(report, "acceptance_ids", ()):
        _acceptance.setdefault(n, []).append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.acceptance_ids = tuple(m.args[0] for m in item.iter_markers("acceptance"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        ok = all(o == "passed" for o in _acceptance[n])
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}")


def tree(text: str, n: int = 6):
    return tree_from_splits(parse_splits(text, n), n)


@pytest.fixture
def x6():
    return RamificationData(X6)


@pytest.fixture
def alpha():
    return tree(ALPHA)


@pytest.fixture
def neighbour():
    return tree(NEIGHBOUR)
