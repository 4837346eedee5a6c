import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile("default")

# label -> [title, all passed so far]
_CRITERIA: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    label, title = marker.args
    entry = _CRITERIA.setdefault(label, [title, True])
    # an expected failure still counts as a failed criterion
    if rep.when == "call" or rep.outcome != "passed":
        entry[1] = entry[1] and rep.outcome == "passed"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, (title, ok) in sorted(_CRITERIA.items(), key=lambda kv: _sort_key(kv[0])):
        terminalreporter.write_line(f"criterion {label:<5} {'PASS' if ok else 'FAIL'}  {title}")


def _sort_key(label: str):
    digits = "".join(c for c in label if c.isdigit())
    return int(digits), label
