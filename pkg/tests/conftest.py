import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("selcover", deadline=None, max_examples=60)
settings.load_profile("selcover")

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if report.when in ("setup", "call"):
        ok = report.outcome == "passed"
        _, prev_ok, prev_secs = _ACCEPTANCE.get(number, (title, True, 0.0))
        _ACCEPTANCE[number] = (title, ok and prev_ok, prev_secs + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, secs = _ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({secs:.1f} s)"
        )


@pytest.fixture(scope="session")
def min_table_csv(tmp_path_factory):
    """The default 216-row min table, produced once through the CLI:
    (csv text, parsed rows, seconds taken)."""
    import csv
    import time

    from selcover.cli import main

    out = tmp_path_factory.mktemp("min") / "min.csv"
    start = time.perf_counter()
    assert main(["min", "--out", str(out)]) == 0
    elapsed = time.perf_counter() - start
    with open(out, newline="") as fh:
        return out.read_text(), list(csv.DictReader(fh)), elapsed
