import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synth import write_cluster  # noqa: E402

ACCEPTANCE_RESULTS: dict[str, str] = {}


@pytest.fixture(scope="session")
def planted(tmp_path_factory):
    return write_cluster(tmp_path_factory.mktemp("planted"), seed=1)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = "test_acceptance.py::TestAcceptance::test_criterion_"
    if marker in report.nodeid:
        num = report.nodeid.split(marker)[1].split("_")[0]
        ACCEPTANCE_RESULTS[num] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS, key=int):
        terminalreporter.write_line(f"criterion {int(num):2d}: {ACCEPTANCE_RESULTS[num]}")
