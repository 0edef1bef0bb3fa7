import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> (outcome, detail)
ACCEPTANCE: dict[int, list] = {}


@pytest.fixture
def ac_detail(request):
    """Lets an acceptance test attach a one-line measurement to its report line."""
    num = int(request.node.name.split("_")[1][2:])
    entry = ACCEPTANCE.setdefault(num, ["not run", ""])

    def note(text: str) -> None:
        entry[1] = text

    return note


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid or report.when != "call":
        return
    name = report.nodeid.split("::")[-1]
    num = int(name.split("_")[1][2:])
    ACCEPTANCE.setdefault(num, ["not run", ""])[0] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        outcome, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"AC-{num:<2} {outcome}  {detail}")
