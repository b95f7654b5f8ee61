import sys
import warnings

import pytest

from m2i.media import angular, table1_stack

F0 = 10e6
W0 = angular(F0)


@pytest.fixture(autouse=True)
def _quiet_fill_warning():
    # designs with a/r1 > 0.6 are legal; the warning is covered in test_fieldsolver
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="a/r1")
        yield


@pytest.fixture
def soil_no_loss():
    return table1_stack("no")


@pytest.fixture
def w0():
    return W0


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance.summary_lines():
        terminalreporter.write_line(line)
