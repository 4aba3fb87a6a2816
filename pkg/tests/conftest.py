import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qhdef import liegroup as lg

settings.register_profile(
    "qhdef",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("qhdef")

GROUPS = ("su2", "so3", "t2", "sl2r")
COMPACT = ("su2", "so3", "t2")
NONABELIAN = ("su2", "so3", "sl2r")

# acceptance criterion lines, filled by test_acceptance and echoed at the end
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(params=GROUPS)
def model(request):
    return lg.get_model(request.param)


@pytest.fixture(params=COMPACT)
def compact_model(request):
    return lg.get_model(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
