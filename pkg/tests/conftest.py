import numpy as np
import pytest
from hypothesis import settings

from trellis_prune.trellis import build_trellis, compute_edge_metrics
from trellis_prune.waveform import Constellation, build_constellation, build_pulse

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")

_CRITERIA = []


@pytest.fixture(scope="session")
def criteria_log():
    return _CRITERIA


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def qpsk():
    return build_constellation("QPSK")


@pytest.fixture(scope="session")
def qam16():
    return build_constellation("QAM16")


@pytest.fixture(scope="session")
def bpsk():
    return Constellation("BPSK", np.array([1.0, -1.0]))


@pytest.fixture(scope="session")
def qpsk_d3(qpsk):
    return build_trellis(qpsk, build_pulse(0.35, 3, 16))


@pytest.fixture(scope="session")
def qpsk_d3_metrics(qpsk_d3):
    return compute_edge_metrics(qpsk_d3)


@pytest.fixture(scope="session")
def qpsk_d2(qpsk):
    return build_trellis(qpsk, build_pulse(0.35, 2, 8))


@pytest.fixture(scope="session")
def toy(bpsk):
    """M=2, D=1: two states, four edges."""
    return build_trellis(bpsk, build_pulse(0.5, 1, 4))
