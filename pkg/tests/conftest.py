import numpy as np
import pytest

from nilmrec.core import make_context


@pytest.fixture
def ctx2k():
    return make_context(2000, 50, 0.5)


def sine(ctx, amp=1.0, order=1, phase=0.0):
    t = np.arange(ctx.samples_per_segment) / ctx.f_s
    return amp * np.sin(2 * np.pi * order * ctx.f_0 * t + phase)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
