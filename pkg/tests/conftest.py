import json
from pathlib import Path

import mpmath as mp
import pytest

from blaschke_threshold import _accel

FROZEN = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())


@pytest.fixture(scope="session")
def oracle():
    """Reference values computed by tests/oracles/make_oracles.py."""

    def get(key):
        v = FROZEN[key]
        if isinstance(v, str):
            return float(mp.mpf(v))
        if isinstance(v, list) and v and isinstance(v[0], str):
            return [float(mp.mpf(x)) for x in v]
        return v

    return get


@pytest.fixture(params=["numba", "numpy"] if _accel.HAVE_NUMBA else ["numpy"])
def backend(request):
    old = _accel.backend()
    _accel.set_backend(request.param)
    yield request.param
    _accel.set_backend(old)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
