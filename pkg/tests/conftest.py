import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from _report import LINES  # noqa: E402
from svhedge import _jit  # noqa: E402
from svhedge.models import make_model  # noqa: E402

@pytest.fixture
def hw_model():
    return make_model("hull_white", sigma_min=2.0, a=-2.0, b=1.0, y0=2.0, corr=0.05)


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    if request.param == "numba" and not _jit.HAVE_NUMBA:
        pytest.skip("numba not installed")
    old = _jit.backend()
    _jit.set_backend(request.param)
    yield request.param
    _jit.set_backend(old)


def pytest_terminal_summary(terminalreporter):
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
