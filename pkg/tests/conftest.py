import pathlib
import sys

import pytest

from subpixel_heatmaps import _jit

sys.path.insert(0, str(pathlib.Path(__file__).parent))


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    """Run a test against both kernel implementations."""
    if request.param == "numba" and not _jit.HAVE_NUMBA:
        pytest.skip("numba not installed")
    monkeypatch.setattr(_jit, "USE_NUMBA", request.param == "numba")
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, (ok, detail) in sorted(mod.RESULTS.items()):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
