import os
import shutil
import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
FAKE_SPICE = TESTS / "fake_spice.py"

# make_golden and fake_spice live next to the tests
sys.path.insert(0, str(TESTS))


def real_simulator() -> str | None:
    exe = os.environ.get("SRAMYIELD_SPICE")
    if exe and Path(exe).resolve() != FAKE_SPICE.resolve():
        return exe
    for name in ("ngspice", "Xyce"):
        found = shutil.which(name)
        if found:
            return found
    return None


@pytest.fixture
def fake_spice(tmp_path):
    """Paths to the fake simulator under ngspice and Xyce names."""
    out = {}
    for name in ("ngspice", "Xyce"):
        link = tmp_path / "bin" / name
        link.parent.mkdir(exist_ok=True)
        link.symlink_to(FAKE_SPICE.resolve())
        out[name] = str(link)
    return out


@pytest.fixture
def fixed_epoch(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
