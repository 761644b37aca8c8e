import numpy as np
import pytest

from solitonscope import gallery
from solitonscope.sampling import grid

IMMERSIONS = [e.id for e in gallery.ENTRIES if e.kind == "immersion"]
INTRINSIC = [e.id for e in gallery.ENTRIES if e.kind == "intrinsic"]

ACCEPTANCE_LINES = {}


def grid_100(cfg):
    """10 x 10 regular grid (or the config's own grid for dimension != 2)."""
    if cfg.dimension != 2:
        return cfg.points()
    return grid([(d["min"], d["max"], 10) for d in cfg.domain])


def random_rotation(seed, n=3):
    q, r = np.linalg.qr(np.random.default_rng(seed).normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def record():
    def _record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return _record
