import sys
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from chiptrap.heff import SolverConfig  # noqa: E402
from chiptrap.resonance import solve_point  # noqa: E402


@lru_cache(maxsize=None)
def classified(rho_sq, m=0, method="dense", **kw):
    """Cached two-angle solve on the default R = 30, dr = 0.05 grid."""
    return solve_point(SolverConfig.for_radius(rho_sq, m=m, **kw), method=method)


@pytest.fixture(scope="session")
def solved():
    return classified


@pytest.fixture
def report(capsys):
    """Print a verdict line straight to the terminal, bypassing capture."""

    def emit(line):
        with capsys.disabled():
            print(f"\n{line}", flush=True)

    return emit
