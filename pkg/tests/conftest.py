import numpy as np
import pytest

from cssvnn import icnn
from cssvnn.models import EnergyModel


def fd_grad(fun, x, h=1e-6):
    """Central finite differences of a scalar function over any array shape."""
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for k in np.ndindex(x.shape):
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        g[k] = (fun(xp) - fun(xm)) / (2 * h)
    return g


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


class RawEntriesModel(EnergyModel):
    """Deliberately broken: feeds the nine raw entries of F to the network."""

    kind = "raw"
    n_in = 9

    def features(self, f):
        d = np.eye(9).reshape(9, 3, 3)
        return np.asarray(f, dtype=np.float64).reshape(1, 9), d[None]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def raw_model():
    return RawEntriesModel(icnn.init(icnn.IcnnArch((9, 6, 4, 1)), 3))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
