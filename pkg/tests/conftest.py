import pathlib
import sys

import numpy as np
import pytest

HERE = pathlib.Path(__file__).parent
sys.path.insert(0, str(HERE))

GOLDEN = HERE / "golden"


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_rotation(rng, dim):
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_admissible_triple(rng):
    from g2loops import cayley

    i = rng.standard_normal(7)
    i /= np.linalg.norm(i)
    j = rng.standard_normal(7)
    j -= (j @ i) * i
    j /= np.linalg.norm(j)
    k = cayley.cross(i, j)
    l = rng.standard_normal(7)
    for v in (i, j, k):
        l -= (l @ v) * v
    l /= np.linalg.norm(l)
    return i, j, l


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
