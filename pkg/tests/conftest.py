import numpy as np
import pytest

SQUARE = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
L_SHAPE = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]]
TRIANGLE = [[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]]


def star_points(n=400, amp=0.3, k=5):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    r = 1 + amp * np.cos(k * t)
    return np.c_[r * np.cos(t), r * np.sin(t)]


# acceptance results collected by tests/test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])


@pytest.fixture(scope="session")
def square_curve():
    from npspectra import make_polygon
    return make_polygon(SQUARE)[0]
