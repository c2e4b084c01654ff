import numpy as np
import pytest

from smoothsign import eigenpairs, hp_two_sided, wn_mse_nowcast

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_RESULTS


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: (r[0], r[1])):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {name} -- {detail}")


@pytest.fixture(scope="session")
def hp1600_window():
    """HP(1600) on a window as wide as the causal filter (L = 101)."""
    return hp_two_sided(1600, 50, tail_tol=None, delta=0, L=101)


@pytest.fixture(scope="session")
def hp1600_gamma(hp1600_window):
    return wn_mse_nowcast(hp1600_window)


@pytest.fixture(scope="session")
def bandlimited_target():
    """L = 10 target whose first three spectral weights vanish."""
    basis = eigenpairs(10)
    w = np.zeros(10)
    w[3:] = 1 / np.sqrt(7)
    return basis.eigenvectors @ w
