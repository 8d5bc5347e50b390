import numpy as np
import pytest

from phrealize import (StateSpaceSystem, Tolerances, eval_transfer,
                       paper_example5, to_semiexplicit, to_statespace)
from phrealize.minreal import minimal_realization


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        print(f"\n[acceptance] {name}: {status}", flush=True)


@pytest.fixture(scope="session")
def tol():
    return Tolerances()


@pytest.fixture(scope="session")
def example5():
    return paper_example5()


@pytest.fixture(scope="session")
def example5_minimal(example5, tol):
    """Order-4 minimal standard realization of the worked example."""
    semi = to_semiexplicit(example5, tol)
    ss, _ = to_statespace(semi, tol)
    return minimal_realization(ss, tol)


@pytest.fixture(scope="session")
def scalar_passive():
    """(A, B, C, D) = (-1, 1, 1, 1): closed-form certificate 3 - 2 sqrt(2)."""
    return StateSpaceSystem([[-1.0]], [[1.0]], [[1.0]], [[1.0]])


def sample_points(seed, count=20, radius=3.0):
    """Random complex evaluation points away from the typical spectra."""
    rng = np.random.default_rng(seed)
    pts = radius * (rng.standard_normal(count) + 1j * rng.standard_normal(count))
    return pts + 0.5j  # nudge off the real axis


def transfer_gap(sys1, sys2, points):
    """Max relative transfer deviation over the given complex points."""
    gap = 0.0
    for s in points:
        G1 = eval_transfer(sys1, s)
        G2 = eval_transfer(sys2, s)
        scale = max(1.0, np.linalg.norm(G1, 2))
        gap = max(gap, np.linalg.norm(G1 - G2, 2) / scale)
    return gap
