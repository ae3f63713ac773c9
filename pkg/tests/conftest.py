import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def cgauss(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng, r):
    q, rr = np.linalg.qr(cgauss(rng, (r, r)))
    return q * (np.diag(rr) / np.abs(np.diag(rr)))[None, :]


def diagonalizable(rng, r, cond_bound=20.0):
    """``S diag(d) S^-1`` with distinct eigenvalues of modulus in [0.5, 2]."""
    d = rng.uniform(0.5, 2.0, r) * np.exp(2j * np.pi * rng.uniform(size=r))
    z = cgauss(rng, (r, r))
    eps = 1.0
    s = np.eye(r) + eps * z
    while np.linalg.cond(s) > cond_bound:
        eps /= 2
        s = np.eye(r) + eps * z
    return s @ np.diag(d) @ np.linalg.inv(s), d


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
