import numpy as np
import pytest


def random_spd(rng: np.random.Generator, d: int, cond: float = 20.0) -> np.ndarray:
    """Random SPD matrix with log-spaced eigenvalues (condition about ``cond``)."""
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    lo = 1.0 / np.sqrt(cond)
    eig = np.geomspace(lo, lo * cond, d)
    rng.shuffle(eig)
    return (q * eig) @ q.T


def random_symmetric(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.standard_normal((d, d))
    return 0.5 * (a + a.T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
