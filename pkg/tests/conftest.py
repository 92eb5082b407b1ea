import numpy as np
import pytest
from scipy.linalg import expm

from coltherm import CovarianceMatrix, StateWithGradient, symplectic_form


def random_symplectic(rng, modes: int, scale: float = 0.5) -> np.ndarray:
    """Random symplectic via a random quadratic generator."""
    k = rng.standard_normal((2 * modes, 2 * modes))
    k = 0.5 * (k + k.T) * scale
    return expm(symplectic_form(modes) @ k)


def random_mixed_state(rng, modes: int, nu_lo: float = 0.55, nu_hi: float = 2.5) -> CovarianceMatrix:
    """Random physical covariance matrix with spectrum away from purity."""
    nu = rng.uniform(nu_lo, nu_hi, size=modes)
    w = np.diag(np.repeat(nu, 2))
    s = random_symplectic(rng, modes)
    return CovarianceMatrix(modes, s @ w @ s.T)


def random_gradient(rng, modes: int) -> np.ndarray:
    g = rng.standard_normal((2 * modes, 2 * modes))
    return 0.5 * (g + g.T)


def random_state_with_gradient(rng, modes: int) -> StateWithGradient:
    return StateWithGradient(random_mixed_state(rng, modes), random_gradient(rng, modes))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
