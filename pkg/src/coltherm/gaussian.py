"""Core types and operations for zero-mean Gaussian states.

Conventions used throughout the package:

* quadrature ordering ``(x_1, p_1, x_2, p_2, ...)``,
* ``hbar = k_B = 1``, vacuum variance ``1/2``,
* the symplectic form is ``Omega = diag([[0, 1], [-1, 0]], ...)``.

A state is represented by its real symmetric ``2N x 2N`` covariance matrix;
first moments are zero everywhere in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EPS_PHYS",
    "BoseOccupation",
    "CovarianceMatrix",
    "InvalidStateError",
    "ValidityReport",
    "apply_symplectic",
    "direct_sum",
    "partial_trace",
    "squeezed_vacuum",
    "symplectic_eigenvalues",
    "symplectic_form",
    "symplectic_residual",
    "thermal_state",
    "vacuum_state",
    "validate",
    "xp_swap_indices",
]

#: Default physicality tolerance.  Long collision chains accumulate roundoff,
#: so this is deliberately looser than machine epsilon.
EPS_PHYS = 1e-9


class InvalidStateError(ValueError):
    """Raised when a covariance matrix violates the uncertainty relation."""


def symplectic_form(modes: int) -> np.ndarray:
    """Return the ``2N x 2N`` symplectic form for ``modes`` modes."""
    if modes < 1:
        raise ValueError(f"modes must be >= 1, got {modes}")
    omega = np.zeros((2 * modes, 2 * modes))
    for i in range(modes):
        omega[2 * i, 2 * i + 1] = 1.0
        omega[2 * i + 1, 2 * i] = -1.0
    return omega


def xp_swap_indices(modes: int) -> np.ndarray:
    """Index permutation swapping x and p within every mode.

    ``Omega[i, j]`` is non-zero only for ``j = xp_swap_indices(N)[i]``, which
    is what makes the normal-form superoperator decouple into 2x2 blocks.
    """
    return np.arange(2 * modes).reshape(modes, 2)[:, ::-1].reshape(-1)


@dataclass(frozen=True)
class BoseOccupation:
    """Bath occupation ``n = 1/(exp(freq/T) - 1)`` and its T-derivative.

    The mode frequency is kept explicit so temperature always enters in the
    dimensionless combination ``T / mode_frequency``.
    """

    temperature: float
    mode_frequency: float
    value: float
    derivative: float

    @classmethod
    def from_temperature(cls, temperature: float, mode_frequency: float) -> "BoseOccupation":
        if not (temperature > 0.0 and math.isfinite(temperature)):
            raise ValueError(f"temperature must be positive and finite, got {temperature}")
        if not (mode_frequency > 0.0 and math.isfinite(mode_frequency)):
            raise ValueError(f"mode_frequency must be positive and finite, got {mode_frequency}")
        value = 1.0 / math.expm1(mode_frequency / temperature)
        derivative = (mode_frequency / temperature**2) * value * (value + 1.0)
        return cls(temperature, mode_frequency, value, derivative)

    @classmethod
    def from_value(cls, n_bar: float) -> "BoseOccupation":
        """Occupation fixed by hand (no temperature dependence)."""
        if not (n_bar >= 0.0 and math.isfinite(n_bar)):
            raise ValueError(f"n_bar must be non-negative and finite, got {n_bar}")
        return cls(math.nan, math.nan, n_bar, 0.0)


@dataclass(frozen=True)
class CovarianceMatrix:
    """Real symmetric second-moment matrix of a zero-mean Gaussian state."""

    modes: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        n = 2 * self.modes
        if self.modes < 1:
            raise ValueError(f"modes must be >= 1, got {self.modes}")
        if data.shape != (n, n):
            raise ValueError(f"expected shape {(n, n)}, got {data.shape}")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, data: np.ndarray) -> "CovarianceMatrix":
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] % 2:
            raise ValueError(f"not a 2N x 2N matrix: shape {data.shape}")
        return cls(data.shape[0] // 2, data)

    def __array__(self, dtype=None):
        return np.asarray(self.data, dtype=dtype)


def vacuum_state(modes: int) -> CovarianceMatrix:
    """Vacuum covariance ``(1/2) I`` on ``modes`` modes."""
    if modes < 1:
        raise ValueError(f"modes must be >= 1, got {modes}")
    return CovarianceMatrix(modes, 0.5 * np.eye(2 * modes))


def thermal_state(occupation: BoseOccupation | float) -> CovarianceMatrix:
    """Single-mode thermal covariance ``(n + 1/2) I``."""
    n_bar = occupation.value if isinstance(occupation, BoseOccupation) else float(occupation)
    if not (n_bar >= 0.0 and math.isfinite(n_bar)):
        raise ValueError(f"occupation must be non-negative and finite, got {n_bar}")
    return CovarianceMatrix(1, (n_bar + 0.5) * np.eye(2))


def squeezed_vacuum(r: float, phi: float = 0.0) -> CovarianceMatrix:
    """Single-mode squeezed vacuum.

    cov = cosh(2r)/2 * I - sinh(2r)/2 * [[cos phi, sin phi],
                                         [sin phi, -cos phi]]

    At ``phi = 0`` this is ``diag(exp(-2r)/2, exp(2r)/2)``: positive ``r``
    squeezes the x quadrature.  The determinant is ``1/4`` for every ``r``
    (the state is pure).
    """
    if not math.isfinite(r):
        raise ValueError(f"squeezing magnitude must be finite, got {r}")
    ch, sh = 0.5 * math.cosh(2.0 * r), 0.5 * math.sinh(2.0 * r)
    c, s = math.cos(phi), math.sin(phi)
    data = np.array([[ch - sh * c, -sh * s], [-sh * s, ch + sh * c]])
    return CovarianceMatrix(1, data)


def direct_sum(*cms: CovarianceMatrix) -> CovarianceMatrix:
    """Covariance matrix of the product state (block-diagonal stacking)."""
    if not cms:
        raise ValueError("direct_sum needs at least one covariance matrix")
    modes = sum(cm.modes for cm in cms)
    out = np.zeros((2 * modes, 2 * modes))
    offset = 0
    for cm in cms:
        d = 2 * cm.modes
        out[offset : offset + d, offset : offset + d] = cm.data
        offset += d
    return CovarianceMatrix(modes, out)


def _mode_rows(modes: "list[int] | tuple[int, ...] | np.ndarray") -> np.ndarray:
    """Row/column indices covered by the given modes, in the given order."""
    modes = np.asarray(modes, dtype=int)
    return np.stack([2 * modes, 2 * modes + 1], axis=1).reshape(-1)


def partial_trace(cm: CovarianceMatrix, keep) -> CovarianceMatrix:
    """Reduced state on the modes in ``keep`` (order preserved).

    For Gaussian states the partial trace is the principal submatrix on the
    kept quadratures.
    """
    keep = list(keep)
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate mode indices in {keep}")
    if not keep:
        raise ValueError("must keep at least one mode")
    for m in keep:
        if not 0 <= m < cm.modes:
            raise ValueError(f"mode index {m} out of range for {cm.modes} modes")
    rows = _mode_rows(keep)
    return CovarianceMatrix(len(keep), cm.data[np.ix_(rows, rows)].copy())


def apply_symplectic(cm: CovarianceMatrix, s: np.ndarray, modes=None) -> CovarianceMatrix:
    """Conjugate the state by a symplectic matrix: ``cov -> S cov S^T``.

    ``s`` acts on the listed ``modes`` (all modes when omitted); the embedding
    is the identity elsewhere.
    """
    s = np.asarray(s, dtype=float)
    if modes is None:
        modes = range(cm.modes)
    modes = list(modes)
    d = 2 * len(modes)
    if s.shape != (d, d):
        raise ValueError(f"symplectic shape {s.shape} does not match {len(modes)} target modes")
    if len(set(modes)) != len(modes) or not all(0 <= m < cm.modes for m in modes):
        raise ValueError(f"invalid target modes {modes} for {cm.modes}-mode state")
    rows = _mode_rows(modes)
    out = cm.data.copy()
    out[rows, :] = s @ out[rows, :]
    out[:, rows] = out[:, rows] @ s.T
    return CovarianceMatrix(cm.modes, out)


def symplectic_residual(s: np.ndarray) -> float:
    """Max-norm deviation of ``S Omega S^T`` from ``Omega``."""
    s = np.asarray(s, dtype=float)
    omega = symplectic_form(s.shape[0] // 2)
    return float(np.abs(s @ omega @ s.T - omega).max())


def symplectic_eigenvalues(cm: CovarianceMatrix) -> np.ndarray:
    """Symplectic spectrum: moduli of the eigenvalues of ``i Omega cov``.

    Returned sorted in descending order, one entry per mode.  Physical states
    have every entry ``>= 1/2``.
    """
    omega = symplectic_form(cm.modes)
    eigs = np.linalg.eigvals(1j * omega @ cm.data)
    nu = np.sort(np.abs(eigs))[::-1]
    return nu[::2].copy()


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of a physicality check; see :func:`validate`."""

    symmetry_residual: float
    min_uncertainty_eigenvalue: float
    eps: float

    @property
    def passed(self) -> bool:
        return self.symmetry_residual <= self.eps and self.min_uncertainty_eigenvalue >= -self.eps

    def __bool__(self) -> bool:
        return self.passed


def validate(cm: CovarianceMatrix, eps: float = EPS_PHYS) -> ValidityReport:
    """Check symmetry and the bona-fide uncertainty relation.

    The state is physical when ``cov + (i/2) Omega >= 0``; the report carries
    the smallest eigenvalue of that Hermitian matrix together with the
    symmetry residual.
    """
    sym = float(np.abs(cm.data - cm.data.T).max())
    omega = symplectic_form(cm.modes)
    herm = cm.data + 0.5j * omega
    min_eig = float(np.linalg.eigvalsh(herm)[0])
    return ValidityReport(sym, min_eig, eps)
