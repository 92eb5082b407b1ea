"""Temperature quantum Fisher information of Gaussian states.

Three interchangeable evaluation routes for
``F = (1/2) <vec(d sigma)| D(sigma)^{-1} |vec(d sigma)>`` with the
superoperator ``D(C): V -> C V C - (1/4) Omega V Omega^T``:

* ``dense_inverse``  - materialize ``D(sigma)`` and pseudo-invert it,
* ``dense_solve``    - materialize ``D(sigma)`` and solve the linear system,
* ``williamson_fast``- decompose ``sigma = S W S^T`` first; in the normal
  basis ``D(W)`` splits into 2x2 blocks, so the solve costs O(N^2) after the
  decomposition instead of the dense routes' O(N^6).

The ``-1/4`` weight of the symplectic term is pinned by a physical
calibration: the single-mode thermal state must give
``F = (dn/dT)^2 / (n (n+1))``, equivalently denominator ``nu^2 - 1/4``.
A truncated-Fock-space computation (in the test suite) independently
confirms the convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .collision import StateWithGradient
from .gaussian import EPS_PHYS, CovarianceMatrix, InvalidStateError, symplectic_form

__all__ = [
    "KAPPA",
    "QFI_METHODS",
    "SV_CUTOFF",
    "QfiDiagnostics",
    "WilliamsonDecomposition",
    "compute_qfi",
    "d_superoperator",
    "qfi_dense_inverse",
    "qfi_dense_solve",
    "qfi_fast",
    "qfi_from_decomposition",
    "transform_gradient",
    "unvec",
    "vec",
    "williamson",
]

#: Calibrated weight of the symplectic term in ``D``.
KAPPA = -0.25

#: Relative singular-value / block-determinant cutoff for pure-mode
#: regularization.
SV_CUTOFF = 1e-12

QFI_METHODS = ("dense_inverse", "dense_solve", "williamson_fast")


def vec(matrix: np.ndarray) -> np.ndarray:
    """Row-stacked vectorization; ``(A (x) A) vec(V) = vec(A V A^T)``."""
    return np.asarray(matrix).reshape(-1)


def unvec(vector: np.ndarray) -> np.ndarray:
    vector = np.asarray(vector)
    m = int(round(np.sqrt(vector.size)))
    if m * m != vector.size:
        raise ValueError(f"length {vector.size} is not a square")
    return vector.reshape(m, m)


def d_superoperator(base: np.ndarray, kappa: float = KAPPA) -> np.ndarray:
    """Dense ``(2N)^2 x (2N)^2`` matrix of ``V -> base V base + kappa Omega V Omega^T``."""
    base = np.asarray(base, dtype=float)
    omega = symplectic_form(base.shape[0] // 2)
    return np.kron(base, base) + kappa * np.kron(omega, omega)


@dataclass(frozen=True)
class QfiDiagnostics:
    """Regularization record of one QFI evaluation."""

    regularized_blocks: int
    cutoff: float


@dataclass(frozen=True)
class WilliamsonDecomposition:
    """``sigma = S W S^T`` with ``W = diag(nu_1, nu_1, ..., nu_N, nu_N)``.

    ``nu`` holds the symplectic eigenvalues sorted in descending order, one
    per mode, each ``>= 1/2`` for physical states (``= 1/2`` iff pure).
    """

    s: np.ndarray
    nu: np.ndarray

    @property
    def modes(self) -> int:
        return self.nu.shape[0]

    @property
    def w(self) -> np.ndarray:
        """Diagonal of ``W`` (each symplectic eigenvalue duplicated)."""
        return np.repeat(self.nu, 2)


def _omega_left(a: np.ndarray) -> np.ndarray:
    """``Omega @ a`` via row permutation (rows 2i <- 2i+1, 2i+1 <- -2i)."""
    out = np.empty_like(a)
    out[0::2] = a[1::2]
    out[1::2] = -a[0::2]
    return out


def _omega_right(a: np.ndarray) -> np.ndarray:
    """``a @ Omega`` via column permutation (cols 2i <- -2i+1, 2i+1 <- 2i)."""
    out = np.empty_like(a)
    out[:, 0::2] = -a[:, 1::2]
    out[:, 1::2] = a[:, 0::2]
    return out


def williamson(cm: CovarianceMatrix, eps_phys: float = EPS_PHYS) -> WilliamsonDecomposition:
    """Williamson normal form of a physical covariance matrix.

    Route: Cholesky ``sigma = L L^T``, then the Hermitian matrix
    ``i L^T Omega L`` is diagonalized; its spectrum is ``+-nu_k`` and the
    real/imaginary parts of the positive-eigenvalue vectors assemble an
    orthogonal basis that brings ``L^T Omega L`` to canonical antisymmetric
    form.  ``S = L Q W^{-1/2}`` then satisfies both ``S W S^T = sigma`` and
    ``S Omega S^T = Omega``.  The +-pair separation keeps the construction
    well-conditioned even for (near-)degenerate symplectic spectra, which
    chains of barely-disturbed ancillae produce routinely.
    """
    sigma = cm.data
    n = cm.modes
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise InvalidStateError(
            "covariance matrix is not positive definite; not a physical Gaussian state"
        ) from None

    herm = 1j * (chol.T @ _omega_left(chol))
    eigvals, eigvecs = np.linalg.eigh(herm)
    nu = eigvals[-1 : -n - 1 : -1].copy()  # positive half, descending
    if nu[-1] < 0.5 - eps_phys:
        raise InvalidStateError(
            f"symplectic eigenvalue {nu[-1]:.6g} below 1/2; state violates the uncertainty relation"
        )

    u_pos = eigvecs[:, -1 : -n - 1 : -1]
    q = np.empty((2 * n, 2 * n))
    q[:, 0::2] = np.sqrt(2.0) * u_pos.imag
    q[:, 1::2] = np.sqrt(2.0) * u_pos.real
    s = chol @ (q / np.sqrt(np.repeat(nu, 2))[None, :])
    return WilliamsonDecomposition(s=s, nu=nu)


def transform_gradient(grad: np.ndarray, decomp: WilliamsonDecomposition) -> np.ndarray:
    """Carry the gradient into the normal basis: ``M grad M^T``, ``M = Omega S^T Omega``.

    ``M = -S^{-1}``, so conjugating both the state and the gradient this way
    turns ``D(sigma)`` into ``D(W)`` without inverting ``S`` explicitly.
    """
    grad = np.asarray(grad, dtype=float)
    m = _omega_right(_omega_left(decomp.s.T))
    return m @ grad @ m.T


def qfi_from_decomposition(
    decomp: WilliamsonDecomposition,
    grad: np.ndarray,
    sv_cutoff: float = SV_CUTOFF,
    return_diagnostics: bool = False,
    solver: "Callable | None" = None,
):
    """QFI from a precomputed normal form (transform + block solve + inner product)."""
    rhs = transform_gradient(grad, decomp)
    return _qfi_normal_solve(decomp.nu, rhs, sv_cutoff, return_diagnostics, solver)


def _qfi_normal_solve(nu, rhs, sv_cutoff, return_diagnostics=False, solver=None):
    """Solve ``D(W) L = rhs`` blockwise and return ``(1/2) <rhs|L>``."""
    if solver is None:
        solver = kernels.solve_normal_form
    scale = max(float(nu[0]) ** 2, 0.25)
    cutoff = sv_cutoff * scale
    sol, n_reg = solver(nu, rhs, cutoff)
    value = 0.5 * float(np.sum(rhs * sol))
    if return_diagnostics:
        return value, QfiDiagnostics(regularized_blocks=n_reg, cutoff=cutoff)
    return value


def qfi_fast(
    state: StateWithGradient,
    eps_phys: float = EPS_PHYS,
    sv_cutoff: float = SV_CUTOFF,
    return_diagnostics: bool = False,
):
    """Williamson-accelerated QFI; equals the dense routes within tolerance."""
    decomp = williamson(state.cm, eps_phys=eps_phys)
    return qfi_from_decomposition(
        decomp, state.grad, sv_cutoff=sv_cutoff, return_diagnostics=return_diagnostics
    )


def _dense_setup(state: StateWithGradient):
    d_mat = d_superoperator(state.cm.data)
    return d_mat, vec(state.grad)


def qfi_dense_inverse(
    state: StateWithGradient, sv_cutoff: float = SV_CUTOFF, return_diagnostics: bool = False
):
    """Reference route: pseudo-inverse of the dense superoperator."""
    d_mat, dvec = _dense_setup(state)
    inv = np.linalg.pinv(d_mat, rcond=sv_cutoff, hermitian=True)
    value = 0.5 * float(dvec @ inv @ dvec)
    if return_diagnostics:
        rank = np.linalg.matrix_rank(d_mat, tol=sv_cutoff * np.abs(d_mat).max(), hermitian=True)
        n_dropped = d_mat.shape[0] - int(rank)
        return value, QfiDiagnostics(regularized_blocks=n_dropped, cutoff=sv_cutoff)
    return value


def qfi_dense_solve(
    state: StateWithGradient, sv_cutoff: float = SV_CUTOFF, return_diagnostics: bool = False
):
    """Reference route: direct linear solve, pseudo-inverse fallback if singular."""
    d_mat, dvec = _dense_setup(state)
    used_fallback = False
    try:
        sol = np.linalg.solve(d_mat, dvec)
        residual = np.abs(d_mat @ sol - dvec).max()
        ok = np.isfinite(sol).all() and residual <= 1e-8 * max(
            np.abs(dvec).max(), np.abs(d_mat).max() * np.abs(sol).max(), 1e-300
        )
    except np.linalg.LinAlgError:
        ok = False
    if not ok:  # singular D: pure modes present
        used_fallback = True
        sol = np.linalg.lstsq(d_mat, dvec, rcond=sv_cutoff)[0]
    value = 0.5 * float(dvec @ sol)
    if return_diagnostics:
        return value, QfiDiagnostics(regularized_blocks=int(used_fallback), cutoff=sv_cutoff)
    return value


def compute_qfi(
    state: StateWithGradient,
    method: str = "williamson_fast",
    eps_phys: float = EPS_PHYS,
    sv_cutoff: float = SV_CUTOFF,
) -> float:
    if method == "williamson_fast":
        return qfi_fast(state, eps_phys=eps_phys, sv_cutoff=sv_cutoff)
    if method == "dense_solve":
        return qfi_dense_solve(state, sv_cutoff=sv_cutoff)
    if method == "dense_inverse":
        return qfi_dense_inverse(state, sv_cutoff=sv_cutoff)
    raise ValueError(f"unknown QFI method {method!r}; expected one of {QFI_METHODS}")
