"""Collision-chain engine.

One collision is the stroboscopic step: the system mode dissipates into the
bath for a time ``tau_SE`` (thermal channel), then interacts unitarily with a
fresh ancilla for ``tau_SA`` (beam-splitter plus two-mode squeezing).  The
temperature derivative of the covariance matrix is propagated exactly
alongside the state: every map is linear in the covariance matrix and the
temperature enters only through the channel's additive noise term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .gaussian import BoseOccupation, CovarianceMatrix, symplectic_form

__all__ = [
    "ChainConfig",
    "InteractionParams",
    "StateWithGradient",
    "SteadyStateResult",
    "ThermalChannel",
    "ThermalChannelParams",
    "UnstableSteadyStateError",
    "apply_thermal_channel",
    "build_interaction_symplectic",
    "build_thermal_channel",
    "chain_prefix_states",
    "collision_step",
    "simulate_chain",
    "steady_state",
]


class UnstableSteadyStateError(RuntimeError):
    """The collision map has no stable fixed point for these parameters."""


@dataclass(frozen=True)
class InteractionParams:
    """Dimensionless couplings of the system-ancilla unitary.

    ``g_tau`` is the beam-splitter strength ``g * tau_SA`` (``pi/2`` is the
    full swap); ``h_tau`` is the two-mode squeezing strength ``h * tau_SA``.
    """

    g_tau: float
    h_tau: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.g_tau) and math.isfinite(self.h_tau)):
            raise ValueError(f"couplings must be finite, got {self}")


@dataclass(frozen=True)
class ThermalChannelParams:
    gamma_tau: float
    occupation: BoseOccupation

    def __post_init__(self):
        if not (self.gamma_tau >= 0.0 and math.isfinite(self.gamma_tau)):
            raise ValueError(f"gamma_tau must be non-negative, got {self.gamma_tau}")


@dataclass(frozen=True)
class ThermalChannel:
    """Single-mode channel ``cov -> X cov X^T + Y``.

    Both ``X = x I`` and ``Y = y I`` are multiples of the identity, so only
    the scalar factors are stored.  ``dy_dtemp`` is the temperature
    derivative of ``y``; it is the only place temperature enters the
    dynamics.
    """

    x: float
    y: float
    dy_dtemp: float

    @property
    def X(self) -> np.ndarray:
        return self.x * np.eye(2)

    @property
    def Y(self) -> np.ndarray:
        return self.y * np.eye(2)

    @property
    def Y_derivative(self) -> np.ndarray:
        return self.dy_dtemp * np.eye(2)


@dataclass(frozen=True)
class StateWithGradient:
    """Covariance matrix paired with its exact temperature derivative."""

    cm: CovarianceMatrix
    grad: np.ndarray = field(repr=False)

    def __post_init__(self):
        grad = np.asarray(self.grad, dtype=float)
        if grad.shape != self.cm.data.shape:
            raise ValueError(f"gradient shape {grad.shape} != state shape {self.cm.data.shape}")
        object.__setattr__(self, "grad", grad)

    @property
    def modes(self) -> int:
        return self.cm.modes


@dataclass(frozen=True)
class SteadyStateResult:
    state: "StateWithGradient | None"
    stable: bool
    spectral_radius: float


@dataclass(frozen=True)
class ChainConfig:
    """Physical parameters of one collision chain."""

    temperature: float
    mode_frequency: float
    gamma_tau_se: float
    g_tau_sa: float
    h_tau_sa: float
    ancilla: CovarianceMatrix

    def occupation(self) -> BoseOccupation:
        return BoseOccupation.from_temperature(self.temperature, self.mode_frequency)

    def channel(self) -> ThermalChannel:
        return build_thermal_channel(ThermalChannelParams(self.gamma_tau_se, self.occupation()))

    def interaction(self) -> np.ndarray:
        return build_interaction_symplectic(InteractionParams(self.g_tau_sa, self.h_tau_sa))


def build_interaction_symplectic(params: InteractionParams) -> np.ndarray:
    """4x4 symplectic for the combined BS + TMS collision unitary.

    The quadratic Hamiltonian couples the pair through the off-diagonal block
    ``diag(g+h, g-h)``; the propagator is ``exp(Omega H tau)``, evaluated with
    scaling-and-squaring.  The generator squares to ``(h^2 - g^2) tau^2 I``,
    so closed forms exist in the pure-BS and pure-TMS limits; those serve as
    independent test oracles rather than as the production path.
    """
    h_block = np.diag([params.g_tau + params.h_tau, params.g_tau - params.h_tau])
    ham = np.zeros((4, 4))
    ham[0:2, 2:4] = h_block
    ham[2:4, 0:2] = h_block
    return expm(symplectic_form(2) @ ham)


def build_thermal_channel(params: ThermalChannelParams) -> ThermalChannel:
    """Finite-time thermalization map for coupling ``gamma * tau_SE``."""
    x = math.exp(-params.gamma_tau / 2.0)
    decay = -math.expm1(-params.gamma_tau)  # 1 - exp(-gamma tau)
    occ = params.occupation
    return ThermalChannel(x=x, y=(occ.value + 0.5) * decay, dy_dtemp=occ.derivative * decay)


def _channel_inplace(cm: np.ndarray, grad: np.ndarray, ch: ThermalChannel, mode: int, dim: int):
    """Apply the thermal channel to ``mode``, touching only ``[:dim, :dim]``."""
    r = slice(2 * mode, 2 * mode + 2)
    cm[r, :dim] *= ch.x
    cm[:dim, r] *= ch.x
    grad[r, :dim] *= ch.x
    grad[:dim, r] *= ch.x
    cm[2 * mode, 2 * mode] += ch.y
    cm[2 * mode + 1, 2 * mode + 1] += ch.y
    grad[2 * mode, 2 * mode] += ch.dy_dtemp
    grad[2 * mode + 1, 2 * mode + 1] += ch.dy_dtemp


def _two_mode_inplace(cm: np.ndarray, grad: np.ndarray, s: np.ndarray, m0: int, m1: int, dim: int):
    """Apply a 4x4 symplectic to modes ``(m0, m1)`` within ``[:dim, :dim]``."""
    idx = np.array([2 * m0, 2 * m0 + 1, 2 * m1, 2 * m1 + 1])
    cols = np.arange(dim)
    for mat in (cm, grad):
        mat[np.ix_(idx, cols)] = s @ mat[np.ix_(idx, cols)]
        mat[np.ix_(cols, idx)] = mat[np.ix_(cols, idx)] @ s.T


def apply_thermal_channel(state: StateWithGradient, ch: ThermalChannel, mode: int = 0) -> StateWithGradient:
    """Thermal channel on one mode of a joint state, gradient co-propagated."""
    if not 0 <= mode < state.modes:
        raise ValueError(f"mode {mode} out of range for {state.modes}-mode state")
    cm = state.cm.data.copy()
    grad = state.grad.copy()
    _channel_inplace(cm, grad, ch, mode, cm.shape[0])
    return StateWithGradient(CovarianceMatrix(state.modes, cm), grad)


def collision_step(
    state: StateWithGradient,
    ch: ThermalChannel,
    s: np.ndarray,
    system_mode: int,
    ancilla_mode: int,
) -> StateWithGradient:
    """One stroboscopic step: channel on the system, then the pair unitary."""
    if system_mode == ancilla_mode:
        raise ValueError("system and ancilla modes must be distinct")
    for m in (system_mode, ancilla_mode):
        if not 0 <= m < state.modes:
            raise ValueError(f"mode {m} out of range for {state.modes}-mode state")
    cm = state.cm.data.copy()
    grad = state.grad.copy()
    dim = cm.shape[0]
    _channel_inplace(cm, grad, ch, system_mode, dim)
    _two_mode_inplace(cm, grad, np.asarray(s, dtype=float), system_mode, ancilla_mode, dim)
    return StateWithGradient(CovarianceMatrix(state.modes, cm), grad)


def steady_state(
    ch: ThermalChannel,
    s: np.ndarray,
    ancilla: CovarianceMatrix,
    eps_fix: float = 1e-12,
) -> SteadyStateResult:
    """Fixed point of the system's one-collision map.

    With ``S = [[A, B], [C, D]]`` the system marginal evolves as the affine
    map ``cov -> A' cov A'^T + Q`` with ``A' = A X`` and
    ``Q = A Y A^T + B cov_anc B^T``.  Vectorized, this is a 4-dimensional
    discrete-time Stein equation ``(I - A' (x) A') vec(cov*) = vec(Q)``; the
    map converges for every initial state iff the linearized map
    ``G = A' (x) A'`` has spectral radius below one.  The gradient fixed
    point solves the same system with constant ``A (dY/dT) A^T``.

    The returned state satisfies the fixed-point equation to ``eps_fix``
    (relative to the state's scale); a violation raises, since the direct
    solve is backward stable and should never produce one.
    """
    s = np.asarray(s, dtype=float)
    if ancilla.modes != 1 or s.shape != (4, 4):
        raise ValueError("steady_state expects a single-mode ancilla and a 4x4 symplectic")
    a = s[0:2, 0:2]
    b = s[0:2, 2:4]
    a_eff = ch.x * a
    g_map = np.kron(a_eff, a_eff)
    radius = float(np.abs(np.linalg.eigvals(g_map)).max())
    if radius >= 1.0:
        return SteadyStateResult(state=None, stable=False, spectral_radius=radius)

    lhs = np.eye(4) - g_map
    q = ch.y * (a @ a.T) + b @ ancilla.data @ b.T
    dq = ch.dy_dtemp * (a @ a.T)
    cov = np.linalg.solve(lhs, q.reshape(-1)).reshape(2, 2)
    grad = np.linalg.solve(lhs, dq.reshape(-1)).reshape(2, 2)
    cov = 0.5 * (cov + cov.T)
    grad = 0.5 * (grad + grad.T)

    residual = np.abs(a_eff @ cov @ a_eff.T + q - cov).max()
    if residual > eps_fix * max(1.0, np.abs(cov).max()):
        raise RuntimeError(
            f"steady-state residual {residual:.3g} above eps_fix={eps_fix:.3g}"
        )
    state = StateWithGradient(CovarianceMatrix(1, cov), grad)
    return SteadyStateResult(state=state, stable=True, spectral_radius=radius)


def chain_prefix_states(
    ch: ThermalChannel,
    s: np.ndarray,
    ancilla: CovarianceMatrix,
    n_values,
    initial: "StateWithGradient | None" = None,
):
    """Yield ``(n, state)`` for the first-``n``-ancillae marginal, n ascending.

    The joint covariance matrix is grown collision by collision; ancillae
    already processed are never touched again, so the marginal of the first
    ``n`` ancillae is final as soon as collision ``n`` has happened.  One
    chain run therefore serves every requested prefix exactly.
    """
    s = np.asarray(s, dtype=float)
    if ancilla.modes != 1:
        raise ValueError("ancillae must be single-mode states")
    n_values = sorted(set(int(n) for n in n_values))
    if not n_values or n_values[0] < 1:
        raise ValueError(f"prefix sizes must be >= 1, got {n_values}")
    n_max = n_values[-1]

    if initial is None:
        fixed = steady_state(ch, s, ancilla)
        if not fixed.stable:
            raise UnstableSteadyStateError(
                f"collision map is unstable (spectral radius {fixed.spectral_radius:.6g})"
            )
        initial = fixed.state

    m = 2 * (n_max + 1)
    cm = np.zeros((m, m))
    grad = np.zeros((m, m))
    cm[0:2, 0:2] = initial.cm.data
    grad[0:2, 0:2] = initial.grad
    for k in range(n_max):
        cm[2 + 2 * k : 4 + 2 * k, 2 + 2 * k : 4 + 2 * k] = ancilla.data

    wanted = set(n_values)
    for n in range(1, n_max + 1):
        dim = 2 + 2 * n
        _channel_inplace(cm, grad, ch, 0, dim)
        _two_mode_inplace(cm, grad, s, 0, n, dim)
        if n in wanted:
            block = slice(2, dim)
            yield n, StateWithGradient(
                CovarianceMatrix(n, cm[block, block].copy()), grad[block, block].copy()
            )


def simulate_chain(
    ch: ThermalChannel,
    s: np.ndarray,
    ancilla: CovarianceMatrix,
    n_ancillae: int,
    initial: "StateWithGradient | None" = None,
) -> StateWithGradient:
    """State (and T-gradient) of ``n_ancillae`` ancillae after the chain.

    The system starts from the steady state of the collision map (or from
    ``initial``), collides once with each fresh ancilla, and is traced out at
    the end.  Raises :class:`UnstableSteadyStateError` when no steady state
    exists.
    """
    if n_ancillae < 1:
        raise ValueError(f"n_ancillae must be >= 1, got {n_ancillae}")
    for _, state in chain_prefix_states(ch, s, ancilla, [n_ancillae], initial=initial):
        return state
    raise AssertionError("unreachable")
