"""QFI-density curves, asymptotic-rate estimation, and the sigmoid fit.

The density is ``f_N = F_N / N`` for the joint ``N``-ancilla state.  Its
approach to the asymptotic rate ``f_inf`` is summarized by the
one-parameter sigmoid

    f(n) = f_1 + (f_inf - f_1) * (n - 1) / sqrt(alpha^2 + (n - 1)^2),

where ``alpha`` measures how many ancillae the correlated transient spans
(``alpha -> 0`` is memoryless linear scaling).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .collision import ChainConfig, chain_prefix_states
from .qfi import QFI_METHODS, compute_qfi

__all__ = [
    "NStarResult",
    "QfiCurve",
    "RateEstimate",
    "SigmoidFit",
    "estimate_rate",
    "fit_alpha",
    "n_star",
    "qfi_curve",
    "sigmoid_density",
]


@dataclass(frozen=True)
class QfiCurve:
    """QFI and QFI density per ancilla count, for one parameter point."""

    config: ChainConfig
    method: str
    n_values: np.ndarray = field(repr=False)
    qfi: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)

    @property
    def n_max(self) -> int:
        return int(self.n_values[-1])


def qfi_curve(
    config: ChainConfig,
    n_max: int,
    method: str = "williamson_fast",
    n_values=None,
    eps_phys: "float | None" = None,
    sv_cutoff: "float | None" = None,
) -> QfiCurve:
    """Run one chain to ``n_max`` and evaluate the QFI on prefix marginals.

    By default every prefix ``1..n_max`` is evaluated.  ``n_values`` may
    restrict evaluation to a subsample (it must start at 1 and end at
    ``n_max``); the chain itself is always simulated collision by collision,
    so the returned marginals are identical to full runs of each length.
    """
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    if method not in QFI_METHODS:
        raise ValueError(f"unknown QFI method {method!r}; expected one of {QFI_METHODS}")
    if n_values is None:
        n_values = np.arange(1, n_max + 1)
    n_values = np.asarray(sorted(set(int(n) for n in n_values)), dtype=int)
    if n_values[0] != 1 or n_values[-1] != n_max:
        raise ValueError("n_values must include 1 and n_max")

    tolerances = {}
    if eps_phys is not None:
        tolerances["eps_phys"] = eps_phys
    if sv_cutoff is not None:
        tolerances["sv_cutoff"] = sv_cutoff
    channel = config.channel()
    interaction = config.interaction()
    qfi = np.empty(n_values.shape[0])
    for k, (n, state) in enumerate(
        chain_prefix_states(channel, interaction, config.ancilla, n_values)
    ):
        qfi[k] = compute_qfi(state, method, **tolerances)
    density = qfi / n_values
    return QfiCurve(config=config, method=method, n_values=n_values, qfi=qfi, density=density)


@dataclass(frozen=True)
class RateEstimate:
    value: float
    tail_drift: float
    converged: bool


def estimate_rate(
    curve: QfiCurve,
    tail_fraction: float = 0.1,
    min_points: int = 5,
    drift_tol: float = 0.02,
) -> RateEstimate:
    """Asymptotic QFI rate from the curve tail.

    Averages the densities with ``n`` in the top ``tail_fraction`` of the
    range (at least ``min_points`` points) to damp residual transients.  The
    peak-to-peak drift across that window, relative to the estimate, flags
    non-convergence; the flag is advisory, not fatal.
    """
    n = curve.n_values
    if n[-1] < 50:
        raise ValueError(f"rate estimation needs n_max >= 50, got {n[-1]}")
    in_tail = n >= (1.0 - tail_fraction) * n[-1]
    if in_tail.sum() < min_points:
        in_tail = np.zeros_like(in_tail)
        in_tail[-min_points:] = True
    tail = curve.density[in_tail]
    value = float(tail.mean())
    scale = abs(value) if value != 0.0 else 1.0
    drift = float(np.ptp(tail)) / scale
    return RateEstimate(value=value, tail_drift=drift, converged=drift <= drift_tol)


def sigmoid_density(n, alpha: float, f1: float, f_inf: float):
    """Model density at ancilla count ``n`` (scalar or array).

    The ``alpha = 0``, ``n = 1`` corner is the memoryless limit: the model
    equals ``f1`` there (0/0 resolved to 0).
    """
    x = np.asarray(n, dtype=float) - 1.0
    denom = np.hypot(alpha, x)
    ratio = np.divide(x, denom, out=np.zeros_like(x), where=denom != 0.0)
    return f1 + (f_inf - f1) * ratio


@dataclass(frozen=True)
class SigmoidFit:
    alpha: float
    f1: float
    f_inf: float
    residual: float
    degenerate: bool


def fit_alpha(
    curve: QfiCurve,
    f_inf: "float | None" = None,
    degeneracy_rtol: float = 1e-6,
) -> SigmoidFit:
    """One-dimensional least-squares fit of ``alpha``.

    ``f_1`` is pinned to the measured single-ancilla density and ``f_inf``
    to :func:`estimate_rate` (or the supplied value); only ``alpha`` is
    free, with uniform weights over the curve's points.  A flat curve
    (``f_inf ~ f_1``) fits any ``alpha``, so it is reported as degenerate
    with ``alpha = 0``.
    """
    n = curve.n_values.astype(float)
    f = curve.density
    if n.shape[0] < 3:
        raise ValueError("fit needs at least 3 curve points")
    if n[0] != 1:
        raise ValueError("fit needs the single-ancilla density (n = 1)")
    f1 = float(f[0])
    if f_inf is None:
        f_inf = estimate_rate(curve).value
    span = f_inf - f1

    if abs(span) <= degeneracy_rtol * max(abs(f1), abs(f_inf)):
        residual = float(np.sqrt(np.mean((f - f1) ** 2)))
        return SigmoidFit(alpha=0.0, f1=f1, f_inf=f_inf, residual=residual, degenerate=True)

    def residuals(params):
        return sigmoid_density(n, params[0], f1, f_inf) - f

    # start where the curve crosses half of the rise
    half_idx = int(np.argmin(np.abs(f - (f1 + 0.5 * span))))
    alpha0 = max(n[half_idx] - 1.0, 1.0)
    result = least_squares(
        residuals, [alpha0], bounds=([0.0], [np.inf]), xtol=1e-15, ftol=1e-15, gtol=1e-15
    )
    alpha = float(result.x[0])
    rms = float(np.sqrt(np.mean(residuals([alpha]) ** 2)))
    return SigmoidFit(alpha=alpha, f1=f1, f_inf=f_inf, residual=rms, degenerate=False)


@dataclass(frozen=True)
class NStarResult:
    """Ancilla count needed to reach ``(1 - epsilon) f_inf``.

    ``exact`` inverts the sigmoid model directly and is the authoritative
    value.  ``quoted`` evaluates the closed form quoted in the literature for
    this truncation size; it is algebraically inconsistent with direct
    inversion of the model (see the README), so it is reported only for
    comparison.  ``asymptotic`` is the small-epsilon limit
    ``alpha sqrt(f_inf / (f_inf - f1)) / sqrt(epsilon)``.
    """

    epsilon: float
    exact: float
    quoted: float
    asymptotic: float


def n_star(fit: SigmoidFit, epsilon: float) -> NStarResult:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    f1, f_inf, alpha = fit.f1, fit.f_inf, fit.alpha

    target = (1.0 - epsilon) * f_inf
    if target <= f1 or fit.degenerate:
        exact = 1.0
    else:
        c = (target - f1) / (f_inf - f1)  # in (0, 1) here
        exact = alpha * c / math.sqrt(1.0 - c * c)
        exact = max(exact, 1.0)

    denom = f_inf * epsilon * (2.0 * f1 + (2.0 - epsilon) * f_inf)
    quoted = (
        (alpha - 1.0) * (f1 + target) / math.sqrt(denom) if denom > 0.0 else math.nan
    )
    asymptotic = (
        alpha / math.sqrt(epsilon) * math.sqrt(f_inf / (f_inf - f1))
        if f_inf > f1
        else math.nan
    )
    return NStarResult(epsilon=epsilon, exact=exact, quoted=quoted, asymptotic=asymptotic)
