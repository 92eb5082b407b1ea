"""Vectorized numpy implementation of the normal-form block solve.

Fallback used when the compiled extension is unavailable; see
``coltherm.kernels`` for backend selection.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def solve_normal_form(nu: np.ndarray, rhs: np.ndarray, cutoff: float):
    """Solve ``(W V W - 1/4 Omega V Omega^T) = rhs`` for V, blockwise.

    ``W = diag(nu_1, nu_1, ..., nu_N, nu_N)``.  Entry ``(i, j)`` couples only
    to ``(i^1, j^1)`` (the x<->p partner indices), giving independent 2x2
    systems ``[[a, b], [b, a]]`` with ``a = w_i w_j`` and ``b = -+ 1/4``.
    Near-singular eigencomponents (``|a +- b| <= cutoff``, pure-mode pairs)
    are dropped, i.e. the block is solved by pseudo-inverse.

    The singular-prone denominator ``a - 1/4`` is evaluated as
    ``mu_i mu_j + (mu_i + mu_j)/2`` with ``mu = nu - 1/2``, which is free of
    cancellation for near-pure modes.

    Returns ``(V, n_regularized)`` with ``n_regularized`` counting the 2x2
    blocks that needed the pseudo-inverse.
    """
    nu = np.asarray(nu, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = nu.shape[0]
    w = np.repeat(nu, 2)
    mu = w - 0.5

    a = np.outer(w, w)
    a_plus = a + 0.25
    a_minus = np.outer(mu, mu) + 0.5 * (mu[:, None] + mu[None, :])

    # sign of s_i s_j: +1 when i, j have equal x/p parity (then b = -1/4)
    par = np.tile([1.0, -1.0], n)
    same = np.outer(par, par) > 0
    d_plus = np.where(same, a_minus, a_plus)  # a + b
    d_minus = np.where(same, a_plus, a_minus)  # a - b

    p = np.arange(2 * n).reshape(n, 2)[:, ::-1].reshape(-1)
    rhs_partner = rhs[np.ix_(p, p)]
    u_plus = 0.5 * (rhs + rhs_partner)
    u_minus = 0.5 * (rhs - rhs_partner)

    keep_plus = np.abs(d_plus) > cutoff
    keep_minus = np.abs(d_minus) > cutoff
    out = np.where(keep_plus, u_plus / np.where(keep_plus, d_plus, 1.0), 0.0)
    out += np.where(keep_minus, u_minus / np.where(keep_minus, d_minus, 1.0), 0.0)

    # each 2x2 block appears twice in the entrywise masks
    n_regularized = int((~keep_plus | ~keep_minus).sum()) // 2
    return out, n_regularized
