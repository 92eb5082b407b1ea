"""Backend selection for the normal-form block solve.

The compiled extension is preferred; the vectorized numpy implementation is
the drop-in fallback when the extension was not built.  Set
``COLTHERM_KERNEL=python`` or ``COLTHERM_KERNEL=compiled`` to force a
backend (the latter fails loudly when the extension is missing).
"""

from __future__ import annotations

import logging
import os

from . import _solve_py

logger = logging.getLogger(__name__)

_BACKENDS = {"python": _solve_py}

try:
    from . import _solve as _solve_ext

    _BACKENDS["compiled"] = _solve_ext
except ImportError:  # pragma: no cover - depends on build environment
    _solve_ext = None

_forced = os.environ.get("COLTHERM_KERNEL", "").strip().lower()
if _forced:
    if _forced not in ("python", "compiled"):
        raise ValueError(f"COLTHERM_KERNEL must be 'python' or 'compiled', got {_forced!r}")
    if _forced not in _BACKENDS:
        raise ImportError("COLTHERM_KERNEL=compiled but the extension is not built")
    _active = _BACKENDS[_forced]
else:
    _active = _BACKENDS.get("compiled", _solve_py)

if _active is _solve_py and _solve_ext is None:
    logger.info("coltherm compiled kernel unavailable; using numpy fallback")

#: Active solver, selected at import time.
solve_normal_form = _active.solve_normal_form


def active_backend() -> str:
    """Name of the backend behind :func:`solve_normal_form`."""
    return _active.BACKEND


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_solver(backend: str):
    """Solver for an explicit backend name (used by the benchmark)."""
    try:
        return _BACKENDS[backend].solve_normal_form
    except KeyError:
        raise ValueError(f"unknown kernel backend {backend!r}; have {available_backends()}") from None
