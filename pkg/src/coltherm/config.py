"""Run configuration: flat key-value files with strict validation.

Silent typos in physics parameters are the main failure mode of sweep
tooling, so unknown keys are hard errors and every diagnostic names the
offending key and line.  Format::

    # comment
    temperature = 0.1
    g_tau_sa = 1.0471975511965976
    sweep_parameter = h_tau_sa
    sweep_values = 0.02, 0.1, 0.5, 1.0

Tolerance defaults may be overridden process-wide through the environment
variables ``COLTHERM_EPS_PHYS``, ``COLTHERM_EPS_FIX`` and
``COLTHERM_SV_CUTOFF``; explicit config-file values still win.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass

import numpy as np

from .collision import ChainConfig
from .gaussian import CovarianceMatrix, squeezed_vacuum, thermal_state, vacuum_state
from .qfi import QFI_METHODS

__all__ = ["ConfigError", "RunConfig", "parse_config"]

ANCILLA_KINDS = ("vacuum", "squeezed", "thermal")

_DEFAULT_BENCH_N = (4, 6, 8, 12, 16, 24, 64, 128, 256, 512)


class ConfigError(ValueError):
    """Malformed or physically invalid run configuration."""


def _env_float(name: str, fallback: float) -> float:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"environment variable {name}={raw!r} is not a number") from None


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one CLI invocation."""

    temperature: float
    mode_frequency: float
    gamma_tau_se: float
    g_tau_sa: float
    h_tau_sa: float
    ancilla_kind: str
    n_max: int
    ancilla_r: float = 0.0
    ancilla_phi: float = 0.0
    ancilla_n_bar: float = 0.0
    qfi_method: str = "williamson_fast"
    n_dense_max: "int | None" = None
    n_stride: int = 1
    sweep_parameter: "str | None" = None
    sweep_values: "tuple[float, ...] | None" = None
    output: "str | None" = None
    n_star_epsilon: "tuple[float, ...]" = (0.1,)
    bench_n: "tuple[int, ...]" = _DEFAULT_BENCH_N
    bench_dense_n_max: int = 24
    eps_phys: float = 1e-9
    eps_fix: float = 1e-12
    sv_cutoff: float = 1e-12

    def validate(self) -> "RunConfig":
        def check(cond, msg):
            if not cond:
                raise ConfigError(msg)

        for key in ("temperature", "mode_frequency", "gamma_tau_se", "g_tau_sa", "h_tau_sa",
                    "ancilla_r", "ancilla_phi", "ancilla_n_bar"):
            check(math.isfinite(getattr(self, key)), f"key {key!r} must be finite")
        check(self.temperature > 0, "key 'temperature' must be > 0")
        check(self.mode_frequency > 0, "key 'mode_frequency' must be > 0")
        check(self.gamma_tau_se >= 0, "key 'gamma_tau_se' must be >= 0")
        check(self.ancilla_n_bar >= 0, "key 'ancilla_n_bar' must be >= 0")
        check(self.ancilla_kind in ANCILLA_KINDS,
              f"key 'ancilla_kind' must be one of {ANCILLA_KINDS}, got {self.ancilla_kind!r}")
        check(self.n_max >= 1, "key 'n_max' must be >= 1")
        check(self.qfi_method in QFI_METHODS,
              f"key 'qfi_method' must be one of {QFI_METHODS}, got {self.qfi_method!r}")
        check(self.n_stride >= 1, "key 'n_stride' must be >= 1")
        if self.n_dense_max is not None:
            check(1 <= self.n_dense_max <= self.n_max,
                  "key 'n_dense_max' must lie in [1, n_max]")
        if self.sweep_parameter is not None:
            check(self.sweep_parameter in _SWEEPABLE,
                  f"key 'sweep_parameter' must be one of {sorted(_SWEEPABLE)}, "
                  f"got {self.sweep_parameter!r}")
            check(self.sweep_values is not None and len(self.sweep_values) > 0,
                  "key 'sweep_values' is required when 'sweep_parameter' is set")
        for eps in self.n_star_epsilon:
            check(0.0 < eps < 1.0, f"key 'n_star_epsilon' entries must be in (0, 1), got {eps}")
        check(len(self.bench_n) > 0, "key 'bench_n' must not be empty")
        check(all(n >= 1 for n in self.bench_n), "key 'bench_n' entries must be >= 1")
        check(list(self.bench_n) == sorted(self.bench_n),
              "key 'bench_n' must be sorted ascending")
        for key in ("eps_phys", "eps_fix", "sv_cutoff"):
            check(getattr(self, key) > 0, f"key {key!r} must be > 0")
        return self

    def ancilla_state(self) -> CovarianceMatrix:
        if self.ancilla_kind == "vacuum":
            return vacuum_state(1)
        if self.ancilla_kind == "squeezed":
            return squeezed_vacuum(self.ancilla_r, self.ancilla_phi)
        return thermal_state(self.ancilla_n_bar)

    def chain_config(self) -> ChainConfig:
        return ChainConfig(
            temperature=self.temperature,
            mode_frequency=self.mode_frequency,
            gamma_tau_se=self.gamma_tau_se,
            g_tau_sa=self.g_tau_sa,
            h_tau_sa=self.h_tau_sa,
            ancilla=self.ancilla_state(),
        )

    def evaluation_points(self) -> np.ndarray:
        """Curve sample points: dense up to ``n_dense_max``, strided after."""
        dense_max = self.n_max if self.n_dense_max is None else self.n_dense_max
        points = set(range(1, min(dense_max, self.n_max) + 1))
        points.update(range(dense_max + self.n_stride, self.n_max + 1, self.n_stride))
        points.add(self.n_max)
        return np.asarray(sorted(points), dtype=int)

    def with_value(self, parameter: str, value: float) -> "RunConfig":
        """Copy with one swept physical parameter replaced."""
        if parameter not in _SWEEPABLE:
            raise ConfigError(f"parameter {parameter!r} is not sweepable")
        return dataclasses.replace(self, **{parameter: float(value)}).validate()

    def metadata(self) -> "dict[str, str]":
        """All parameters as strings, for output-file preambles."""
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                rendered = ""
            elif isinstance(value, tuple):
                rendered = " ".join(_render(v) for v in value)
            else:
                rendered = _render(value)
            out[f.name] = rendered
        return out


_SWEEPABLE = frozenset(
    {
        "temperature",
        "mode_frequency",
        "gamma_tau_se",
        "g_tau_sa",
        "h_tau_sa",
        "ancilla_r",
        "ancilla_phi",
        "ancilla_n_bar",
    }
)


def _render(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


_REQUIRED = ("temperature", "mode_frequency", "gamma_tau_se", "g_tau_sa", "h_tau_sa",
             "ancilla_kind", "n_max")

_FLOAT_KEYS = {"temperature", "mode_frequency", "gamma_tau_se", "g_tau_sa", "h_tau_sa",
               "ancilla_r", "ancilla_phi", "ancilla_n_bar", "eps_phys", "eps_fix", "sv_cutoff"}
_INT_KEYS = {"n_max", "n_dense_max", "n_stride", "bench_dense_n_max"}
_STR_KEYS = {"ancilla_kind", "qfi_method", "sweep_parameter", "output"}
_FLOAT_LIST_KEYS = {"sweep_values", "n_star_epsilon"}
_INT_LIST_KEYS = {"bench_n"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | _FLOAT_LIST_KEYS | _INT_LIST_KEYS


def _parse_value(key: str, raw: str, lineno: int):
    def fail(kind):
        raise ConfigError(f"line {lineno}: key {key!r}: expected {kind}, got {raw!r}")

    items = raw.replace(",", " ").split()
    try:
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_LIST_KEYS:
            return tuple(float(v) for v in items)
        if key in _INT_LIST_KEYS:
            return tuple(int(v) for v in items)
    except ValueError:
        fail("a number" if key in _FLOAT_KEYS | _INT_KEYS else "a list of numbers")
    return raw


def parse_config(path: str) -> RunConfig:
    """Parse and validate a config file; raises :class:`ConfigError`."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc

    values = {}
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw, lineno)

    for key in _REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")

    defaults = {
        "eps_phys": _env_float("COLTHERM_EPS_PHYS", 1e-9),
        "eps_fix": _env_float("COLTHERM_EPS_FIX", 1e-12),
        "sv_cutoff": _env_float("COLTHERM_SV_CUTOFF", 1e-12),
    }
    defaults.update(values)
    try:
        config = RunConfig(**defaults)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return config.validate()
