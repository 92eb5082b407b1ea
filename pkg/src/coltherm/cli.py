"""Command-line front end: steady, curve, fit, and bench subcommands.

Output files are deterministic for a fixed config and package version: CSV
numbers carry full round-trip precision, metadata preambles are emitted in a
fixed order, and sweep rows follow grid order regardless of worker
scheduling.  Only the benchmark's measured seconds vary between runs.

Exit codes: 0 success, 1 config error, 2 physical instability.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, analysis, kernels, qfi
from .collision import UnstableSteadyStateError, simulate_chain, steady_state
from .config import ConfigError, RunConfig, parse_config

__all__ = ["main"]

_EXIT_OK = 0
_EXIT_CONFIG = 1
_EXIT_UNSTABLE = 2


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _preamble(config: RunConfig) -> "list[str]":
    lines = [f"# coltherm_version = {__version__}"]
    lines += [f"# {key} = {value}" for key, value in config.metadata().items()]
    return lines


def _write_csv(path: str, config: RunConfig, header: "list[str]", rows: "list[list[str]]"):
    text = "\n".join(_preamble(config) + [",".join(header)] + [",".join(r) for r in rows]) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_json(path: "str | None", payload: dict):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_steady(config: RunConfig, out: "str | None") -> int:
    chain = config.chain_config()
    result = steady_state(chain.channel(), chain.interaction(), chain.ancilla, eps_fix=config.eps_fix)
    report = {
        "stable": result.stable,
        "spectral_radius": result.spectral_radius,
    }
    if result.stable:
        report["steady_state"] = result.state.cm.data.tolist()
        report["steady_state_gradient"] = result.state.grad.tolist()
    print(f"stable: {result.stable}")
    print(f"spectral_radius: {_fmt(result.spectral_radius)}")
    if result.stable:
        cov = result.state.cm.data
        print("steady_state:")
        for row in cov:
            print("  [" + ", ".join(_fmt(v) for v in row) + "]")
    if out is not None:
        _write_json(out, report)
    return _EXIT_OK if result.stable else _EXIT_UNSTABLE


def _curve_for(config: RunConfig) -> analysis.QfiCurve:
    chain = config.chain_config()
    if config.n_max == 1:  # below qfi_curve's minimum: emit the single point
        state = simulate_chain(chain.channel(), chain.interaction(), chain.ancilla, 1)
        value = qfi.compute_qfi(
            state, config.qfi_method, eps_phys=config.eps_phys, sv_cutoff=config.sv_cutoff
        )
        return analysis.QfiCurve(
            config=chain,
            method=config.qfi_method,
            n_values=np.array([1]),
            qfi=np.array([value]),
            density=np.array([value]),
        )
    return analysis.qfi_curve(
        chain,
        config.n_max,
        method=config.qfi_method,
        n_values=config.evaluation_points(),
        eps_phys=config.eps_phys,
        sv_cutoff=config.sv_cutoff,
    )


def _curve_record(config: RunConfig):
    """One sweep grid point -> (stable, curve-or-None). Never raises for instability."""
    try:
        return True, _curve_for(config)
    except UnstableSteadyStateError:
        return False, None


def _sweep_configs(config: RunConfig):
    return [config.with_value(config.sweep_parameter, v) for v in config.sweep_values]


def _run_sweep(config: RunConfig, workers: int, fn):
    points = _sweep_configs(config)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, points))
    return [fn(p) for p in points]


def cmd_curve(config: RunConfig, out: "str | None", workers: int) -> int:
    if out is None:
        print("error: curve requires --out or an 'output' config key", file=sys.stderr)
        return _EXIT_CONFIG

    if config.sweep_parameter is None:
        try:
            curve = _curve_for(config)
        except UnstableSteadyStateError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return _EXIT_UNSTABLE
        rows = [
            [str(n), _fmt(F), _fmt(f)]
            for n, F, f in zip(curve.n_values, curve.qfi, curve.density)
        ]
        _write_csv(out, config, ["N", "qfi", "qfi_density"], rows)
        return _EXIT_OK

    results = _run_sweep(config, workers, _curve_record)
    rows = []
    for value, (stable, curve) in zip(config.sweep_values, results):
        if not stable:
            rows.append([_fmt(value), "", "", "", "0"])
            continue
        for n, F, f in zip(curve.n_values, curve.qfi, curve.density):
            rows.append([_fmt(value), str(n), _fmt(F), _fmt(f), "1"])
    _write_csv(out, config, [config.sweep_parameter, "N", "qfi", "qfi_density", "stable"], rows)
    return _EXIT_OK


def _fit_record(config: RunConfig) -> dict:
    try:
        curve = _curve_for(config)
    except UnstableSteadyStateError:
        return {"stable": False}
    rate = analysis.estimate_rate(curve)
    fit = analysis.fit_alpha(curve, f_inf=rate.value)
    return {
        "stable": True,
        "alpha": fit.alpha,
        "f1": fit.f1,
        "f_inf": fit.f_inf,
        "residual": fit.residual,
        "degenerate": fit.degenerate,
        "rate_tail_drift": rate.tail_drift,
        "rate_converged": rate.converged,
        "n_star": [
            {
                "epsilon": ns.epsilon,
                "exact": ns.exact,
                "quoted": ns.quoted,
                "asymptotic": ns.asymptotic,
            }
            for ns in (analysis.n_star(fit, eps) for eps in config.n_star_epsilon)
        ],
    }


def cmd_fit(config: RunConfig, out: "str | None", workers: int) -> int:
    payload: dict = {"coltherm_version": __version__, "config": config.metadata()}
    if config.sweep_parameter is None:
        record = _fit_record(config)
        if not record["stable"]:
            print("error: collision map is unstable for this configuration", file=sys.stderr)
            return _EXIT_UNSTABLE
        payload.update(record)
    else:
        records = _run_sweep(config, workers, _fit_record)
        payload["sweep_parameter"] = config.sweep_parameter
        payload["records"] = [
            {config.sweep_parameter: value, **record}
            for value, record in zip(config.sweep_values, records)
        ]
    _write_json(out, payload)
    return _EXIT_OK


def _time_call(fn, repeats: int = 3):
    best, value = np.inf, None
    for _ in range(repeats):
        start = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - start)
    return best, value


def cmd_bench(config: RunConfig, out: "str | None") -> int:
    """Time the QFI routes on chain states of increasing size.

    Emits whole-call rows for each method plus stage rows for the fast
    path: the decomposition, the gradient transform, and the 2x2-block
    solve for every available kernel backend.  Dense routes stop at
    ``bench_dense_n_max``.
    """
    if out is None:
        print("error: bench requires --out or an 'output' config key", file=sys.stderr)
        return _EXIT_CONFIG
    chain = config.chain_config()
    channel, interaction = chain.channel(), chain.interaction()
    rows = []
    for n in config.bench_n:
        try:
            state = simulate_chain(channel, interaction, chain.ancilla, n)
        except UnstableSteadyStateError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return _EXIT_UNSTABLE

        seconds, fast_value = _time_call(lambda: qfi.qfi_fast(state))
        rows.append([str(n), "williamson_fast", _fmt(seconds), _fmt(fast_value)])

        if n <= config.bench_dense_n_max:
            for method in ("dense_solve", "dense_inverse"):
                seconds, value = _time_call(lambda: qfi.compute_qfi(state, method))
                rows.append([str(n), method, _fmt(seconds), _fmt(value)])

        seconds, decomp = _time_call(lambda: qfi.williamson(state.cm))
        rows.append([str(n), "fast_decompose", _fmt(seconds), _fmt(fast_value)])
        seconds, rhs = _time_call(lambda: qfi.transform_gradient(state.grad, decomp))
        rows.append([str(n), "fast_transform", _fmt(seconds), _fmt(fast_value)])
        for backend in kernels.available_backends():
            solver = kernels.get_solver(backend)
            seconds, _ = _time_call(
                lambda: qfi._qfi_normal_solve(decomp.nu, rhs, config.sv_cutoff, solver=solver)
            )
            rows.append([str(n), f"fast_solve[{backend}]", _fmt(seconds), _fmt(fast_value)])

    _write_csv(out, config, ["N", "method", "seconds", "qfi"], rows)
    return _EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="coltherm",
        description="Gaussian collision-model thermometry and QFI analysis",
    )
    parser.add_argument("--version", action="version", version=f"coltherm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("steady", "solve and report the system steady state"),
        ("curve", "QFI density vs ancilla count, CSV output"),
        ("fit", "sigmoid fit of the QFI density, JSON output"),
        ("bench", "time the QFI methods, CSV output"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to a key = value config file")
        cmd.add_argument("--out", default=None, help="output file (overrides config 'output')")
        cmd.add_argument("--workers", type=int, default=1, help="parallel sweep workers")

    args = parser.parse_args(argv)
    try:
        config = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG

    out = args.out if args.out is not None else config.output
    if args.command == "steady":
        return cmd_steady(config, out)
    if args.command == "curve":
        return cmd_curve(config, out, args.workers)
    if args.command == "fit":
        return cmd_fit(config, out, args.workers)
    return cmd_bench(config, out)


if __name__ == "__main__":
    sys.exit(main())
