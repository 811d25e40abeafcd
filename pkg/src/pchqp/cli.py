"""Command-line driver: spectrum diagnostics, solve, screen, bench and penalized runs.

Outputs are deterministic for a fixed ``--seed``: the main JSON/CSV artifacts
contain no timestamps or wall-clock values, and timing measurements go to a
``*.timings.json`` sidecar instead.  Exit codes: 0 success, 2 usage error,
3 data error, 4 numerical failure.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from .best_response import BRConfig, run_best_response, screen_from_trace
from .data import (
    GridCell,
    default_eta,
    load_csv,
    mse,
    run_grid,
    write_table,
)
from .dual_ascent import DPConfig, run_dual_program, screen_from_dp
from .errors import DataError, NumericalError
from .minmax import SupportVector
from .model import (
    RegressionData,
    build_penalized_problem,
    build_problem,
    from_regression,
    objective,
)
from .penalized import (
    run_best_response_penalized,
    run_dual_program_penalized,
    solve_reduced_penalized,
)
from .qpfile import read_qp
from .reduction import make_reduced_problem, solve_reduced
from .spectral import eig_sym, frobenius_error, k_hat, truncate


@dataclass
class RunConfig:
    """Parsed command-line invocation."""

    command: str
    method: str = "dp"
    k: str = "auto"
    s: int | None = None
    eta: float | None = None
    theta: float | None = None
    iters: int | None = None
    step_a: float | None = None
    p_window: int | None = None
    seed: int = 0
    input: str | None = None
    target: str = "-1"
    output: str | None = None
    fmt: str = "json"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {key: _jsonable(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(val) for val in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(val) for val in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def _dump_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def _emit(payload: dict, output: str | None) -> None:
    text = _dump_json(payload)
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _sidecar(output: str | None, suffix: str) -> Path | None:
    if not output:
        return None
    p = Path(output)
    return p.with_name(p.stem + suffix)


def _write_timings(output: str | None, timings: dict[str, float]) -> None:
    side = _sidecar(output, ".timings.json")
    if side is not None:
        side.write_text(_dump_json(timings), encoding="utf-8")


def _write_trace_csv(output: str | None, iterates) -> None:
    side = _sidecar(output, ".trace.csv")
    if side is None:
        return
    with side.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "value", "support_size", "support"])
        for t, it in enumerate(iterates):
            idx = ";".join(str(int(j)) for j in it.z.indices())
            writer.writerow([t, repr(float(it.value)), it.z.count(), idx])


def _sniff_matrix_format(path: str) -> bool:
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    return line.split()[0] == "Q"
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    raise DataError(f"{path}: empty input file")


def _load_matrix_q(cfg: RunConfig) -> tuple[np.ndarray, RegressionData | None]:
    if cfg.input is None:
        raise click.UsageError("--input is required")
    if _sniff_matrix_format(cfg.input):
        Q, _, _, _ = read_qp(cfg.input)
        return 0.5 * (Q + Q.T), None
    data = load_csv(cfg.input, cfg.target)
    return (data.features.T @ data.features) / data.samples, data


def _load_problem(cfg: RunConfig):
    if cfg.input is None:
        raise click.UsageError("--input is required")
    if cfg.s is None:
        raise click.UsageError("--s is required for this command")
    if _sniff_matrix_format(cfg.input):
        if cfg.eta is None:
            raise click.UsageError("--eta is required with raw matrix input")
        Q, c, A, b = read_qp(cfg.input)
        prob = build_problem(Q, c, A, b, s=cfg.s, eta=cfg.eta)
        return prob, None, {"input_kind": "matrix", "eta": prob.eta, "eta_rule": "explicit"}
    data = load_csv(cfg.input, cfg.target)
    eta_rule = "explicit"
    eta = cfg.eta
    if eta is None:
        eta = default_eta(data)
        eta_rule = "sqrt(n_train)"
    prob = from_regression(data, s=cfg.s, eta=eta)
    meta = {"input_kind": "csv", "eta": eta, "eta_rule": eta_rule, "samples": data.samples}
    return prob, data, meta


def _resolve_k(spectrum, k_flag: str) -> tuple[int, int]:
    khat = k_hat(spectrum)
    if k_flag == "auto":
        return khat, khat
    try:
        k = int(k_flag)
    except ValueError:
        raise click.UsageError(f"--k must be an integer or 'auto', got {k_flag!r}") from None
    return k, khat


def cmd_spectrum(cfg: RunConfig) -> dict:
    """Eigenvalue report: spectrum, per-level reconstruction errors, k-hat, decay ratio."""
    Q, _ = _load_matrix_q(cfg)
    spectrum = eig_sym(Q)
    n = spectrum.n
    errors = [frobenius_error(spectrum, k) for k in range(1, n + 1)]
    khat = k_hat(spectrum)
    lam = spectrum.eigenvalues
    ratio = float(lam[0] / lam[9]) if n >= 10 and lam[9] != 0 else None
    report = {
        "n": n,
        "eigenvalues": [float(v) for v in lam],
        "frobenius_errors": errors,
        "k_hat": khat,
        "lambda1_over_lambda10": ratio,
    }
    if cfg.fmt == "csv" and cfg.output:
        with Path(cfg.output).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "eigenvalue", "frobenius_error", "k_hat", "lambda1_over_lambda10"])
            for k in range(1, n + 1):
                writer.writerow(
                    [k, repr(float(lam[k - 1])), repr(errors[k - 1]), khat, "" if ratio is None else repr(ratio)]
                )
    else:
        _emit(report, cfg.output)
    return report


def _screen_stage(prob, cfg: RunConfig):
    timings: dict[str, float] = {}
    start = time.perf_counter()
    spectrum = eig_sym(prob.Q)
    k, khat = _resolve_k(spectrum, cfg.k)
    trunc = truncate(spectrum, k)
    timings["spectral_s"] = time.perf_counter() - start

    start = time.perf_counter()
    if cfg.method == "br":
        br_cfg = BRConfig(max_iters=cfg.iters or 40)
        trace = run_best_response(trunc, prob, cfg=br_cfg)
        Z = screen_from_trace(trace, cfg.p_window or 6)
        certificate = trace.converged_certificate
        diag = {"cycle_start": trace.cycle_start, "cycle_period": trace.cycle_period}
    else:
        dp_cfg = DPConfig(
            max_iters=cfg.iters or 500,
            step_a=cfg.step_a or 4e-3,
            p_window=cfg.p_window or 50,
        )
        trace = run_dual_program(trunc, prob, cfg=dp_cfg)
        Z = screen_from_dp(trace, cfg.p_window or 50)
        certificate = trace.z_converged
        diag = {"z_converged": trace.z_converged}
    timings["screen_s"] = time.perf_counter() - start
    return trunc, trace, Z, certificate, diag, k, khat, timings


def cmd_screen(cfg: RunConfig) -> dict:
    """Run the iterative method and report the screened candidate set."""
    prob, _, meta = _load_problem(cfg)
    _, trace, Z, certificate, diag, k, khat, timings = _screen_stage(prob, cfg)
    report = {
        "command": "screen",
        "method": cfg.method,
        "k": k,
        "k_hat": khat,
        "s": prob.s,
        "seed": cfg.seed,
        "iterations": len(trace.iterates),
        "candidates": [int(j) for j in Z.indices()],
        "candidate_count": Z.count(),
        "certificate": bool(certificate),
        **diag,
        **meta,
    }
    _emit(report, cfg.output)
    _write_trace_csv(cfg.output, trace.iterates)
    _write_timings(cfg.output, timings)
    return report


def cmd_solve(cfg: RunConfig) -> dict:
    """Full pipeline: truncate, iterate, screen, then solve the reduced problem exactly."""
    prob, data, meta = _load_problem(cfg)
    _, trace, Z, certificate, diag, k, khat, timings = _screen_stage(prob, cfg)
    start = time.perf_counter()
    rp = make_reduced_problem(prob, Z, trace.iterates[-1].z)
    sol = solve_reduced(rp, prob.s)
    timings["reduce_s"] = time.perf_counter() - start
    timings["total_s"] = sum(timings.values())
    report = {
        "command": "solve",
        "method": cfg.method,
        "k": k,
        "k_hat": khat,
        "s": prob.s,
        "seed": cfg.seed,
        "iterations": len(trace.iterates),
        "x": [float(v) for v in sol.x],
        "support": [int(j) for j in sol.support],
        "objective": sol.objective,
        "exact": sol.exact,
        "certificate": bool(certificate),
        "candidate_count": Z.count(),
        "big_m": rp.M,
        **diag,
        **meta,
    }
    if data is not None:
        report["mse"] = mse(sol.x, data)
    _emit(report, cfg.output)
    _write_trace_csv(cfg.output, trace.iterates)
    _write_timings(cfg.output, timings)
    return report


def cmd_penalized(cfg: RunConfig) -> dict:
    """Penalized pipeline: iterate with the threshold rule, then exact subset solve."""
    if cfg.input is None:
        raise click.UsageError("--input is required")
    if cfg.theta is None:
        raise click.UsageError("--theta is required for the penalized command")
    if _sniff_matrix_format(cfg.input):
        if cfg.eta is None:
            raise click.UsageError("--eta is required with raw matrix input")
        Q, c, A, b = read_qp(cfg.input)
        prob = build_penalized_problem(Q, c, A, b, theta=cfg.theta, eta=cfg.eta)
        data = None
        meta = {"input_kind": "matrix", "eta": prob.eta, "eta_rule": "explicit"}
    else:
        data = load_csv(cfg.input, cfg.target)
        eta = cfg.eta if cfg.eta is not None else default_eta(data)
        base = from_regression(data, s=1, eta=eta)
        prob = build_penalized_problem(base.Q, base.c, theta=cfg.theta, eta=eta)
        meta = {
            "input_kind": "csv",
            "eta": eta,
            "eta_rule": "explicit" if cfg.eta is not None else "sqrt(n_train)",
            "samples": data.samples,
        }

    timings: dict[str, float] = {}
    start = time.perf_counter()
    spectrum = eig_sym(prob.Q)
    k, khat = _resolve_k(spectrum, cfg.k)
    trunc = truncate(spectrum, k)
    timings["spectral_s"] = time.perf_counter() - start

    start = time.perf_counter()
    if cfg.method == "br":
        trace = run_best_response_penalized(trunc, prob, cfg=BRConfig(max_iters=cfg.iters or 40))
        chunk = trace.iterates[trace.cycle_start : trace.cycle_start + trace.cycle_period] if trace.cycle_period else trace.iterates[-(cfg.p_window or 6) :]
        certificate = trace.converged_certificate
        diag = {"cycle_start": trace.cycle_start, "cycle_period": trace.cycle_period}
    else:
        dp_cfg = DPConfig(
            max_iters=cfg.iters or 500, step_a=cfg.step_a or 4e-3, p_window=cfg.p_window or 50
        )
        trace = run_dual_program_penalized(trunc, prob, cfg=dp_cfg)
        chunk = trace.iterates[-(cfg.p_window or 50) :]
        certificate = trace.z_converged
        diag = {"z_converged": trace.z_converged}
    Z = SupportVector.empty(prob.n)
    for it in chunk:
        Z = Z.union(it.z)
    timings["screen_s"] = time.perf_counter() - start

    start = time.perf_counter()
    sol = solve_reduced_penalized(prob, Z)
    timings["reduce_s"] = time.perf_counter() - start
    timings["total_s"] = sum(timings.values())
    report = {
        "command": "penalized",
        "method": cfg.method,
        "k": k,
        "k_hat": khat,
        "theta": prob.theta,
        "seed": cfg.seed,
        "iterations": len(trace.iterates),
        "x": [float(v) for v in sol.x],
        "support": [int(j) for j in sol.support],
        "objective": sol.objective,
        "exact": sol.exact,
        "certificate": bool(certificate),
        "candidate_count": Z.count(),
        **diag,
        **meta,
    }
    if data is not None:
        report["mse"] = mse(sol.x, data)
    _emit(report, cfg.output)
    _write_trace_csv(cfg.output, trace.iterates)
    _write_timings(cfg.output, timings)
    return report


def cmd_bench(cfg: RunConfig, *, n: int, samples: int, rho: float, snr: float, etas, ks, reps: int) -> list[dict]:
    """Synthetic grid: cells are eta values crossed with truncation levels."""
    if cfg.s is None:
        raise click.UsageError("--s is required for bench")
    cells = [GridCell(n=n, samples=samples, s=cfg.s, rho=rho, snr=snr, eta=eta) for eta in etas]
    br_cfg = BRConfig(max_iters=cfg.iters or 40) if cfg.method == "br" else None
    dp_cfg = (
        DPConfig(max_iters=cfg.iters or 500, step_a=cfg.step_a or 4e-3, p_window=cfg.p_window or 50)
        if cfg.method == "dp"
        else None
    )
    rows = run_grid(
        cells,
        cfg.method,
        ks,
        reps,
        master_seed=cfg.seed,
        br_config=br_cfg,
        dp_config=dp_cfg,
        p_window=cfg.p_window,
    )
    if cfg.output:
        write_table(rows, cfg.output, fmt=cfg.fmt, include_timings=False)
        side = _sidecar(cfg.output, ".timings." + cfg.fmt)
        timing_rows = [r for r in rows if r["metric"] == "wall_time"]
        write_table(timing_rows, side, fmt=cfg.fmt, include_timings=True)
    else:
        main_rows = [r for r in rows if r["metric"] != "wall_time"]
        click.echo(json.dumps(_jsonable(main_rows), indent=2))
    return rows


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DataError as exc:
            _fail(3, exc)
        except NumericalError as exc:
            _fail(4, exc)

    return wrapper


def _fail(code: int, exc: Exception) -> None:
    click.echo(
        json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}),
        err=True,
    )
    sys.exit(code)


_shared = [
    click.option("--input", "input_path", type=click.Path(), help="CSV regression data or raw matrix file."),
    click.option("--target", default="-1", show_default=True, help="Target column (name or index) for CSV input."),
    click.option("--output", type=click.Path(), default=None, help="Output path; stdout when omitted."),
    click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True),
    click.option("--seed", type=int, default=0, show_default=True),
]

_method_opts = [
    click.option("--method", type=click.Choice(["br", "dp"]), default="dp", show_default=True),
    click.option("--k", default="auto", show_default=True, help="Truncation level, or 'auto' for k-hat."),
    click.option("--iters", type=int, default=None, help="Iteration budget (default 40 br / 500 dp)."),
    click.option("--step-a", type=float, default=None, help="Subgradient step constant a (dp only)."),
    click.option("--p-window", type=int, default=None, help="Screening window (default 6 br / 50 dp)."),
]


def _apply(options):
    def deco(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn

    return deco


@click.group()
@click.version_option(package_name="pchqp", prog_name="pchqp")
def main():
    """Sparse quadratic programs via spectral truncation and support screening."""


@main.command("spectrum")
@_apply(_shared)
@_handle_errors
def spectrum_command(input_path, target, output, fmt, seed):
    """Eigenvalue decay report for the quadratic form of the input."""
    cfg = RunConfig(command="spectrum", input=input_path, target=target, output=output, fmt=fmt, seed=seed)
    cmd_spectrum(cfg)


@main.command("solve")
@_apply(_shared + _method_opts)
@click.option("--s", type=int, required=True, help="Sparsity budget.")
@click.option("--eta", type=float, default=None, help="Ridge weight (default sqrt(N) for CSV input).")
@_handle_errors
def solve_command(input_path, target, output, fmt, seed, method, k, iters, step_a, p_window, s, eta):
    """Solve the cardinality-constrained program end to end."""
    cfg = RunConfig(
        command="solve", method=method, k=k, s=s, eta=eta, iters=iters, step_a=step_a,
        p_window=p_window, seed=seed, input=input_path, target=target, output=output, fmt=fmt,
    )
    cmd_solve(cfg)


@main.command("screen")
@_apply(_shared + _method_opts)
@click.option("--s", type=int, required=True, help="Sparsity budget.")
@click.option("--eta", type=float, default=None, help="Ridge weight (default sqrt(N) for CSV input).")
@_handle_errors
def screen_command(input_path, target, output, fmt, seed, method, k, iters, step_a, p_window, s, eta):
    """Report the screened candidate index set without the exact solve."""
    cfg = RunConfig(
        command="screen", method=method, k=k, s=s, eta=eta, iters=iters, step_a=step_a,
        p_window=p_window, seed=seed, input=input_path, target=target, output=output, fmt=fmt,
    )
    cmd_screen(cfg)


@main.command("penalized")
@_apply(_shared + _method_opts)
@click.option("--theta", type=float, required=True, help="Per-nonzero sparsity penalty.")
@click.option("--eta", type=float, default=None, help="Ridge weight (default sqrt(N) for CSV input).")
@_handle_errors
def penalized_command(input_path, target, output, fmt, seed, method, k, iters, step_a, p_window, theta, eta):
    """Solve the l0-penalized program end to end."""
    cfg = RunConfig(
        command="penalized", method=method, k=k, theta=theta, eta=eta, iters=iters, step_a=step_a,
        p_window=p_window, seed=seed, input=input_path, target=target, output=output, fmt=fmt,
    )
    cmd_penalized(cfg)


@main.command("bench")
@_apply(_shared + _method_opts)
@click.option("--s", type=int, required=True, help="Sparsity budget and planted support size.")
@click.option("--n", type=int, default=60, show_default=True, help="Feature dimension.")
@click.option("--samples", type=int, default=200, show_default=True, help="Samples per replication.")
@click.option("--rho", type=float, default=0.5, show_default=True, help="AR(1) correlation.")
@click.option("--snr", type=float, default=6.0, show_default=True, help="Signal-to-noise ratio.")
@click.option("--eta", "eta_list", default="1.0", show_default=True, help="Comma-separated eta grid.")
@click.option("--reps", type=int, default=25, show_default=True, help="Replications per cell.")
@_handle_errors
def bench_command(input_path, target, output, fmt, seed, method, k, iters, step_a, p_window, s, n, samples, rho, snr, eta_list, reps):
    """Synthetic benchmark grid over eta values and truncation levels."""
    try:
        etas = [float(v) for v in eta_list.split(",") if v.strip()]
        ks = [int(v) for v in str(k).split(",") if v.strip()] if k != "auto" else None
    except ValueError as exc:
        raise click.UsageError(f"bad numeric list: {exc}") from exc
    if ks is None:
        raise click.UsageError("--k must be an explicit integer list for bench")
    cfg = RunConfig(
        command="bench", method=method, k=str(k), s=s, iters=iters, step_a=step_a,
        p_window=p_window, seed=seed, input=input_path, target=target, output=output, fmt=fmt,
    )
    cmd_bench(cfg, n=n, samples=samples, rho=rho, snr=snr, etas=etas, ks=ks, reps=reps)


if __name__ == "__main__":
    main()
