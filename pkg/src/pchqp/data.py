"""Synthetic regression benchmarks, CSV ingestion, splits, MSE, and grid running.

Covariates follow a stationary first-order autoregression whose covariance is
``rho^|i-j|`` exactly; noise variance is calibrated from a target
signal-to-noise ratio.  Real data is min-max normalized per column on the full
dataset before splitting, so error scales are comparable across splits.
Replication seeds derive from a master seed through a splittable counter
scheme, keeping grids reproducible under parallel execution.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .best_response import BRConfig, run_best_response, screen_from_trace
from .dual_ascent import DPConfig, run_dual_program, screen_from_dp
from .errors import DataError
from .model import RegressionData, from_regression, objective
from .reduction import make_reduced_problem, solve_reduced
from .spectral import eig_sym, truncate

TABLE_COLUMNS = ["n", "samples", "s", "rho", "snr", "eta", "method", "k", "metric", "mean", "std", "reps"]
TIMING_METRICS = ("wall_time",)


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape of one synthetic regression draw; fully determined by the seed."""

    n: int
    samples: int
    s_true: int
    rho: float
    snr: float
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.s_true <= self.n:
            raise DataError(f"s_true={self.s_true} outside [1, {self.n}]")
        if not 0 <= self.rho < 1:
            raise DataError(f"rho={self.rho} outside [0, 1)")
        if not self.snr > 0:
            raise DataError(f"snr={self.snr} must be positive")
        if self.samples < 1:
            raise DataError(f"samples={self.samples} must be >= 1")


@dataclass(frozen=True)
class Dataset:
    """Train/test pair, optionally with the planted coefficients and column ranges.

    ``normalization`` holds per-column (min, max) pairs with the target as the
    last row; ``None`` means the data was not rescaled.
    """

    train: RegressionData
    test: RegressionData
    x_true: np.ndarray | None = None
    normalization: np.ndarray | None = None

    def __post_init__(self):
        if self.train.n != self.test.n:
            raise DataError("train and test column counts differ")


def ar1_covariance(n: int, rho: float) -> np.ndarray:
    """The covariance ``rho^|i-j|`` implied by the sampling recursion."""
    idx = np.arange(n)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def _ar1_samples(rng: np.random.Generator, count: int, n: int, rho: float) -> np.ndarray:
    # One O(n) recursion per sample gives the rho^|i-j| kernel exactly:
    # w_1 = g_1, w_j = rho w_{j-1} + sqrt(1 - rho^2) g_j.
    G = rng.standard_normal((count, n))
    W = np.empty_like(G)
    W[:, 0] = G[:, 0]
    scale = np.sqrt(1.0 - rho**2)
    for j in range(1, n):
        W[:, j] = rho * W[:, j - 1] + scale * G[:, j]
    return W


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Draw a planted sparse linear model with AR(1) covariates and calibrated noise.

    The planted vector has ``s_true`` entries of +-1 at uniformly chosen
    positions, noise variance equals the signal variance
    ``x_true^T Sigma x_true`` divided by the requested SNR, and the test half
    is an independent draw of the same size.
    """
    rng = np.random.default_rng(spec.seed)
    x_true = np.zeros(spec.n)
    idx = rng.choice(spec.n, size=spec.s_true, replace=False)
    x_true[idx] = rng.choice([-1.0, 1.0], size=spec.s_true)
    sigma = ar1_covariance(spec.n, spec.rho)
    noise_var = float(x_true @ sigma @ x_true) / spec.snr

    def draw() -> RegressionData:
        W = _ar1_samples(rng, spec.samples, spec.n, spec.rho)
        eps = rng.normal(0.0, np.sqrt(noise_var), size=spec.samples)
        return RegressionData(W, W @ x_true + eps)

    return Dataset(train=draw(), test=draw(), x_true=x_true, normalization=None)


def load_csv(path, target_column) -> RegressionData:
    """Read a numeric CSV (optional single header row) into regression data.

    The header is detected by a non-numeric first row.  ``target_column`` is a
    column name (requires a header) or a zero-based index; remaining columns
    become features.  Missing or non-numeric cells are rejected with their
    location.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty file")

    header: list[str] | None = None
    try:
        [float(cell) for cell in rows[0]]
    except ValueError:
        header = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")

    width = len(rows[0])
    matrix = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}: row {i + 1} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            cell = cell.strip()
            if not cell:
                raise DataError(f"{path}: missing value at row {i + 1}, column {j + 1}")
            try:
                matrix[i, j] = float(cell)
            except ValueError as exc:
                raise DataError(
                    f"{path}: non-numeric value {cell!r} at row {i + 1}, column {j + 1}"
                ) from exc

    if isinstance(target_column, str) and not target_column.lstrip("-").isdigit():
        if header is None:
            raise DataError(f"{path}: target column given by name {target_column!r} but no header row")
        try:
            t = header.index(target_column)
        except ValueError as exc:
            raise DataError(f"{path}: no column named {target_column!r} in header {header}") from exc
    else:
        t = int(target_column)
        if not -width <= t < width:
            raise DataError(f"{path}: target column index {t} out of range for {width} columns")
        t %= width
    if width < 2:
        raise DataError(f"{path}: need at least one feature column besides the target")
    keep = [j for j in range(width) if j != t]
    return RegressionData(matrix[:, keep], matrix[:, t])


def split_normalize(data: RegressionData, train_fraction: float, seed: int) -> Dataset:
    """Min-max normalize every column (target included) to [0, 1], then split.

    Normalization statistics come from the full dataset before splitting;
    constant columns map to zero.  The train size is the floor of
    ``train_fraction * N``; both halves must be nonempty.
    """
    if not 0 < train_fraction < 1:
        raise DataError(f"train_fraction={train_fraction} outside (0, 1)")
    if data.samples < 2:
        raise DataError("need at least two samples to split")
    full = np.column_stack([data.features, data.targets])
    lo = full.min(axis=0)
    hi = full.max(axis=0)
    span = hi - lo
    scaled = np.where(span > 0, (full - lo) / np.where(span > 0, span, 1.0), 0.0)
    n_train = int(np.floor(train_fraction * data.samples))
    if n_train < 1 or n_train >= data.samples:
        raise DataError(
            f"train_fraction={train_fraction} leaves an empty split for N={data.samples}"
        )
    perm = np.random.default_rng(seed).permutation(data.samples)
    tr, te = perm[:n_train], perm[n_train:]
    return Dataset(
        train=RegressionData(scaled[tr, :-1], scaled[tr, -1]),
        test=RegressionData(scaled[te, :-1], scaled[te, -1]),
        x_true=None,
        normalization=np.column_stack([lo, hi]),
    )


def mse(x, data: RegressionData) -> float:
    """Mean squared prediction error of the coefficient vector on the data."""
    x = np.ravel(np.asarray(x, dtype=np.float64))
    if x.shape[0] != data.n:
        raise DataError(f"x must have length {data.n}, got {x.shape[0]}")
    resid = data.targets - data.features @ x
    return float(resid @ resid) / data.samples


def default_eta(data: RegressionData) -> float:
    """Ridge weight rule for real data: the square root of the training size."""
    return float(np.sqrt(data.samples))


@dataclass(frozen=True)
class GridCell:
    """One experiment cell: synthetic data shape plus the ridge weight eta."""

    n: int
    samples: int
    s: int
    rho: float
    snr: float
    eta: float


def _replication_seed(master_seed: int, cell_idx: int, level_idx: int, rep: int) -> int:
    ss = np.random.SeedSequence([master_seed, cell_idx, level_idx, rep])
    return int(ss.generate_state(1)[0])


def _run_replication(
    cell: GridCell,
    k: int,
    method: str,
    seed: int,
    br_cfg: BRConfig,
    dp_cfg: DPConfig,
    p_window: int | None,
) -> dict[str, float]:
    ds = generate_synthetic(
        SyntheticSpec(n=cell.n, samples=cell.samples, s_true=cell.s, rho=cell.rho, snr=cell.snr, seed=seed)
    )
    prob = from_regression(ds.train, s=cell.s, eta=cell.eta)
    start = time.perf_counter()
    trunc = truncate(eig_sym(prob.Q), k)
    if method == "br":
        trace = run_best_response(trunc, prob, cfg=br_cfg)
        Z = screen_from_trace(trace, p_window or 6)
    elif method == "dp":
        trace = run_dual_program(trunc, prob, cfg=dp_cfg)
        Z = screen_from_dp(trace, p_window or 50)
    else:
        raise DataError(f"unknown method {method!r}, expected 'br' or 'dp'")
    sol = solve_reduced(make_reduced_problem(prob, Z, trace.iterates[-1].z), prob.s)
    wall = time.perf_counter() - start
    return {
        "support_size": float(Z.count()),
        "mse": mse(sol.x, ds.train),
        "objective": objective(prob, sol.x),
        "wall_time": wall,
    }


def run_grid(
    cells,
    method: str,
    levels,
    replications: int,
    master_seed: int = 0,
    br_config: BRConfig | None = None,
    dp_config: DPConfig | None = None,
    p_window: int | None = None,
    threads: int | None = None,
) -> list[dict]:
    """Run the screening pipeline over cells x truncation levels, aggregated per cell.

    Returns long-format rows (one per cell/level/metric) with mean, sample
    standard deviation and replication count.  Per-replication errors are
    recorded as an ``error`` metric rather than aborting the grid.
    ``threads`` (default: the PCH_THREADS environment variable, else serial)
    caps parallel replication execution; results are reduced in replication
    order so the table is identical either way.
    """
    if replications < 1:
        raise DataError(f"replications={replications} must be >= 1")
    br_cfg = br_config or BRConfig()
    dp_cfg = dp_config or DPConfig()
    if threads is None:
        threads = max(1, int(os.environ.get("PCH_THREADS", "1")))

    rows: list[dict] = []
    for ci, cell in enumerate(cells):
        for li, k in enumerate(levels):
            def one(rep: int, _cell=cell, _k=k, _ci=ci, _li=li):
                seed = _replication_seed(master_seed, _ci, _li, rep)
                try:
                    return _run_replication(_cell, _k, method, seed, br_cfg, dp_cfg, p_window)
                except Exception as exc:  # noqa: BLE001 - per-cell errors are data, not fatal
                    return {"error": 1.0, "error_message": f"{type(exc).__name__}: {exc}"}

            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    results = list(pool.map(one, range(replications)))
            else:
                results = [one(rep) for rep in range(replications)]

            metrics = sorted({key for r in results for key in r if key != "error_message"})
            for metric in metrics:
                vals = np.array([r[metric] for r in results if metric in r], dtype=float)
                rows.append(
                    {
                        "n": cell.n,
                        "samples": cell.samples,
                        "s": cell.s,
                        "rho": cell.rho,
                        "snr": cell.snr,
                        "eta": cell.eta,
                        "method": method,
                        "k": k,
                        "metric": metric,
                        "mean": float(vals.mean()),
                        "std": float(vals.std(ddof=1)) if vals.size > 1 else 0.0,
                        "reps": int(vals.size),
                    }
                )
    return rows


def write_table(rows: list[dict], path, fmt: str = "csv", include_timings: bool = True) -> None:
    """Serialize grid rows as CSV with fixed column order, or as the JSON mirror."""
    if not include_timings:
        rows = [r for r in rows if r["metric"] not in TIMING_METRICS]
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=TABLE_COLUMNS, extrasaction="ignore")
            writer.writeheader()
            writer.writerows(rows)
    elif fmt == "json":
        payload = [{col: r.get(col) for col in TABLE_COLUMNS} for r in rows]
        path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    else:
        raise DataError(f"unknown table format {fmt!r}, expected 'csv' or 'json'")


def read_table(path, fmt: str | None = None) -> list[dict]:
    """Parse a table written by :func:`write_table` back into rows."""
    path = Path(path)
    if fmt is None:
        fmt = "json" if path.suffix == ".json" else "csv"
    if fmt == "json":
        return json.loads(path.read_text(encoding="utf-8"))
    with path.open(newline="", encoding="utf-8") as fh:
        out = []
        for row in csv.DictReader(fh):
            parsed: dict = {}
            for col in TABLE_COLUMNS:
                val = row[col]
                if col in ("n", "samples", "s", "k", "reps"):
                    parsed[col] = int(val)
                elif col in ("rho", "snr", "eta", "mean", "std"):
                    parsed[col] = float(val)
                else:
                    parsed[col] = val
            out.append(parsed)
        return out
