"""Sparse convex quadratic programs via spectral truncation and support screening.

The pipeline: eigendecompose the quadratic form, keep the k leading
components, screen candidate supports with either alternating best response
or dual subgradient ascent, and finish with an exact enumeration solve over
the screened candidates.
"""

from .best_response import (
    BRConfig,
    BRTrace,
    best_response,
    br_constrained,
    br_unconstrained,
    initial_support,
    run_best_response,
    screen_from_trace,
)
from .data import (
    Dataset,
    GridCell,
    SyntheticSpec,
    ar1_covariance,
    default_eta,
    generate_synthetic,
    load_csv,
    mse,
    read_table,
    run_grid,
    split_normalize,
    write_table,
)
from .dual_ascent import DPConfig, DPTrace, dp_step, eval_f, run_dual_program, screen_from_dp
from .errors import DataError, NumericalError
from .minmax import (
    DualPoint,
    Iterate,
    SupportVector,
    eval_H,
    eval_L,
    gamma,
    primal_value_k,
    select_support,
    select_support_penalized,
)
from .model import (
    PenalizedQP,
    RegressionData,
    SparseQP,
    build_penalized_problem,
    build_problem,
    feasible,
    from_regression,
    objective,
    penalized_objective,
)
from .penalized import (
    PenalizedTrace,
    eval_f_penalized,
    run_best_response_penalized,
    run_dual_program_penalized,
    solve_reduced_penalized,
)
from .qpfile import read_qp, write_qp
from .reduction import (
    ReducedProblem,
    SparseSolution,
    compute_big_m,
    make_reduced_problem,
    restricted_qp,
    solve_exact,
    solve_reduced,
)
from .spectral import SpectralTruncation, Spectrum, eig_sym, frobenius_error, k_hat, truncate

__version__ = "0.1.0"

__all__ = [
    "BRConfig",
    "BRTrace",
    "DPConfig",
    "DPTrace",
    "DataError",
    "Dataset",
    "DualPoint",
    "GridCell",
    "Iterate",
    "NumericalError",
    "PenalizedQP",
    "PenalizedTrace",
    "ReducedProblem",
    "RegressionData",
    "SparseQP",
    "SparseSolution",
    "SpectralTruncation",
    "Spectrum",
    "SupportVector",
    "SyntheticSpec",
    "ar1_covariance",
    "best_response",
    "br_constrained",
    "br_unconstrained",
    "build_penalized_problem",
    "build_problem",
    "compute_big_m",
    "default_eta",
    "dp_step",
    "eig_sym",
    "eval_H",
    "eval_L",
    "eval_f",
    "eval_f_penalized",
    "feasible",
    "frobenius_error",
    "from_regression",
    "gamma",
    "generate_synthetic",
    "initial_support",
    "k_hat",
    "load_csv",
    "make_reduced_problem",
    "mse",
    "objective",
    "penalized_objective",
    "primal_value_k",
    "read_qp",
    "read_table",
    "restricted_qp",
    "run_best_response",
    "run_best_response_penalized",
    "run_dual_program",
    "run_dual_program_penalized",
    "run_grid",
    "screen_from_dp",
    "screen_from_trace",
    "select_support",
    "select_support_penalized",
    "solve_exact",
    "solve_reduced",
    "solve_reduced_penalized",
    "split_normalize",
    "truncate",
    "write_qp",
    "write_table",
]
