"""Noiseless adaptive group testing with an unknown infection count.

Library and CLI for the diagonal splitting strategy, its likelihood-driven
hybrid, the classical binary-splitting baselines, the matching closed-form
analytics, and a reproducible experiment harness.
"""

from .algorithms import (
    ALGORITHM_NAMES,
    AlgorithmConfig,
    RunResult,
    run,
    run_bsa,
    run_dsa,
    run_hgbsa,
    run_hybrid,
)
from .analytics import (
    appendix_sum_identity,
    appendix_upper_bound,
    bsa_bound,
    corollary_k1,
    corollary_kn,
    counting_bound,
    expected_tests_dsa,
    hgbsa_bound,
    positive_prob,
    upper_bound_report,
)
from .core import (
    Combinatorial,
    Diagnosis,
    InfectionInstance,
    InfectionModel,
    ParameterError,
    Pool,
    Probabilistic,
    TestLedger,
    derive_seed,
    evaluate_pool,
    generate_instance,
    submit_batch,
)
from .likelihood import (
    LikelihoodColumn,
    allocate_estimate,
    brute_force_occurrence,
    estimate_k,
    likelihood_column,
    occurrence_count,
    write_matrix_csv,
)
from .sim import AggregateRow, SweepSpec, parse_sweep_spec, render_chart, run_sweep, write_csv
from .tree import DiagonalLayout, SubtreeRef, children_layouts, diagonal_layout

__version__ = "0.1.0"

__all__ = [
    "ALGORITHM_NAMES",
    "AggregateRow",
    "AlgorithmConfig",
    "Combinatorial",
    "Diagnosis",
    "DiagonalLayout",
    "InfectionInstance",
    "InfectionModel",
    "LikelihoodColumn",
    "ParameterError",
    "Pool",
    "Probabilistic",
    "RunResult",
    "SubtreeRef",
    "SweepSpec",
    "TestLedger",
    "allocate_estimate",
    "appendix_sum_identity",
    "appendix_upper_bound",
    "brute_force_occurrence",
    "bsa_bound",
    "children_layouts",
    "corollary_k1",
    "corollary_kn",
    "counting_bound",
    "derive_seed",
    "diagonal_layout",
    "estimate_k",
    "evaluate_pool",
    "expected_tests_dsa",
    "generate_instance",
    "hgbsa_bound",
    "likelihood_column",
    "occurrence_count",
    "parse_sweep_spec",
    "positive_prob",
    "render_chart",
    "run",
    "run_bsa",
    "run_dsa",
    "run_hgbsa",
    "run_hybrid",
    "run_sweep",
    "submit_batch",
    "upper_bound_report",
    "write_csv",
    "write_matrix_csv",
]
