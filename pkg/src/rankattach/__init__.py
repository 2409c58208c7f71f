"""Random graphs grown by rank-based attachment, with the matching theory."""

from __future__ import annotations

from .estimators import HillEstimator, TailExponentLS
from .generator import ProcessParams, ProcessResult, generate, run_ensemble
from .ranking import SchemeSpec
from .stats import (
    ComparisonReport,
    DegreeHistogram,
    compare_report,
    degree_histogram,
    fit_exponent_hill,
    fit_exponent_ls,
    ks_uniform_test,
)
from .theory import CkTable, integrate_degree_ode, solve_Ck
from .weights import WeightTable, build_weight_table, g_alpha, sample_rank

__version__ = "0.1.0"

__all__ = [
    "CkTable",
    "ComparisonReport",
    "DegreeHistogram",
    "HillEstimator",
    "ProcessParams",
    "ProcessResult",
    "SchemeSpec",
    "TailExponentLS",
    "WeightTable",
    "build_weight_table",
    "compare_report",
    "degree_histogram",
    "fit_exponent_hill",
    "fit_exponent_ls",
    "g_alpha",
    "generate",
    "integrate_degree_ode",
    "ks_uniform_test",
    "run_ensemble",
    "sample_rank",
    "solve_Ck",
]
