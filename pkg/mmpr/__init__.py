"""
Multi-model penalized regression: several sparse linear models fitted jointly, with a penalty that keeps them from
selecting the same covariates.
"""

from ._version import __version__
from .constants import CorrelationStructure, InitMethod, OutputFormat, PenaltyPower, Scale, StartPolicy
from .metrics import (
    DiversityReport,
    InclusionTable,
    align_models,
    cosine_similarity,
    diversity_report,
    inclusion_study,
    lasso_cv_lambda,
)
from .model import (
    CoefficientSet,
    Dataset,
    PenaltyConfig,
    StandardizedDesign,
    destandardize,
    objective,
    similarity_penalty,
    sparsity_penalty,
    standardize,
)
from .simulation import SimCase, SimDataset, block_correlation, reference_case, sample, simulation_case
from .solver import SolveControls, SolveResult, conditional_solve, coordinate_update, soft_threshold, solve
from .surfaces import ContourGrid, conditional_surface, penalty_surface, sse_surface
from .tuner import PathRecord, PathResult, PathSpec, fit_path, fit_paths, lambda_grid, lambda_max, tune_omega

__all__ = [
    "CoefficientSet",
    "ContourGrid",
    "CorrelationStructure",
    "Dataset",
    "DiversityReport",
    "InclusionTable",
    "InitMethod",
    "OutputFormat",
    "PathRecord",
    "PathResult",
    "PathSpec",
    "PenaltyConfig",
    "PenaltyPower",
    "Scale",
    "SimCase",
    "SimDataset",
    "SolveControls",
    "SolveResult",
    "StandardizedDesign",
    "StartPolicy",
    "align_models",
    "block_correlation",
    "conditional_solve",
    "conditional_surface",
    "coordinate_update",
    "cosine_similarity",
    "destandardize",
    "diversity_report",
    "fit_path",
    "fit_paths",
    "inclusion_study",
    "lambda_grid",
    "lambda_max",
    "lasso_cv_lambda",
    "objective",
    "penalty_surface",
    "reference_case",
    "sample",
    "similarity_penalty",
    "simulation_case",
    "soft_threshold",
    "solve",
    "sparsity_penalty",
    "sse_surface",
    "standardize",
    "tune_omega",
]
