# ##### BEGIN GPL LICENSE BLOCK #####
#
# Copyright (C) 2026  The mmpr developers
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.
#
# ##### END GPL LICENSE BLOCK #####
"""
Diagnostics of a set of fitted models: how different the models are, how well each one fits, and how often each
covariate is selected over replicate datasets.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Any, Callable, Collection, Sequence

import numpy as np
import numpy.typing as npt
from sklearn.model_selection import KFold

from .constants import PenaltyPower, Scale, StartPolicy
from .errors import DimensionMismatchError, InvalidConfigError, ScaleMismatchError
from .model import CoefficientSet, FloatArray, PenaltyConfig, StandardizedDesign, destandardize, model_sse, standardize
from .similarity import cosine_similarity, max_pairwise_similarity, similarity_matrix
from .simulation import SimCase, sample
from .solver import SolveControls, solve
from .tuner import PathSpec, lambda_grid, tune_omega

__all__ = [
    "DiversityReport",
    "InclusionTable",
    "align_models",
    "alignment_order",
    "cosine_similarity",
    "diversity_report",
    "inclusion_study",
    "lasso_cv_lambda",
    "max_pairwise_similarity",
    "similarity_matrix",
]

LambdaRule = Callable[[StandardizedDesign], float]

DEFAULT_ZERO_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DiversityReport:
    """
    Parameters
    ----------
    coef_similarity: np.ndarray
        The M×M cosine similarities of the absolute coefficient vectors
    pred_correlation: np.ndarray
        The M×M Pearson correlations of the fitted values. Entries involving a constant fit are 0.
    per_model_mse: np.ndarray
        The mean squared error of every model
    per_model_sse: np.ndarray
        The sum of squared errors of every model
    """

    coef_similarity: FloatArray
    pred_correlation: FloatArray
    per_model_mse: FloatArray
    per_model_sse: FloatArray

    @property
    def models(self) -> int:
        """The number of models M"""
        return self.per_model_sse.shape[0]


def _check_coefficients(design: StandardizedDesign, coef: CoefficientSet) -> None:
    if coef.scale is not Scale.STANDARDIZED:
        raise ScaleMismatchError("Diagnostics are computed on the standardized scale")
    if coef.n_covariates != design.n_covariates:
        raise DimensionMismatchError(
            f"Coefficients have {coef.n_covariates} covariates, the design has {design.n_covariates}"
        )


def diversity_report(
    design: StandardizedDesign, coef: CoefficientSet, exclude: Collection[int] = ()
) -> DiversityReport:
    """
    Compare the models of a fit with each other.

    Parameters
    ----------
    design: StandardizedDesign
        The design the coefficients were fitted on
    coef: CoefficientSet
        The coefficients on the standardized scale
    exclude: collection of int
        Covariates left out of the coefficient similarity, typically the shared ones

    Returns
    -------
    DiversityReport
        The similarity and correlation matrices and the per-model errors

    Raises
    ------
    DimensionMismatchError
        If the coefficients do not have one column per covariate.
    """
    _check_coefficients(design, coef)
    fitted = coef.beta @ design.Xs.T
    with np.errstate(invalid="ignore", divide="ignore"):
        correlation = np.atleast_2d(np.corrcoef(fitted))
    correlation = np.clip(np.nan_to_num(correlation, nan=0.0), -1.0, 1.0)
    sse = model_sse(design, coef.beta)
    return DiversityReport(
        coef_similarity=similarity_matrix(coef, exclude),
        pred_correlation=correlation,
        per_model_mse=sse / design.n_samples,
        per_model_sse=sse,
    )


def alignment_order(design: StandardizedDesign, coef: CoefficientSet) -> npt.NDArray[np.intp]:
    """
    The canonical order of the models of a fit: descending L2 norm of the coefficients, then descending explained
    sum of squares, then the original index. The objective does not depend on the model labels, this order makes them
    comparable across datasets.

    Returns
    -------
    np.ndarray
        The model indices in canonical order
    """
    _check_coefficients(design, coef)
    norms = np.linalg.norm(coef.beta, axis=1)
    explained = design.yty - model_sse(design, coef.beta)
    # lexsort sorts by the last key first
    return np.lexsort((np.arange(coef.models), -explained, -norms))


def align_models(design: StandardizedDesign, coef: CoefficientSet) -> CoefficientSet:
    """Relabel the models of a fit in canonical order, see :func:`alignment_order`"""
    return coef.permuted(alignment_order(design, coef))


@dataclass(frozen=True, eq=False)
class InclusionTable:  # pylint: disable=too-many-instance-attributes
    """
    Selection frequencies over replicate datasets.

    Parameters
    ----------
    proportions: np.ndarray
        The M×p fraction of replicates in which the aligned model selects the covariate
    any_model: np.ndarray
        The fraction of replicates in which at least one model selects the covariate. Does not depend on the alignment.
    replicates: int
        The number of replicates
    zero_tol: float
        Coefficients with a magnitude up to this value count as not selected
    names: tuple of str
        The covariate labels
    lambdas: tuple of float
        The sparsity weight used for every replicate
    omegas: tuple of float
        The tuned similarity weight of every replicate
    omega_capped: tuple of bool
        Whether the similarity ceiling could not be met in a replicate
    fits: tuple of CoefficientSet
        The aligned coefficients of every replicate on the standardized scale
    """

    proportions: FloatArray
    any_model: FloatArray
    replicates: int
    zero_tol: float
    names: tuple[str, ...]
    lambdas: tuple[float, ...] = ()
    omegas: tuple[float, ...] = ()
    omega_capped: tuple[bool, ...] = ()
    fits: tuple[CoefficientSet, ...] = ()

    @classmethod
    def from_fits(
        cls, fits: Sequence[CoefficientSet], names: Sequence[str], zero_tol: float = DEFAULT_ZERO_TOL, **kwargs: Any
    ) -> InclusionTable:
        """
        Tabulate already aligned fits.

        Parameters
        ----------
        fits: sequence of CoefficientSet
            One aligned fit per replicate, all of the same shape
        names: sequence of str
            The covariate labels
        zero_tol: float
            The selection threshold
        kwargs
            The optional replicate details of the table

        Returns
        -------
        InclusionTable
            The selection frequencies
        """
        if not fits:
            raise InvalidConfigError("At least one replicate is required")
        shapes = {fit.beta.shape for fit in fits}
        if len(shapes) != 1:
            raise DimensionMismatchError(f"All replicates must have the same shape, got {sorted(shapes)}")
        supports = np.stack([fit.support(zero_tol) for fit in fits])
        return cls(
            proportions=supports.mean(axis=0),
            any_model=supports.any(axis=1).mean(axis=0),
            replicates=len(fits),
            zero_tol=zero_tol,
            names=tuple(names),
            fits=tuple(fits),
            **kwargs,
        )


def _fold_lambda(lambda_: float, n_train: int, n_samples: int) -> float:
    # The training columns are rescaled to unit norm, which inflates the coefficients by sqrt(n / n_train)
    return lambda_ * np.sqrt(n_train / n_samples)


def lasso_cv_lambda(
    design: StandardizedDesign,
    folds: int = 10,
    seed: int = 0,
    grid: Sequence[float] | None = None,
    splits: Sequence[tuple[npt.ArrayLike, npt.ArrayLike]] | None = None,
) -> float:
    """
    Select the sparsity weight of a single LASSO model by k-fold cross validation. Every training fold is
    standardized on its own and fitted along the grid with warm starts, the squared prediction errors of the held-out
    rows are summed over all folds.

    Parameters
    ----------
    design: StandardizedDesign
        The standardized design
    folds: int
        The number of folds
    seed: int
        The seed of the fold assignment
    grid: sequence of float, optional
        The candidate values in descending order. Defaults to the grid of a path.
    splits: sequence of tuple, optional
        Explicit (train, test) row index pairs, replacing the seeded fold assignment

    Returns
    -------
    float
        The grid value with the smallest cross-validated error. Ties go to the larger value.
    """
    if splits is None:
        if not 2 <= folds <= design.n_samples:
            raise InvalidConfigError(f"Need 2 <= folds <= n = {design.n_samples}, got {folds}")
        splits = list(KFold(n_splits=folds, shuffle=True, random_state=seed).split(design.Xs))
    if grid is None:
        grid = lambda_grid(design, PathSpec(models=1, c=PenaltyPower.ABSOLUTE, d=PenaltyPower.ABSOLUTE))
    grid = np.asarray(grid, dtype=np.float64)
    logger = logging.getLogger(__name__)

    errors = np.zeros(grid.size)
    for train, test in splits:
        train, test = np.asarray(train), np.asarray(test)
        fold = standardize(design.subset(train))
        warm: CoefficientSet | None = None
        for index, lambda_ in enumerate(grid):
            fold_lambda = _fold_lambda(lambda_, train.size, design.n_samples)
            cfg = PenaltyConfig(models=1, c=PenaltyPower.ABSOLUTE, lambda_=fold_lambda)
            result = solve(fold, cfg, SolveControls(policies=(StartPolicy.ZEROS,)).with_warm(warm))
            warm = result.coef
            raw = destandardize(result.coef, fold)
            residuals = design.ys[test] - (raw.intercepts[0] + design.Xs[test] @ raw.coef.beta[0])
            errors[index] += float(residuals @ residuals)
    errors /= design.n_samples
    best = int(np.argmin(errors))
    logger.info(
        "Cross validation selected lambda=%(lambda_).6g (grid index %(index)i of %(size)i), error %(error).6g",
        {"lambda_": grid[best], "index": best, "size": grid.size, "error": errors[best]},
    )
    return float(grid[best])


def inclusion_study(  # pylint: disable=too-many-arguments
    case: SimCase,
    replicates: int,
    seed: int | None = None,
    spec: PathSpec | None = None,
    lambda_rule: LambdaRule | None = None,
    folds: int = 10,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> InclusionTable:
    """
    Fit multiple models to replicate datasets of a simulation case and count how often every covariate is selected.
    Replicate r is drawn with the seed `seed + r`. The sparsity weight of every replicate is chosen by `lambda_rule`,
    the similarity weight is tuned to the ceiling of `spec`.

    Parameters
    ----------
    case: SimCase
        The simulation settings. Its seed is replaced by the replicate seed.
    replicates: int
        The number of datasets
    seed: int, optional
        The base seed. Defaults to the seed of `case`.
    spec: PathSpec, optional
        The number of models, the penalty powers, the similarity ceiling and the solver starts. Defaults to three
        models with c = d = 1.
    lambda_rule: Callable, optional
        Maps a standardized design to the sparsity weight. Defaults to cross-validated single-model LASSO.
    folds: int
        The number of folds of the default rule
    zero_tol: float
        Coefficients with a magnitude up to this value count as not selected

    Returns
    -------
    InclusionTable
        The selection frequencies of the aligned models
    """
    if replicates < 1:
        raise InvalidConfigError(f"At least one replicate is required, got {replicates}")
    base_seed = case.seed if seed is None else seed
    spec = PathSpec() if spec is None else spec
    logger = logging.getLogger(__name__)

    fits, lambdas, omegas, capped = [], [], [], []
    for replicate in range(replicates):
        replicate_seed = base_seed + replicate
        simulated = sample(replace(case, seed=replicate_seed))
        design = standardize(simulated.dataset)
        if lambda_rule is None:
            lambda_ = lasso_cv_lambda(design, folds=folds, seed=replicate_seed)
        else:
            lambda_ = float(lambda_rule(design))
        fit = tune_omega(design, spec.penalty_config(), lambda_, spec)
        aligned = align_models(design, fit.result.coef)
        logger.info(
            "Replicate %(replicate)i (seed %(seed)i): lambda=%(lambda_).6g omega=%(omega).6g "
            "similarity %(similarity).4f",
            {
                "replicate": replicate,
                "seed": replicate_seed,
                "lambda_": lambda_,
                "omega": fit.omega,
                "similarity": fit.similarity,
            },
        )
        fits.append(aligned)
        lambdas.append(lambda_)
        omegas.append(fit.omega)
        capped.append(fit.omega_capped)

    return InclusionTable.from_fits(
        fits,
        names=tuple(f"x{k + 1}" for k in range(case.n_covariates)),
        zero_tol=zero_tol,
        lambdas=tuple(lambdas),
        omegas=tuple(omegas),
        omega_capped=tuple(capped),
    )
