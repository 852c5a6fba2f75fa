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
Regularization paths. For every value of the sparsity weight lambda, the similarity weight omega is tuned to the
smallest value that keeps the models at most `rho_thresh` similar.
"""
from __future__ import annotations

import logging
import sys
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .constants import PenaltyPower, StartPolicy
from .errors import InvalidConfigError
from .model import CoefficientSet, FloatArray, PenaltyConfig, StandardizedDesign, model_sse
from .similarity import max_pairwise_similarity
from .solver import SolveControls, SolveResult, solve

if sys.version_info < (3, 11):
    from typing_extensions import Self
else:
    from typing import Self

# Smallest omega tried when searching below the first admissible value
_OMEGA_FLOOR = 1e-12


@dataclass(frozen=True)
class PathSpec:  # pylint: disable=too-many-instance-attributes
    """
    Everything needed to compute a regularization path.

    Parameters
    ----------
    models: int
        The number of models M
    c: PenaltyPower or int
        The sparsity power
    d: PenaltyPower or int
        The similarity power
    lambda_grid: tuple of float, optional
        A strictly descending grid of positive sparsity weights. By default `n_lambda` log-spaced values from
        `lambda_max` down to `lambda_ratio * lambda_max`.
    n_lambda: int
        The size of the default grid
    lambda_ratio: float
        The ratio between the smallest and the largest value of the default grid
    rho_thresh: float
        The ceiling on the pairwise cosine similarity of the absolute coefficient vectors
    omega_max: float
        The largest similarity weight tried
    omega_tol: float
        The relative width of the final omega bracket
    omega_start: float
        The first non-zero similarity weight tried, doubled until the ceiling holds
    eps: float
        The convergence tolerance of the solver
    max_sweeps: int
        The sweep limit of the solver
    shared: frozenset of int
        Covariates exempt from the similarity penalty
    controls: SolveControls
        The starts tried at every fit. A warm start from the previous lambda is added automatically.
    """

    models: int = 3
    c: PenaltyPower = PenaltyPower.ABSOLUTE
    d: PenaltyPower = PenaltyPower.ABSOLUTE
    lambda_grid: tuple[float, ...] | None = None
    n_lambda: int = 50
    lambda_ratio: float = 1e-3
    rho_thresh: float = 0.3
    omega_max: float = 1e6
    omega_tol: float = 1e-2
    omega_start: float = 1e-4
    eps: float = 1e-6
    max_sweeps: int = 10000
    shared: frozenset[int] = field(default_factory=frozenset)
    controls: SolveControls = field(default_factory=SolveControls)

    def __post_init__(self) -> None:
        # Validates models, c, d, eps, max_sweeps and shared
        cfg = self.penalty_config()
        object.__setattr__(self, "c", cfg.c)
        object.__setattr__(self, "d", cfg.d)
        object.__setattr__(self, "shared", cfg.shared)
        if self.lambda_grid is not None:
            grid = np.asarray(self.lambda_grid, dtype=np.float64)
            if grid.ndim != 1 or grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) >= 0):
                raise InvalidConfigError("The lambda grid must be non-empty, positive and strictly descending")
            object.__setattr__(self, "lambda_grid", tuple(float(value) for value in grid))
        if self.n_lambda < 1:
            raise InvalidConfigError(f"The grid needs at least one point, got {self.n_lambda}")
        if not 0 < self.lambda_ratio <= 1:
            raise InvalidConfigError(f"lambda_ratio must be in (0, 1], got {self.lambda_ratio}")
        if not 0 <= self.rho_thresh <= 1:
            raise InvalidConfigError(f"rho_thresh must be in [0, 1], got {self.rho_thresh}")
        if self.omega_tol <= 0:
            raise InvalidConfigError(f"omega_tol must be positive, got {self.omega_tol}")
        if not 0 < self.omega_start <= self.omega_max:
            raise InvalidConfigError(
                f"Need 0 < omega_start <= omega_max, got omega_start={self.omega_start}, omega_max={self.omega_max}"
            )

    def penalty_config(self, lambda_: float = 0.0, omega: float = 0.0) -> PenaltyConfig:
        """The penalty config of a single fit on this path"""
        return PenaltyConfig(
            models=self.models,
            c=self.c,
            d=self.d,
            lambda_=lambda_,
            omega=omega,
            eps=self.eps,
            max_sweeps=self.max_sweeps,
            shared=self.shared,
        )

    def with_models(self, models: int) -> Self:
        """Return a copy for a different number of models"""
        return replace(self, models=models)


@dataclass(frozen=True, eq=False)
class OmegaFit:
    """The outcome of the omega search at a single lambda"""

    omega: float
    result: SolveResult
    similarity: float
    omega_capped: bool
    monotone_violation: bool
    evaluations: int


@dataclass(frozen=True, eq=False)
class PathRecord:  # pylint: disable=too-many-instance-attributes
    """A single point of a regularization path"""

    lambda_: float
    omega: float
    coef: CoefficientSet
    max_pairwise_similarity: float
    per_model_sse: FloatArray
    per_model_mse: FloatArray
    objective: float
    converged: bool
    omega_capped: bool
    monotone_violation: bool
    evaluations: int


@dataclass(frozen=True, eq=False)
class PathResult:
    """The records of a regularization path, ordered from the largest to the smallest lambda"""

    records: tuple[PathRecord, ...]
    spec: PathSpec
    names: tuple[str, ...]

    @property
    def lambdas(self) -> FloatArray:
        """The lambda values of the records"""
        return np.array([record.lambda_ for record in self.records])

    def coefficients(self) -> FloatArray:
        """
        Returns
        -------
        np.ndarray
            The coefficients of all records as an array of shape (records, M, p)
        """
        return np.stack([record.coef.beta for record in self.records])


def lambda_max(design: StandardizedDesign, c: PenaltyPower | int = PenaltyPower.ABSOLUTE) -> float:
    """
    The smallest lambda for which zero is a fixed point of every coordinate update at omega = 0. For c = 2 the same
    value only anchors the grid, a ridge penalty never produces exact zeros.

    Parameters
    ----------
    design: StandardizedDesign
        The standardized design
    c: PenaltyPower or int
        The sparsity power

    Returns
    -------
    float
        2 * max_k |x_kᵀ ys|
    """
    PenaltyPower(c)
    return float(2.0 * np.abs(design.xty).max())


def lambda_grid(design: StandardizedDesign, spec: PathSpec) -> tuple[float, ...]:
    """
    Returns
    -------
    tuple of float
        The grid of `spec`, or the default log-spaced grid below `lambda_max`
    """
    if spec.lambda_grid is not None:
        return spec.lambda_grid
    largest = lambda_max(design, spec.c)
    if largest <= 0:
        raise InvalidConfigError("The response is orthogonal to all covariates, there is no lambda grid to build")
    return tuple(float(value) for value in np.geomspace(largest, largest * spec.lambda_ratio, spec.n_lambda))


class _OmegaSearch:
    """
    Geometric bracketing followed by bisection for the smallest omega that satisfies the similarity ceiling.
    Similarity is not guaranteed to decrease with omega, so the result is checked by one extra fit below it.
    """

    def __init__(
        self, design: StandardizedDesign, cfg: PenaltyConfig, spec: PathSpec, controls: SolveControls
    ) -> None:
        self.__design = design
        self.__cfg = cfg
        self.__spec = spec
        self.__controls = controls
        self.__logger = logging.getLogger(__name__)
        self.evaluations = 0

    def evaluate(self, omega: float) -> tuple[SolveResult, float]:
        """Fit at `omega` and return the result with its maximum pairwise similarity"""
        self.evaluations += 1
        result = solve(self.__design, self.__cfg.with_omega(omega), self.__controls)
        similarity = max_pairwise_similarity(result.coef, self.__cfg.shared)
        self.__logger.debug(
            "lambda=%(lambda_).6g omega=%(omega).6g: similarity %(similarity).4f",
            {"lambda_": self.__cfg.lambda_, "omega": omega, "similarity": similarity},
        )
        return result, similarity

    def __satisfied(self, similarity: float) -> bool:
        return similarity <= self.__spec.rho_thresh

    def __descend(
        self, upper: float, result: SolveResult, similarity: float
    ) -> tuple[float, float, SolveResult, float]:
        """
        Halve an admissible omega until the ceiling fails. Returns the failing omega, or 0 if the floor is reached
        first, followed by the smallest admissible omega and its fit.
        """
        omega = 0.5 * upper
        while omega >= _OMEGA_FLOOR:
            candidate, candidate_similarity = self.evaluate(omega)
            if not self.__satisfied(candidate_similarity):
                return omega, upper, result, similarity
            upper, result, similarity = omega, candidate, candidate_similarity
            omega *= 0.5
        return 0.0, upper, result, similarity

    def run(self) -> OmegaFit:
        """Search omega"""
        spec = self.__spec
        result, similarity = self.evaluate(0.0)
        if self.__satisfied(similarity):
            return OmegaFit(0.0, result, similarity, False, False, self.evaluations)

        lower, omega = 0.0, spec.omega_start
        while True:
            omega = min(omega, spec.omega_max)
            result, similarity = self.evaluate(omega)
            if self.__satisfied(similarity):
                break
            if omega >= spec.omega_max:
                self.__logger.warning(
                    "Similarity ceiling %(rho).3f not reached at lambda=%(lambda_).6g with omega_max=%(omega).6g",
                    {"rho": spec.rho_thresh, "lambda_": self.__cfg.lambda_, "omega": omega},
                )
                return OmegaFit(omega, result, similarity, True, False, self.evaluations)
            lower, omega = omega, 2.0 * omega

        upper = omega
        if lower == 0.0:
            lower, upper, result, similarity = self.__descend(upper, result, similarity)
            if lower == 0.0:
                # Admissible down to the floor, nothing is left to bisect
                return OmegaFit(upper, result, similarity, False, False, self.evaluations)
        while upper - lower > spec.omega_tol * upper:
            middle = 0.5 * (lower + upper)
            candidate, candidate_similarity = self.evaluate(middle)
            if self.__satisfied(candidate_similarity):
                upper, result, similarity = middle, candidate, candidate_similarity
            else:
                lower = middle

        _, below_similarity = self.evaluate(upper / (1.0 + 2.0 * spec.omega_tol))
        violation = self.__satisfied(below_similarity)
        if violation:
            self.__logger.warning(
                "Similarity is not monotone in omega at lambda=%(lambda_).6g: omega=%(omega).6g is not the smallest "
                "admissible value",
                {"lambda_": self.__cfg.lambda_, "omega": upper},
            )
        return OmegaFit(upper, result, similarity, False, violation, self.evaluations)


def tune_omega(
    design: StandardizedDesign,
    cfg: PenaltyConfig,
    lambda_: float,
    spec: PathSpec,
    warm: CoefficientSet | None = None,
) -> OmegaFit:
    """
    Find the smallest similarity weight for which the maximum pairwise cosine similarity of the absolute coefficient
    vectors is at most `spec.rho_thresh`. The fit at omega = 0 is tried first. Then omega is doubled, starting at
    `spec.omega_start`, until the ceiling holds, and the last bracket is bisected down to a relative width of
    `spec.omega_tol`. If `spec.omega_start` already meets the ceiling, it is halved until the ceiling fails to find the
    lower end of the bracket.

    Parameters
    ----------
    design: StandardizedDesign
        The standardized design
    cfg: PenaltyConfig
        The penalty settings. Its lambda and omega are ignored.
    lambda_: float
        The sparsity weight
    spec: PathSpec
        The search settings and the solver starts
    warm: CoefficientSet, optional
        Coefficients tried as an additional start at every omega

    Returns
    -------
    OmegaFit
        The selected omega and its fit. If the ceiling cannot be met, the fit at `omega_max` flagged `omega_capped`.
    """
    if lambda_ <= 0:
        raise InvalidConfigError(f"lambda must be positive, got {lambda_}")
    cfg = cfg.with_lambda(lambda_)
    controls = spec.controls.with_warm(warm)
    if StartPolicy.ZEROS not in controls.policies:
        controls = replace(controls, policies=controls.policies + (StartPolicy.ZEROS,))
    return _OmegaSearch(design, cfg, spec, controls).run()


def _record(design: StandardizedDesign, lambda_: float, fit: OmegaFit) -> PathRecord:
    sse = model_sse(design, fit.result.coef.beta)
    return PathRecord(
        lambda_=lambda_,
        omega=fit.omega,
        coef=fit.result.coef,
        max_pairwise_similarity=fit.similarity,
        per_model_sse=sse,
        per_model_mse=sse / design.n_samples,
        objective=fit.result.objective,
        converged=fit.result.converged,
        omega_capped=fit.omega_capped,
        monotone_violation=fit.monotone_violation,
        evaluations=fit.evaluations,
    )


def fit_path(design: StandardizedDesign, spec: PathSpec) -> PathResult:
    """
    Compute the regularization path from the largest to the smallest lambda. Every fit is warm-started from the
    coefficients of the previous record and omega is tuned independently at every lambda.

    Parameters
    ----------
    design: StandardizedDesign
        The standardized design
    spec: PathSpec
        The path settings

    Returns
    -------
    PathResult
        One record per grid value
    """
    logger = logging.getLogger(__name__)
    cfg = spec.penalty_config()
    warm: CoefficientSet | None = None
    records = []
    for lambda_ in lambda_grid(design, spec):
        fit = tune_omega(design, cfg, lambda_, spec, warm)
        record = _record(design, lambda_, fit)
        logger.info(
            "M=%(models)i lambda=%(lambda_).6g: omega=%(omega).6g similarity=%(similarity).4f "
            "objective=%(objective).6g",
            {
                "models": spec.models,
                "lambda_": lambda_,
                "omega": record.omega,
                "similarity": record.max_pairwise_similarity,
                "objective": record.objective,
            },
        )
        records.append(record)
        warm = record.coef
    return PathResult(tuple(records), spec, design.names)


def fit_paths(design: StandardizedDesign, spec: PathSpec, models: Iterable[int]) -> dict[int, PathResult]:
    """
    Compute one path per number of models. The number of models is not selected automatically, the paths are meant
    to be compared side by side.

    Returns
    -------
    dict
        The paths keyed by the number of models
    """
    return {int(m): fit_path(design, spec.with_models(int(m))) for m in models}
