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
"""The coordinate descent solver for a fixed pair of penalty weights"""
from __future__ import annotations

import logging
import sys
import warnings
from dataclasses import dataclass, replace
from itertools import product
from typing import Callable, Iterator, Sequence

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .constants import InitMethod, PenaltyPower, StartPolicy
from .errors import DimensionMismatchError, InvalidConfigError, NotConvergedWarning
from .model import CoefficientSet, FloatArray, PenaltyConfig, StandardizedDesign, objective

if sys.version_info < (3, 11):
    from typing_extensions import Self
else:
    from typing import Self

# 2**14 starting values is the largest enumeration we are willing to run
MAX_EXHAUSTIVE_PARAMETERS = 14
# Starts whose objective is within this margin of the best one are considered equal, the earlier start wins
TIE_TOLERANCE = 1e-10

Monitor = Callable[[FloatArray], None]


@dataclass(frozen=True)
class SolveControls:
    """
    The starting values and stopping rule of a solve.

    Parameters
    ----------
    policies: tuple of StartPolicy
        The start families to try, in order. The start id counts across all families.
    warm: CoefficientSet, optional
        The coefficients used by the `WARM` policy
    random_starts: int
        The number of random support subsets drawn by the `RANDOM` policy
    seed: int
        The seed of the generator used by the `RANDOM` policy
    init: InitMethod
        How coefficients included in a support subset are initialized
    eps: float, optional
        Overrides the convergence tolerance of the penalty config
    max_sweeps: int, optional
        Overrides the sweep limit of the penalty config
    """

    policies: tuple[StartPolicy, ...] = (StartPolicy.ZEROS,)
    warm: CoefficientSet | None = None
    random_starts: int = 8
    seed: int = 0
    init: InitMethod = InitMethod.RIDGE
    eps: float | None = None
    max_sweeps: int | None = None

    def __post_init__(self) -> None:
        try:
            policies = tuple(StartPolicy(policy) for policy in self.policies)
            object.__setattr__(self, "init", InitMethod(self.init))
        except ValueError as exc:
            raise InvalidConfigError(str(exc)) from None
        if not policies:
            raise InvalidConfigError("At least one start policy is required")
        if StartPolicy.WARM in policies and self.warm is None:
            raise InvalidConfigError("The warm start policy requires warm coefficients")
        if StartPolicy.RANDOM in policies and self.random_starts < 1:
            raise InvalidConfigError(f"The random policy needs at least one start, got {self.random_starts}")
        if self.eps is not None and self.eps <= 0:
            raise InvalidConfigError(f"eps must be positive, got {self.eps}")
        if self.max_sweeps is not None and self.max_sweeps < 1:
            raise InvalidConfigError(f"max_sweeps must be at least 1, got {self.max_sweeps}")
        object.__setattr__(self, "policies", policies)

    def with_warm(self, warm: CoefficientSet | None) -> Self:
        """
        Return a copy that tries `warm` before all other starts. Passing `None` removes the warm start.
        """
        policies = tuple(policy for policy in self.policies if policy is not StartPolicy.WARM)
        if warm is None:
            return replace(self, policies=policies or (StartPolicy.ZEROS,), warm=None)
        return replace(self, policies=(StartPolicy.WARM,) + policies, warm=warm)


@dataclass(frozen=True, eq=False)
class SolveResult:
    """The best local minimum found over all starts"""

    coef: CoefficientSet
    objective: float
    sweeps: int
    converged: bool
    start_id: int
    start_policy: StartPolicy


def soft_threshold(rho: npt.ArrayLike, gamma: npt.ArrayLike) -> npt.ArrayLike:
    """
    The soft-thresholding operator sign(rho) * max(|rho| - gamma / 2, 0). The halved threshold is the minimizer of
    z*b^2 - 2*rho*b + gamma*|b| for z = 1, which is the form the coordinate objective takes without a 1/2 factor on
    the SSE.

    Parameters
    ----------
    rho: float or array-like
        The partial correlation with the partial residual
    gamma: float or array-like
        The non-negative L1 weight of the coordinate

    Returns
    -------
    float or np.ndarray
        The thresholded value
    """
    result = np.sign(rho) * np.maximum(np.abs(rho) - np.asarray(gamma) / 2.0, 0.0)
    return float(result) if np.ndim(result) == 0 else result


class CoordinateDescent:
    """
    Cyclic exact minimization of the objective one coefficient at a time. The coefficient matrix is updated in
    place, models in the outer loop and covariates in the inner loop, both ascending.
    """

    def __init__(self, design: StandardizedDesign, cfg: PenaltyConfig, monitor: Monitor | None = None) -> None:
        """
        Parameters
        ----------
        design: StandardizedDesign
            The standardized design
        cfg: PenaltyConfig
            The penalty settings
        monitor: Callable, optional
            Called with the coefficient matrix after every single coordinate update
        """
        self.__gram = design.gram
        self.__xty = design.xty
        self.__z = np.diag(design.gram).copy()
        self.__cfg = cfg
        self.__weights = cfg.similarity_weights(design.n_covariates)
        self.__monitor = monitor

    @property
    def config(self) -> PenaltyConfig:
        """The penalty settings"""
        return self.__cfg

    def value(self, beta: FloatArray, i: int, k: int) -> float:
        """
        Compute the minimizer of the objective in coefficient (i, k), holding all other coefficients fixed.

        Parameters
        ----------
        beta: np.ndarray
            The current M×p coefficient matrix
        i: int
            The model index
        k: int
            The covariate index

        Returns
        -------
        float
            The new value of beta[i, k]
        """
        cfg = self.__cfg
        row = beta[i]
        rho = self.__xty[k] - self.__gram[k] @ row + self.__z[k] * row[k]
        others = 0.0
        if cfg.omega > 0 and self.__weights[k] and beta.shape[0] > 1:
            others = cfg.omega * float((np.abs(np.delete(beta[:, k], i)) ** cfg.d).sum())
        gamma = (2 - cfg.c) * cfg.lambda_ + (2 - cfg.d) * others
        theta = self.__z[k] + (cfg.c - 1) * cfg.lambda_ + (cfg.d - 1) * others
        return soft_threshold(rho, gamma) / theta

    def sweep(self, beta: FloatArray, rows: Sequence[int], columns: Sequence[int]) -> float:
        """
        Update every coefficient in `rows` × `columns` once.

        Returns
        -------
        float
            The largest absolute change of a coefficient
        """
        largest_change = 0.0
        for i in rows:
            for k in columns:
                previous = beta[i, k]
                beta[i, k] = self.value(beta, i, k)
                largest_change = max(largest_change, abs(beta[i, k] - previous))
                if self.__monitor is not None:
                    self.__monitor(beta)
        return largest_change

    def run(
        self,
        beta: FloatArray,
        eps: float,
        max_sweeps: int,
        rows: Sequence[int] | None = None,
        columns: Sequence[int] | None = None,
    ) -> tuple[int, bool]:
        """
        Sweep until no coefficient changes by `eps` or more, or until `max_sweeps` is reached.

        Returns
        -------
        tuple of int and bool
            The number of sweeps and whether the iteration converged
        """
        rows = range(beta.shape[0]) if rows is None else rows
        columns = range(beta.shape[1]) if columns is None else columns
        for sweep in range(1, max_sweeps + 1):
            if self.sweep(beta, rows, columns) < eps:
                return sweep, True
        return max_sweeps, False


def coordinate_update(
    design: StandardizedDesign, coef: CoefficientSet, cfg: PenaltyConfig, i: int, k: int
) -> float:
    """
    The exact minimizer of the objective in the single coefficient beta[i, k], all others held fixed.

    Parameters
    ----------
    design: StandardizedDesign
        The standardized design
    coef: CoefficientSet
        The current coefficients
    cfg: PenaltyConfig
        The penalty settings
    i: int
        The model index
    k: int
        The covariate index

    Returns
    -------
    float
        The new value of beta[i, k]
    """
    if coef.beta.shape != (cfg.models, design.n_covariates):
        raise DimensionMismatchError(
            f"Expected coefficients of shape {(cfg.models, design.n_covariates)}, got {coef.beta.shape}"
        )
    return CoordinateDescent(design, cfg).value(coef.beta, i, k)


class _StartFactory:
    """
    Produces the starting coefficient matrices of a solve. Included coefficients of subset starts are initialized by
    a fit restricted to the support of their model.
    """

    def __init__(self, design: StandardizedDesign, cfg: PenaltyConfig, controls: SolveControls) -> None:
        self.__design = design
        self.__cfg = cfg
        self.__controls = controls
        self.__restricted_fits: dict[tuple[bool, ...], FloatArray] = {}

    def __restricted_fit(self, support: npt.NDArray[np.bool_]) -> FloatArray:
        key = tuple(bool(flag) for flag in support)
        if key not in self.__restricted_fits:
            self.__restricted_fits[key] = self.__fit_support(np.flatnonzero(support))
        return self.__restricted_fits[key]

    def __fit_support(self, columns: npt.NDArray[np.intp]) -> FloatArray:
        design, cfg = self.__design, self.__cfg
        beta = np.zeros(design.n_covariates)
        if columns.size == 0:
            return beta
        gram = design.gram[np.ix_(columns, columns)]
        xty = design.xty[columns]
        method = self.__controls.init
        if method is InitMethod.RIDGE and cfg.lambda_ > 0:
            beta[columns] = scipy.linalg.solve(
                gram + cfg.lambda_ * np.eye(columns.size), xty, assume_a="pos"
            )
        elif method is InitMethod.LASSO:
            single = np.zeros((1, design.n_covariates))
            lasso = PenaltyConfig(models=1, c=PenaltyPower.ABSOLUTE, lambda_=cfg.lambda_)
            CoordinateDescent(design, lasso).run(single, cfg.eps, cfg.max_sweeps, rows=[0], columns=columns)
            beta = single[0]
        else:
            # OLS, also the ridge solution for lambda = 0. lstsq returns the minimum norm solution if rank deficient.
            beta[columns] = scipy.linalg.lstsq(gram, xty)[0]
        return beta

    def __subset_start(self, support: npt.NDArray[np.bool_]) -> FloatArray:
        return np.vstack([self.__restricted_fit(row) for row in support])

    def __iter__(self) -> Iterator[tuple[StartPolicy, FloatArray]]:
        models, n_covariates = self.__cfg.models, self.__design.n_covariates
        for policy in self.__controls.policies:
            if policy is StartPolicy.ZEROS:
                yield policy, np.zeros((models, n_covariates))
            elif policy is StartPolicy.WARM:
                assert self.__controls.warm is not None  # checked by SolveControls
                warm = self.__controls.warm.beta
                if warm.shape != (models, n_covariates):
                    raise DimensionMismatchError(
                        f"Warm start has shape {warm.shape}, expected {(models, n_covariates)}"
                    )
                yield policy, warm.copy()
            elif policy is StartPolicy.EXHAUSTIVE:
                if models * n_covariates > MAX_EXHAUSTIVE_PARAMETERS:
                    raise InvalidConfigError(
                        f"Exhaustive starts need M*p <= {MAX_EXHAUSTIVE_PARAMETERS}, got {models * n_covariates}"
                    )
                for flags in product((False, True), repeat=models * n_covariates):
                    yield policy, self.__subset_start(np.array(flags).reshape(models, n_covariates))
            else:
                rng = np.random.default_rng(self.__controls.seed)
                for _ in range(self.__controls.random_starts):
                    yield policy, self.__subset_start(rng.random((models, n_covariates)) < 0.5)


def solve(
    design: StandardizedDesign,
    cfg: PenaltyConfig,
    controls: SolveControls | None = None,
    monitor: Monitor | None = None,
) -> SolveResult:
    """
    Minimize the objective for fixed penalty weights by coordinate descent from every requested start and keep the
    best local minimum. The objective is not convex, so the result depends on the starts.

    Parameters
    ----------
    design: StandardizedDesign
        The standardized design
    cfg: PenaltyConfig
        The penalty settings
    controls: SolveControls, optional
        The starts and the stopping rule. Defaults to a single start at zero.
    monitor: Callable, optional
        Called with the coefficient matrix after every coordinate update

    Returns
    -------
    SolveResult
        The start with the lowest objective. Among starts within 1e-10 of each other, the lowest start id wins.

    Warns
    -----
    NotConvergedWarning
        If the winning start did not converge within the sweep limit.
    """
    logger = logging.getLogger(__name__)
    controls = SolveControls() if controls is None else controls
    eps = cfg.eps if controls.eps is None else controls.eps
    max_sweeps = cfg.max_sweeps if controls.max_sweeps is None else controls.max_sweeps
    engine = CoordinateDescent(design, cfg, monitor)

    best: SolveResult | None = None
    for start_id, (policy, beta) in enumerate(_StartFactory(design, cfg, controls)):
        sweeps, converged = engine.run(beta, eps, max_sweeps)
        coef = CoefficientSet(beta)
        value = objective(design, coef, cfg)
        logger.debug(
            "Start %(start_id)i (%(policy)s): objective %(value).10g after %(sweeps)i sweeps",
            {"start_id": start_id, "policy": policy.value, "value": value, "sweeps": sweeps},
        )
        if best is None or value < best.objective - TIE_TOLERANCE:
            best = SolveResult(coef, value, sweeps, converged, start_id, policy)
    assert best is not None  # SolveControls requires at least one policy

    if not best.converged:
        warnings.warn(
            f"Coordinate descent did not converge within {max_sweeps} sweeps (lambda={cfg.lambda_}, "
            f"omega={cfg.omega}). Returning the best iterate.",
            NotConvergedWarning,
        )
    return best


def conditional_solve(
    design: StandardizedDesign,
    fixed: CoefficientSet | npt.ArrayLike,
    cfg: PenaltyConfig,
    controls: SolveControls | None = None,
    monitor: Monitor | None = None,
) -> FloatArray:
    """
    Solve for the first model while all other models are held fixed. For (c, d) = (1, 1) this is an adaptive LASSO,
    for (1, 2) and (2, 1) an adaptive elastic net, and for (2, 2) an adaptive ridge regression, which is solved in
    closed form.

    Parameters
    ----------
    design: StandardizedDesign
        The standardized design
    fixed: CoefficientSet or array-like
        The (M-1)×p coefficients of models 2..M
    cfg: PenaltyConfig
        The penalty settings, `cfg.models` must be M
    controls: SolveControls, optional
        Only the stopping rule is used
    monitor: Callable, optional
        Called with the full coefficient matrix after every coordinate update

    Returns
    -------
    np.ndarray
        The p coefficients of the first model
    """
    fixed_beta = fixed.beta if isinstance(fixed, CoefficientSet) else np.asarray(fixed, dtype=np.float64)
    fixed_beta = fixed_beta.reshape(-1, design.n_covariates)
    if fixed_beta.shape[0] != cfg.models - 1:
        raise DimensionMismatchError(f"Expected {cfg.models - 1} fixed models, got {fixed_beta.shape[0]}")
    controls = SolveControls() if controls is None else controls

    if cfg.c is PenaltyPower.SQUARED and cfg.d is PenaltyPower.SQUARED:
        weights = cfg.lambda_ + cfg.omega * cfg.similarity_weights(design.n_covariates) * (fixed_beta**2).sum(axis=0)
        system = design.gram + np.diag(weights)
        try:
            return scipy.linalg.solve(system, design.xty, assume_a="pos")
        except scipy.linalg.LinAlgError:
            return scipy.linalg.lstsq(system, design.xty)[0]

    beta = np.vstack([np.zeros((1, design.n_covariates)), fixed_beta])
    eps = cfg.eps if controls.eps is None else controls.eps
    max_sweeps = cfg.max_sweeps if controls.max_sweeps is None else controls.max_sweeps
    _, converged = CoordinateDescent(design, cfg, monitor).run(beta, eps, max_sweeps, rows=[0])
    if not converged:
        warnings.warn(
            f"Conditional coordinate descent did not converge within {max_sweeps} sweeps.", NotConvergedWarning
        )
    return beta[0].copy()
