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
The domain types of multi-model penalized regression and the exact evaluation of its objective function

    sum_i ||y - X b_i||^2 + omega * sum_{i<j} P1(b_i, b_j) + lambda * sum_i P2(b_i)

with the similarity penalty P1 and the sparsity penalty P2.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import numpy.typing as npt

from .constants import PenaltyPower, Scale
from .errors import (
    ConstantColumnError,
    DimensionMismatchError,
    InvalidConfigError,
    LengthMismatchError,
    ScaleMismatchError,
)

if sys.version_info < (3, 11):
    from typing_extensions import Self
else:
    from typing import Self

FloatArray = npt.NDArray[np.float64]


def _frozen_array(values: npt.ArrayLike) -> FloatArray:
    array = np.array(values, dtype=np.float64)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    A regression dataset in raw units.

    Parameters
    ----------
    X: array-like
        The n×p matrix of covariates
    y: array-like
        The response vector of length n
    names: sequence of str
        The covariate labels, one per column of `X`
    """

    X: FloatArray
    y: FloatArray
    names: tuple[str, ...]

    def __post_init__(self) -> None:
        X = _frozen_array(self.X)
        y = _frozen_array(self.y)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DimensionMismatchError(f"X must be a non-empty 2-D matrix, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DimensionMismatchError(f"y must have length {X.shape[0]}, got shape {y.shape}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InvalidConfigError("The dataset contains non-finite values")
        names = tuple(str(name) for name in self.names)
        if len(names) != X.shape[1]:
            raise DimensionMismatchError(f"Expected {X.shape[1]} covariate names, got {len(names)}")
        if len(set(names)) != len(names):
            raise InvalidConfigError(f"Covariate names must be unique: {names}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "names", names)

    @property
    def n_samples(self) -> int:
        """The number of observations"""
        return self.X.shape[0]

    @property
    def n_covariates(self) -> int:
        """The number of covariates"""
        return self.X.shape[1]


@dataclass(frozen=True, eq=False)
class StandardizedDesign:  # pylint: disable=too-many-instance-attributes
    """
    The centered response and the centered covariates scaled to unit L2 norm, together with everything needed to
    map coefficients back to the raw scale.
    """

    Xs: FloatArray
    ys: FloatArray
    col_norms: FloatArray
    col_means: FloatArray
    y_mean: float
    names: tuple[str, ...]

    @property
    def n_samples(self) -> int:
        """The number of observations"""
        return self.Xs.shape[0]

    @property
    def n_covariates(self) -> int:
        """The number of covariates"""
        return self.Xs.shape[1]

    @cached_property
    def gram(self) -> FloatArray:
        """The p×p matrix Xsᵀ Xs. Its diagonal holds the column norms z_k."""
        return _frozen_array(self.Xs.T @ self.Xs)

    @cached_property
    def xty(self) -> FloatArray:
        """The p-vector Xsᵀ ys"""
        return _frozen_array(self.Xs.T @ self.ys)

    @cached_property
    def yty(self) -> float:
        """The total sum of squares of the centered response"""
        return float(self.ys @ self.ys)

    def subset(self, rows: npt.ArrayLike) -> Dataset:
        """
        Extract a subset of observations as a new dataset on the standardized scale. Used for cross validation.

        Parameters
        ----------
        rows: array-like of int
            The row indices to keep

        Returns
        -------
        Dataset
            The selected rows of `Xs` and `ys`
        """
        rows = np.asarray(rows)
        return Dataset(self.Xs[rows], self.ys[rows], self.names)


@dataclass(frozen=True)
class PenaltyConfig:  # pylint: disable=too-many-instance-attributes
    """
    All tuning symbols of the objective function plus the default solver controls.

    Parameters
    ----------
    models: int
        The number of models M
    c: PenaltyPower or int
        The sparsity power, 1 (LASSO-type) or 2 (ridge-type)
    d: PenaltyPower or int
        The similarity power, 1 or 2
    lambda_: float
        The sparsity penalty weight
    omega: float
        The similarity penalty weight
    eps: float
        The per-coefficient convergence tolerance
    max_sweeps: int
        The maximum number of full sweeps over all coefficients
    shared: iterable of int
        Covariate indices exempt from the similarity penalty. They may enter all models without penalty.
    """

    models: int = 1
    c: PenaltyPower = PenaltyPower.ABSOLUTE
    d: PenaltyPower = PenaltyPower.ABSOLUTE
    lambda_: float = 0.0
    omega: float = 0.0
    eps: float = 1e-6
    max_sweeps: int = 10000
    shared: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "c", PenaltyPower(self.c))
            object.__setattr__(self, "d", PenaltyPower(self.d))
        except ValueError:
            raise InvalidConfigError(f"The powers c and d must be 1 or 2, got c={self.c}, d={self.d}") from None
        object.__setattr__(self, "shared", frozenset(int(k) for k in self.shared))
        if int(self.models) < 1:
            raise InvalidConfigError(f"At least one model is required, got M={self.models}")
        if not (self.lambda_ >= 0 and np.isfinite(self.lambda_)):
            raise InvalidConfigError(f"lambda must be a finite non-negative number, got {self.lambda_}")
        if not (self.omega >= 0 and np.isfinite(self.omega)):
            raise InvalidConfigError(f"omega must be a finite non-negative number, got {self.omega}")
        if self.eps <= 0:
            raise InvalidConfigError(f"eps must be positive, got {self.eps}")
        if int(self.max_sweeps) < 1:
            raise InvalidConfigError(f"max_sweeps must be at least 1, got {self.max_sweeps}")
        if any(k < 0 for k in self.shared):
            raise InvalidConfigError(f"Shared covariate indices must be non-negative, got {sorted(self.shared)}")

    def with_omega(self, omega: float) -> Self:
        """Return a copy with a different similarity weight"""
        return replace(self, omega=float(omega))

    def with_lambda(self, lambda_: float) -> Self:
        """Return a copy with a different sparsity weight"""
        return replace(self, lambda_=float(lambda_))

    def similarity_weights(self, n_covariates: int) -> FloatArray:
        """
        Returns
        -------
        np.ndarray
            1 for every covariate subject to the similarity penalty, 0 for the shared ones
        """
        weights = np.ones(n_covariates)
        if self.shared:
            if max(self.shared) >= n_covariates:
                raise DimensionMismatchError(
                    f"Shared covariate index {max(self.shared)} out of range for {n_covariates} covariates"
                )
            weights[sorted(self.shared)] = 0.0
        return weights


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """
    The M×p matrix of model coefficients. Row i holds the coefficients of model i.
    """

    beta: FloatArray
    scale: Scale = Scale.STANDARDIZED

    def __post_init__(self) -> None:
        beta = _frozen_array(self.beta)
        if beta.ndim != 2:
            raise DimensionMismatchError(f"Coefficients must be an M×p matrix, got shape {beta.shape}")
        if not np.all(np.isfinite(beta)):
            raise InvalidConfigError("Coefficients must be finite")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "scale", Scale(self.scale))

    @classmethod
    def zeros(cls, models: int, n_covariates: int) -> CoefficientSet:
        """All-zero coefficients on the standardized scale"""
        return cls(np.zeros((models, n_covariates)))

    @property
    def models(self) -> int:
        """The number of models M"""
        return self.beta.shape[0]

    @property
    def n_covariates(self) -> int:
        """The number of covariates p"""
        return self.beta.shape[1]

    def permuted(self, order: Sequence[int]) -> Self:
        """Return a copy with the models relabeled, row `i` of the result is row `order[i]` of this set"""
        return replace(self, beta=self.beta[list(order)])

    def support(self, zero_tol: float = 0.0) -> npt.NDArray[np.bool_]:
        """The boolean M×p matrix of coefficients with magnitude above `zero_tol`"""
        return np.abs(self.beta) > zero_tol


class RawCoefficients(NamedTuple):
    """Coefficients on the raw scale of the covariates plus one intercept per model"""

    coef: CoefficientSet
    intercepts: FloatArray


def standardize(data: Dataset) -> StandardizedDesign:
    """
    Center the response and all covariates and scale every covariate to unit L2 norm. Centering is equivalent to
    fitting an unpenalized intercept.

    Parameters
    ----------
    data: Dataset
        The raw dataset

    Returns
    -------
    StandardizedDesign
        The standardized design

    Raises
    ------
    ConstantColumnError
        If a covariate has zero norm after centering.
    """
    col_means = data.X.mean(axis=0)
    centered = data.X - col_means
    col_norms = np.linalg.norm(centered, axis=0)
    # Relative to the magnitude of the column, otherwise rounding noise of a constant column passes as variance
    scale = np.maximum(np.abs(data.X).max(axis=0), 1.0)
    constant = np.flatnonzero(col_norms <= np.finfo(np.float64).eps * np.sqrt(data.n_samples) * scale)
    if constant.size:
        raise ConstantColumnError(int(constant[0]), data.names[constant[0]])
    y_mean = float(data.y.mean())
    return StandardizedDesign(
        Xs=_frozen_array(centered / col_norms),
        ys=_frozen_array(data.y - y_mean),
        col_norms=_frozen_array(col_norms),
        col_means=_frozen_array(col_means),
        y_mean=y_mean,
        names=data.names,
    )


def _check_lengths(*vectors: FloatArray) -> None:
    lengths = {vector.shape for vector in vectors}
    if len(lengths) != 1:
        raise LengthMismatchError(f"Coefficient vectors differ in shape: {sorted(lengths)}")


def similarity_penalty(
    bi: npt.ArrayLike, bj: npt.ArrayLike, d: PenaltyPower | int, weights: npt.ArrayLike | None = None
) -> float:
    """
    The similarity penalty sum_k |b_ik|^d |b_jk|^d between two models.

    Parameters
    ----------
    bi: array-like
        The coefficients of the first model
    bj: array-like
        The coefficients of the second model
    d: PenaltyPower or int
        The similarity power
    weights: array-like, optional
        Per-covariate weights, 0 for covariates exempt from the penalty. Defaults to 1 for all.

    Returns
    -------
    float
        The non-negative penalty value
    """
    d = PenaltyPower(d)
    bi, bj = np.asarray(bi, dtype=np.float64), np.asarray(bj, dtype=np.float64)
    _check_lengths(bi, bj)
    products = np.abs(bi) ** d * np.abs(bj) ** d
    if weights is not None:
        products = products * np.asarray(weights, dtype=np.float64)
    return float(products.sum())


def sparsity_penalty(bi: npt.ArrayLike, c: PenaltyPower | int) -> float:
    """
    The sparsity penalty sum_k |b_ik|^c of a single model.

    Parameters
    ----------
    bi: array-like
        The coefficients of the model
    c: PenaltyPower or int
        The sparsity power

    Returns
    -------
    float
        The non-negative penalty value
    """
    c = PenaltyPower(c)
    return float((np.abs(np.asarray(bi, dtype=np.float64)) ** c).sum())


def model_sse(design: StandardizedDesign, beta: npt.ArrayLike) -> FloatArray:
    """
    Returns
    -------
    np.ndarray
        The sum of squared errors ||ys - Xs b_i||^2 of every model
    """
    beta = np.atleast_2d(np.asarray(beta, dtype=np.float64))
    if beta.shape[1] != design.n_covariates:
        raise DimensionMismatchError(
            f"Coefficients have {beta.shape[1]} covariates, the design has {design.n_covariates}"
        )
    residuals = design.ys[np.newaxis, :] - beta @ design.Xs.T
    return np.einsum("ij,ij->i", residuals, residuals)


def _pairs(models: int) -> Iterable[tuple[int, int]]:
    return combinations(range(models), 2)


def objective(design: StandardizedDesign, coef: CoefficientSet, cfg: PenaltyConfig) -> float:
    """
    Evaluate the multi-model objective function exactly.

    Parameters
    ----------
    design: StandardizedDesign
        The standardized design
    coef: CoefficientSet
        The coefficients on the standardized scale
    cfg: PenaltyConfig
        The penalty settings

    Returns
    -------
    float
        The total SSE plus the weighted similarity and sparsity penalties

    Raises
    ------
    DimensionMismatchError
        If the coefficient matrix does not have `cfg.models` rows and one column per covariate.
    ScaleMismatchError
        If the coefficients are on the raw scale.
    """
    if coef.scale is not Scale.STANDARDIZED:
        raise ScaleMismatchError("The objective is defined on the standardized scale")
    if coef.beta.shape != (cfg.models, design.n_covariates):
        raise DimensionMismatchError(
            f"Expected coefficients of shape {(cfg.models, design.n_covariates)}, got {coef.beta.shape}"
        )
    beta = coef.beta
    weights = cfg.similarity_weights(design.n_covariates)
    total = float(model_sse(design, beta).sum())
    if cfg.omega > 0:
        total += cfg.omega * sum(similarity_penalty(beta[i], beta[j], cfg.d, weights) for i, j in _pairs(cfg.models))
    if cfg.lambda_ > 0:
        total += cfg.lambda_ * sum(sparsity_penalty(row, cfg.c) for row in beta)
    return total


def destandardize(coef: CoefficientSet, design: StandardizedDesign) -> RawCoefficients:
    """
    Map coefficients from the standardized scale back to the raw scale of the covariates. The fitted values
    `intercept_i + X b_i^raw` on the raw data equal `y_mean + Xs b_i` on the standardized design.

    Parameters
    ----------
    coef: CoefficientSet
        Coefficients on the standardized scale
    design: StandardizedDesign
        The design the coefficients were fitted on

    Returns
    -------
    RawCoefficients
        The raw-scale coefficients and one intercept per model

    Raises
    ------
    ScaleMismatchError
        If the coefficients already are on the raw scale.
    """
    if coef.scale is Scale.RAW:
        raise ScaleMismatchError("The coefficients are already on the raw scale")
    if coef.n_covariates != design.n_covariates:
        raise DimensionMismatchError(
            f"Coefficients have {coef.n_covariates} covariates, the design has {design.n_covariates}"
        )
    raw = coef.beta / design.col_norms
    intercepts = design.y_mean - raw @ design.col_means
    return RawCoefficients(CoefficientSet(raw, Scale.RAW), _frozen_array(intercepts))
