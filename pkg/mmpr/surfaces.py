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
Grid data for contour plots of two-covariate, two-model problems. The penalty of the second model is evaluated with
the first model held fixed, optionally together with the SSE of the second model. Rendering is left to plotting
tools, a grid is exported as one row per cell.
"""
from __future__ import annotations

from dataclasses import dataclass
from os import PathLike
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd
import scipy.linalg

from .constants import PenaltyPower
from .errors import InvalidConfigError, LengthMismatchError, WrongDimensionError
from .model import FloatArray, StandardizedDesign

DEFAULT_BOUNDS = 2.0
DEFAULT_RESOLUTION = 201

SURFACE_COLUMNS = ("beta21", "beta22", "penalty", "sse")


@dataclass(frozen=True, eq=False)
class ContourGrid:  # pylint: disable=too-many-instance-attributes
    """
    Values over the square [-bounds, bounds]² of coefficients (beta21, beta22) of the second model. Entry [i, j] of
    a value grid belongs to the point (beta21[i], beta22[j]).

    Parameters
    ----------
    beta21: np.ndarray
        The axis of the first coefficient
    beta22: np.ndarray
        The axis of the second coefficient
    penalty: np.ndarray
        The conditional penalty of every cell
    sse: np.ndarray, optional
        The SSE of every cell, None if no design was given
    beta1: np.ndarray, optional
        The fixed coefficients of the first model
    c: PenaltyPower
        The sparsity power
    d: PenaltyPower
        The similarity power
    lambda_: float
        The sparsity weight
    omega: float
        The similarity weight
    minimum: tuple of float
        The cell with the smallest penalty plus SSE
    least_squares: tuple of float, optional
        The unconstrained least-squares point, if a design was given
    """

    beta21: FloatArray
    beta22: FloatArray
    penalty: FloatArray
    sse: FloatArray | None
    beta1: FloatArray | None
    c: PenaltyPower
    d: PenaltyPower
    lambda_: float
    omega: float
    minimum: tuple[float, float]
    least_squares: tuple[float, float] | None = None

    @property
    def resolution(self) -> int:
        """The number of points per axis"""
        return self.beta21.size

    def to_frame(self) -> pd.DataFrame:
        """One row per cell with the columns beta21, beta22, penalty and, if a design was given, sse"""
        b21, b22 = np.meshgrid(self.beta21, self.beta22, indexing="ij")
        columns = {"beta21": b21.ravel(), "beta22": b22.ravel(), "penalty": self.penalty.ravel()}
        if self.sse is not None:
            columns["sse"] = self.sse.ravel()
        return pd.DataFrame(columns, columns=[name for name in SURFACE_COLUMNS if name in columns])

    def write_csv(self, path: str | PathLike[Any]) -> None:
        """Write the grid to a CSV file with a header row"""
        self.to_frame().to_csv(path, index=False)


def _axis(bounds: float, resolution: int) -> FloatArray:
    if resolution < 2:
        raise InvalidConfigError(f"The resolution must be at least 2, got {resolution}")
    if not bounds > 0:
        raise InvalidConfigError(f"The bounds must be positive, got {bounds}")
    return np.linspace(-bounds, bounds, resolution)


def _as_pair(beta1: npt.ArrayLike) -> FloatArray:
    beta1 = np.asarray(beta1, dtype=np.float64).ravel()
    if beta1.size != 2:
        raise LengthMismatchError(f"The first model must have exactly two coefficients, got {beta1.size}")
    return beta1


def _penalty_grid(
    axis: FloatArray, beta1: FloatArray, c: PenaltyPower, d: PenaltyPower, lambda_: float, omega: float
) -> FloatArray:
    b21, b22 = np.meshgrid(np.abs(axis), np.abs(axis), indexing="ij")
    similarity = np.abs(beta1[0]) ** d * b21**d + np.abs(beta1[1]) ** d * b22**d
    sparsity = b21**c + b22**c
    return omega * similarity + lambda_ * sparsity


def _sse_grid(design: StandardizedDesign, axis: FloatArray) -> tuple[FloatArray, tuple[float, float]]:
    if design.n_covariates != 2:
        raise WrongDimensionError(f"Surfaces need exactly two covariates, the design has {design.n_covariates}")
    gram, xty = design.gram, design.xty
    b21, b22 = np.meshgrid(axis, axis, indexing="ij")
    sse = (
        design.yty
        - 2.0 * (b21 * xty[0] + b22 * xty[1])
        + gram[0, 0] * b21**2
        + 2.0 * gram[0, 1] * b21 * b22
        + gram[1, 1] * b22**2
    )
    least_squares = scipy.linalg.lstsq(design.Xs, design.ys)[0]
    # The expanded quadratic may round to slightly negative values near an exact fit
    return np.maximum(sse, 0.0), (float(least_squares[0]), float(least_squares[1]))


def _minimum_cell(axis: FloatArray, values: FloatArray) -> tuple[float, float]:
    i, j = np.unravel_index(int(np.argmin(values)), values.shape)
    return float(axis[i]), float(axis[j])


def _validate_weights(
    c: PenaltyPower | int, d: PenaltyPower | int, lambda_: float, omega: float
) -> tuple[PenaltyPower, PenaltyPower]:
    try:
        c, d = PenaltyPower(c), PenaltyPower(d)
    except ValueError:
        raise InvalidConfigError(f"The powers c and d must be 1 or 2, got c={c}, d={d}") from None
    if lambda_ < 0 or omega < 0:
        raise InvalidConfigError(f"The penalty weights must be non-negative, got lambda={lambda_}, omega={omega}")
    return c, d


def penalty_surface(  # pylint: disable=too-many-arguments
    beta1: npt.ArrayLike,
    c: PenaltyPower | int,
    d: PenaltyPower | int,
    lambda_: float,
    omega: float,
    bounds: float = DEFAULT_BOUNDS,
    resolution: int = DEFAULT_RESOLUTION,
) -> ContourGrid:
    """
    Evaluate the penalty of the second model, omega * sum_k |b1k|^d |b2k|^d + lambda * sum_k |b2k|^c, with the
    first model held fixed.

    Parameters
    ----------
    beta1: array-like
        The two coefficients of the first model
    c: PenaltyPower or int
        The sparsity power
    d: PenaltyPower or int
        The similarity power
    lambda_: float
        The sparsity weight
    omega: float
        The similarity weight
    bounds: float
        The half width of the square
    resolution: int
        The number of points per axis

    Returns
    -------
    ContourGrid
        The penalty grid without an SSE grid
    """
    c, d = _validate_weights(c, d, lambda_, omega)
    beta1 = _as_pair(beta1)
    axis = _axis(bounds, resolution)
    penalty = _penalty_grid(axis, beta1, c, d, lambda_, omega)
    return ContourGrid(
        beta21=axis,
        beta22=axis.copy(),
        penalty=penalty,
        sse=None,
        beta1=beta1,
        c=c,
        d=d,
        lambda_=float(lambda_),
        omega=float(omega),
        minimum=_minimum_cell(axis, penalty),
    )


def sse_surface(
    design: StandardizedDesign, bounds: float = DEFAULT_BOUNDS, resolution: int = DEFAULT_RESOLUTION
) -> ContourGrid:
    """
    Evaluate ||ys - Xs b||² of a two-covariate design.

    Raises
    ------
    WrongDimensionError
        If the design does not have exactly two covariates.

    Returns
    -------
    ContourGrid
        The SSE grid with a zero penalty and the least-squares point
    """
    axis = _axis(bounds, resolution)
    sse, least_squares = _sse_grid(design, axis)
    return ContourGrid(
        beta21=axis,
        beta22=axis.copy(),
        penalty=np.zeros_like(sse),
        sse=sse,
        beta1=None,
        c=PenaltyPower.ABSOLUTE,
        d=PenaltyPower.ABSOLUTE,
        lambda_=0.0,
        omega=0.0,
        minimum=_minimum_cell(axis, sse),
        least_squares=least_squares,
    )


def conditional_surface(  # pylint: disable=too-many-arguments
    design: StandardizedDesign,
    beta1: npt.ArrayLike,
    c: PenaltyPower | int,
    d: PenaltyPower | int,
    lambda_: float,
    omega: float,
    bounds: float = DEFAULT_BOUNDS,
    resolution: int = DEFAULT_RESOLUTION,
) -> ContourGrid:
    """
    Evaluate both the conditional penalty and the SSE of the second model. The reported minimum is the cell with the
    smallest sum of both, the grid approximation of the conditional solution.

    Raises
    ------
    WrongDimensionError
        If the design does not have exactly two covariates.

    Returns
    -------
    ContourGrid
        The penalty and SSE grids
    """
    c, d = _validate_weights(c, d, lambda_, omega)
    beta1 = _as_pair(beta1)
    axis = _axis(bounds, resolution)
    sse, least_squares = _sse_grid(design, axis)
    penalty = _penalty_grid(axis, beta1, c, d, lambda_, omega)
    return ContourGrid(
        beta21=axis,
        beta22=axis.copy(),
        penalty=penalty,
        sse=sse,
        beta1=beta1,
        c=c,
        d=d,
        lambda_=float(lambda_),
        omega=float(omega),
        minimum=_minimum_cell(axis, sse + penalty),
        least_squares=least_squares,
    )
