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
"""Custom errors and warnings raised by mmpr."""
from __future__ import annotations

from .constants import ExitCode


class MmprException(Exception):
    """
    The base exception class for all errors thrown by mmpr.
    """

    exit_code: ExitCode = ExitCode.DATA_ERROR


class InvalidConfigError(MmprException, ValueError):
    """
    Raised if a configuration value is out of range or inconsistent with the other settings.
    """

    exit_code = ExitCode.USAGE_ERROR


class ConstantColumnError(MmprException):
    """
    Raised by the standardization if a covariate has zero variance after centering.
    """

    def __init__(self, column: int, name: str | None = None) -> None:
        label = f"'{name}'" if name is not None else str(column)
        super().__init__(f"Covariate {label} is constant and cannot be scaled to unit norm")
        self.column = column


class LengthMismatchError(MmprException, ValueError):
    """
    Raised if two coefficient vectors that must be compared element-wise differ in length.
    """


class DimensionMismatchError(MmprException, ValueError):
    """
    Raised if a coefficient matrix does not match the number of covariates or models of the design.
    """


class ScaleMismatchError(MmprException):
    """
    Raised if coefficients are on the wrong scale for the requested operation.
    """


class NotPositiveDefiniteError(MmprException):
    """
    Raised if a correlation matrix cannot be factorized by a Cholesky decomposition.
    """

    exit_code = ExitCode.NUMERICAL_FAILURE


class WrongDimensionError(MmprException):
    """
    Raised if a surface is requested for a design that does not have exactly two covariates.
    """


class MissingColumnError(MmprException):
    """
    Raised if the response column is not found in the input file.
    """


class MalformedInputError(MmprException):
    """
    Raised if the input file is not valid UTF-8 or its rows do not match the header.
    """


class NonNumericCellError(MmprException):
    """
    Raised if a cell of the input file cannot be parsed as a number.
    """

    def __init__(self, row: int, column: str, value: str) -> None:
        super().__init__(f"Non-numeric value '{value}' in row {row}, column '{column}'")
        self.row = row
        self.column = column


class MissingValueError(MmprException):
    """
    Raised if a cell of the input file is empty and filling missing values was not requested.
    """

    def __init__(self, row: int, column: str) -> None:
        super().__init__(f"Missing value in row {row}, column '{column}'")
        self.row = row
        self.column = column


class MmprWarning(Warning):
    """
    The base class for all warnings issued by mmpr.
    """


class NotConvergedWarning(MmprWarning, UserWarning):
    """
    Issued if the coordinate descent hit the sweep limit. The best iterate is returned nonetheless.
    """
