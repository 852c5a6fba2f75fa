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
All closed vocabularies used by the solver, the tuner and the command line are found here.
"""
from enum import Enum, IntEnum, unique


# We use IntEnum, because the powers are written to the output files and must serialize as plain numbers
@unique
class PenaltyPower(IntEnum):
    """
    The exponent of a penalty term. Used for both the sparsity power `c` and the similarity power `d`.
    """

    ABSOLUTE = 1
    SQUARED = 2


@unique
class Scale(Enum):
    """
    The scale a set of coefficients is reported on.
    """

    STANDARDIZED = "standardized"
    RAW = "raw"


@unique
class StartPolicy(Enum):
    """
    The families of starting values tried by the solver. The objective is not convex, so more than one start is
    usually needed.
    """

    ZEROS = "zeros"
    WARM = "warm"
    EXHAUSTIVE = "exhaustive"
    RANDOM = "random"


@unique
class InitMethod(Enum):
    """
    How the coefficients included in a support subset are initialized.
    """

    RIDGE = "ridge"
    LASSO = "lasso"
    OLS = "ols"


@unique
class CorrelationStructure(Enum):
    """
    The correlation structure of a covariate block of the simulated designs.
    """

    CS = "cs"
    AR1 = "ar1"
    IDENTITY = "identity"


@unique
class OutputFormat(Enum):
    """
    The file formats supported by the record writer.
    """

    CSV = "csv"
    JSON = "json"
    CBOR = "cbor"


@unique
class CommandIdentifier(Enum):
    """
    The sub-commands of the command line interface.
    """

    FIT = "fit"
    PATH = "path"
    SIMULATE = "simulate"
    INCLUSION_STUDY = "inclusion-study"
    METRICS = "metrics"
    PENALTY_SURFACE = "penalty-surface"


@unique
class ExitCode(IntEnum):
    """
    Exit codes returned by the command line interface.
    """

    SUCCESS = 0
    USAGE_ERROR = 1
    DATA_ERROR = 2
    NUMERICAL_FAILURE = 3
