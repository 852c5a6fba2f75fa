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
Gaussian regression data with block-diagonal covariate correlation Γ = I_b ⊗ Γ_s, where every block is either
compound symmetric, AR(1) or the identity. The seven reference cases use six covariates, the first three of which are
influential.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from os import PathLike
from typing import Any

import numpy as np
import pandas as pd
import scipy.linalg

from .constants import CorrelationStructure
from .errors import InvalidConfigError, NotPositiveDefiniteError
from .model import Dataset, FloatArray

DEFAULT_BETA0 = (1.0, 1.0, 1.0, 0.0, 0.0, 0.0)

# rho, number of blocks, block size, block structure
_REFERENCE_CASES: dict[int, tuple[float, int, int, CorrelationStructure]] = {
    1: (0.0, 1, 6, CorrelationStructure.IDENTITY),
    2: (0.5, 1, 6, CorrelationStructure.AR1),
    3: (0.9, 1, 6, CorrelationStructure.AR1),
    4: (0.5, 2, 3, CorrelationStructure.CS),
    5: (0.9, 2, 3, CorrelationStructure.CS),
    6: (0.5, 3, 2, CorrelationStructure.CS),
    7: (0.9, 3, 2, CorrelationStructure.CS),
}


def block_correlation(
    rho: float, blocks: int, block_size: int, structure: CorrelationStructure | str
) -> FloatArray:
    """
    Build the correlation matrix I_blocks ⊗ Γ_block_size.

    Parameters
    ----------
    rho: float
        The correlation parameter, |rho| < 1
    blocks: int
        The number of blocks
    block_size: int
        The number of covariates per block
    structure: CorrelationStructure or str
        `cs` for all off-diagonal entries rho, `ar1` for entries rho^|i-j|, `identity` for uncorrelated covariates

    Returns
    -------
    np.ndarray
        The symmetric correlation matrix with unit diagonal

    Raises
    ------
    NotPositiveDefiniteError
        If the matrix has no Cholesky factor, e.g. for a CS block with rho < -1/(block_size - 1).
    """
    structure = CorrelationStructure(structure)
    if not -1 < rho < 1:
        raise InvalidConfigError(f"The correlation must satisfy |rho| < 1, got {rho}")
    if blocks < 1 or block_size < 1:
        raise InvalidConfigError(f"Need at least one block of at least one covariate, got {blocks}×{block_size}")
    if structure is CorrelationStructure.CS:
        block = np.full((block_size, block_size), float(rho))
        np.fill_diagonal(block, 1.0)
    elif structure is CorrelationStructure.AR1:
        block = scipy.linalg.toeplitz(float(rho) ** np.arange(block_size))
    else:
        block = np.eye(block_size)
    correlation = np.kron(np.eye(blocks), block)
    cholesky_factor(correlation)
    return correlation


def cholesky_factor(correlation: FloatArray) -> FloatArray:
    """
    Returns
    -------
    np.ndarray
        The lower triangular L with L Lᵀ = `correlation`

    Raises
    ------
    NotPositiveDefiniteError
        If the matrix is not positive definite.
    """
    try:
        return scipy.linalg.cholesky(correlation, lower=True)
    except scipy.linalg.LinAlgError:
        raise NotPositiveDefiniteError("The correlation matrix is not positive definite") from None


@dataclass(frozen=True)
class SimCase:  # pylint: disable=too-many-instance-attributes
    """
    The settings of a simulated dataset. Covariates have standard normal marginals, the response is
    y = X beta0 + noise with noise ~ N(0, sigma2 I).
    """

    rho: float
    blocks: int
    block_size: int
    structure: CorrelationStructure = CorrelationStructure.CS
    n: int = 80
    beta0: tuple[float, ...] = DEFAULT_BETA0
    sigma2: float = 9.0
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "structure", CorrelationStructure(self.structure))
        object.__setattr__(self, "beta0", tuple(float(value) for value in self.beta0))
        if self.blocks * self.block_size != len(self.beta0):
            raise InvalidConfigError(
                f"{self.blocks} blocks of {self.block_size} covariates do not match {len(self.beta0)} coefficients"
            )
        if self.n < 1:
            raise InvalidConfigError(f"The sample size must be positive, got {self.n}")
        if self.sigma2 < 0:
            raise InvalidConfigError(f"The noise variance must be non-negative, got {self.sigma2}")

    @property
    def n_covariates(self) -> int:
        """The number of covariates"""
        return len(self.beta0)

    def correlation(self) -> FloatArray:
        """The covariate correlation matrix"""
        return block_correlation(self.rho, self.blocks, self.block_size, self.structure)


@dataclass(frozen=True, eq=False)
class SimDataset:
    """A sampled dataset together with the case it was generated from"""

    dataset: Dataset
    case: SimCase
    seed: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "seed", self.case.seed)

    def to_frame(self) -> pd.DataFrame:
        """The covariates and the response `y` as a data frame, in the schema the command line ingests"""
        frame = pd.DataFrame(self.dataset.X, columns=list(self.dataset.names))
        frame["y"] = self.dataset.y
        return frame

    def write_csv(self, path: str | PathLike[Any]) -> None:
        """Write the dataset to a CSV file with a header row"""
        self.to_frame().to_csv(path, index=False)


def simulation_case(case_id: int, seed: int = 0, **overrides: Any) -> SimCase:
    """
    The settings of one of the seven reference cases: uncorrelated covariates (1), a single AR(1) block of six with
    rho 0.5 (2) or 0.9 (3), two CS blocks of three with rho 0.5 (4) or 0.9 (5), three CS blocks of two with rho 0.5 (6)
    or 0.9 (7). All use n = 80, beta0 = (1, 1, 1, 0, 0, 0) and sigma2 = 9.

    Parameters
    ----------
    case_id: int
        The case number from 1 to 7
    seed: int
        The seed of the generator
    overrides
        Replacement values for `n`, `beta0` or `sigma2`

    Returns
    -------
    SimCase
        The case settings
    """
    try:
        rho, blocks, block_size, structure = _REFERENCE_CASES[int(case_id)]
    except KeyError:
        raise InvalidConfigError(f"Unknown simulation case {case_id}, expected 1 to 7") from None
    return SimCase(rho=rho, blocks=blocks, block_size=block_size, structure=structure, seed=seed, **overrides)


def sample(case: SimCase) -> SimDataset:
    """
    Draw a dataset. Rows of X are drawn i.i.d. from N(0, Γ) as L z with the lower Cholesky factor L of Γ and a
    standard normal vector z, then the noise is drawn. The generator is PCG64 seeded with `case.seed`.

    Parameters
    ----------
    case: SimCase
        The settings

    Returns
    -------
    SimDataset
        The sampled dataset
    """
    factor = cholesky_factor(case.correlation())
    rng = np.random.Generator(np.random.PCG64(case.seed))
    X = rng.standard_normal((case.n, case.n_covariates)) @ factor.T
    noise = rng.standard_normal(case.n) * np.sqrt(case.sigma2)
    y = X @ np.asarray(case.beta0) + noise
    logging.getLogger(__name__).debug(
        "Sampled %(n)i rows with %(p)i covariates, seed %(seed)i",
        {"n": case.n, "p": case.n_covariates, "seed": case.seed},
    )
    names = tuple(f"x{k + 1}" for k in range(case.n_covariates))
    return SimDataset(Dataset(X, y, names), case)


def reference_case(case_id: int, seed: int = 0) -> SimDataset:
    """
    Sample one of the seven reference cases, see :func:`simulation_case`.

    Returns
    -------
    SimDataset
        The sampled dataset
    """
    return sample(simulation_case(case_id, seed))
