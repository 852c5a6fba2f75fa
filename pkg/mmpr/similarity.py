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
Cosine similarity between models. A vector of zeros is defined to have similarity 0 with every vector, an empty model
is as dissimilar as it gets.
"""
from __future__ import annotations

from typing import Collection

import numpy as np
import numpy.typing as npt
from sklearn.metrics.pairwise import cosine_similarity as _pairwise_cosine

from .errors import LengthMismatchError
from .model import CoefficientSet, FloatArray


def cosine_similarity(a: npt.ArrayLike, b: npt.ArrayLike) -> float:
    """
    The cosine similarity sum_k a_k b_k / (||a|| ||b||) of two vectors.

    Parameters
    ----------
    a: array-like
        The first vector
    b: array-like
        The second vector

    Returns
    -------
    float
        A value in [-1, 1], or 0 if either vector is all zeros

    Raises
    ------
    LengthMismatchError
        If the vectors differ in length.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise LengthMismatchError(f"Cannot compare vectors of length {a.size} and {b.size}")
    # sklearn normalizes zero vectors to zero, which gives the similarity 0 we want
    return float(np.clip(_pairwise_cosine(a[np.newaxis, :], b[np.newaxis, :])[0, 0], -1.0, 1.0))


def similarity_matrix(coef: CoefficientSet | npt.ArrayLike, exclude: Collection[int] = ()) -> FloatArray:
    """
    The M×M matrix of cosine similarities between the absolute coefficient vectors of all models.

    Parameters
    ----------
    coef: CoefficientSet or array-like
        The M×p coefficients
    exclude: collection of int
        Covariates left out of the comparison, typically those shared by all models

    Returns
    -------
    np.ndarray
        The symmetric similarity matrix with entries in [0, 1]
    """
    beta = coef.beta if isinstance(coef, CoefficientSet) else np.atleast_2d(np.asarray(coef, dtype=np.float64))
    if exclude:
        beta = np.delete(beta, sorted(exclude), axis=1)
    if beta.shape[1] == 0:
        return np.zeros((beta.shape[0], beta.shape[0]))
    return np.clip(_pairwise_cosine(np.abs(beta)), 0.0, 1.0)


def max_pairwise_similarity(coef: CoefficientSet | npt.ArrayLike, exclude: Collection[int] = ()) -> float:
    """
    Returns
    -------
    float
        The largest cosine similarity between the absolute coefficients of two distinct models, 0 for a single model
    """
    matrix = similarity_matrix(coef, exclude)
    if matrix.shape[0] < 2:
        return 0.0
    return float(matrix[np.triu_indices_from(matrix, k=1)].max())
