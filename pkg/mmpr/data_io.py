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
Reading datasets from CSV files and writing result tables as CSV, JSON or CBOR records.
"""
from __future__ import annotations

import json
import logging
from os import PathLike
from pathlib import Path
from typing import Any, NamedTuple

import cbor2
import numpy as np
import pandas as pd

from .constants import OutputFormat, Scale
from .errors import (
    InvalidConfigError,
    MalformedInputError,
    MissingColumnError,
    MissingValueError,
    NonNumericCellError,
)
from .metrics import DiversityReport, InclusionTable
from .model import CoefficientSet, Dataset, StandardizedDesign, destandardize
from .tuner import PathResult

PATH_COLUMNS = (
    "lambda",
    "omega",
    "model",
    "covariate",
    "scale",
    "coefficient",
    "sse",
    "max_similarity",
    "converged",
    "omega_capped",
)

INTERCEPT = "(intercept)"


class Ingested(NamedTuple):
    """A dataset read from a file and the number of empty cells replaced by zero"""

    dataset: Dataset
    filled_cells: int


def ingest_csv(path: str | PathLike[Any], response: str, fill_zero: bool = False) -> Ingested:
    """
    Read a dataset from a CSV file with a header row. All columns except the response are covariates, in file order.

    Parameters
    ----------
    path: str or PathLike
        The input file
    response: str
        The name of the response column
    fill_zero: bool
        Replace empty cells by zero instead of failing. Useful for compositions, where a missing component is absent.

    Returns
    -------
    Ingested
        The dataset and the number of filled cells

    Raises
    ------
    MalformedInputError
        If the file is not valid UTF-8 or a row has more fields than the header.
    MissingColumnError
        If the response column is not found.
    MissingValueError
        If a cell is empty and `fill_zero` is not set.
    NonNumericCellError
        If a cell is not a finite number.
    """
    logger = logging.getLogger(__name__)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise MissingColumnError(f"'{path}' has no header row") from None
    except UnicodeDecodeError as exc:
        raise MalformedInputError(f"'{path}' is not valid UTF-8: {exc.reason} at byte {exc.start}") from None
    except pd.errors.ParserError as exc:
        raise MalformedInputError(f"'{path}' cannot be parsed: {str(exc).strip()}") from None
    frame.columns = [str(column).strip() for column in frame.columns]
    if response not in frame.columns:
        raise MissingColumnError(
            f"Response column '{response}' not found in '{path}', columns are {list(frame.columns)}"
        )

    cells = frame.apply(lambda column: column.str.strip())
    empty = (cells == "").to_numpy()
    values = cells.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    invalid = ~np.isfinite(values) & ~empty
    problems = invalid | (empty & (not fill_zero))
    if problems.any():
        # Report the first problem in reading order, rows are numbered from 1 below the header
        row, col = np.argwhere(problems)[0]
        column = frame.columns[col]
        if empty[row, col]:
            raise MissingValueError(int(row) + 1, column)
        raise NonNumericCellError(int(row) + 1, column, frame.iat[row, col])
    values[empty] = 0.0

    response_index = frame.columns.get_loc(response)
    covariates = [column for column in frame.columns if column != response]
    dataset = Dataset(np.delete(values, response_index, axis=1), values[:, response_index], tuple(covariates))
    filled = int(empty.sum())
    logger.info(
        "Read %(rows)i rows with %(covariates)i covariates from '%(path)s'",
        {"rows": dataset.n_samples, "covariates": dataset.n_covariates, "path": path},
    )
    if filled:
        logger.warning("%(filled)i empty cells set to zero in '%(path)s'", {"filled": filled, "path": path})
    return Ingested(dataset, filled)


def output_format(path: str | PathLike[Any] | None, fmt: OutputFormat | str | None = None) -> OutputFormat:
    """
    The explicit format if given, else the format matching the file extension, else CSV.
    """
    if fmt is not None:
        try:
            return OutputFormat(fmt)
        except ValueError:
            raise InvalidConfigError(f"Unknown output format '{fmt}'") from None
    if path is not None:
        try:
            return OutputFormat(Path(path).suffix.lstrip(".").lower())
        except ValueError:
            pass
    return OutputFormat.CSV


def _records(frame: pd.DataFrame) -> list[dict[str, Any]]:
    # Missing values are encoded as null
    return [
        {key: (None if isinstance(value, float) and np.isnan(value) else value) for key, value in record.items()}
        for record in frame.to_dict(orient="records")
    ]


def render_records(frame: pd.DataFrame, fmt: OutputFormat | str) -> bytes:
    """
    Serialize a table as a list of records.

    Parameters
    ----------
    frame: pd.DataFrame
        The table
    fmt: OutputFormat or str
        CSV with a header row, a JSON array of objects or a CBOR array of maps

    Returns
    -------
    bytes
        The encoded table
    """
    fmt = OutputFormat(fmt)
    if fmt is OutputFormat.CSV:
        return frame.to_csv(index=False, lineterminator="\n").encode("utf-8")
    if fmt is OutputFormat.JSON:
        return json.dumps(_records(frame)).encode("utf-8")
    return cbor2.dumps(_records(frame))


def write_records(frame: pd.DataFrame, path: str | PathLike[Any], fmt: OutputFormat | str | None = None) -> None:
    """Write a table to `path`, see :func:`render_records`"""
    Path(path).write_bytes(render_records(frame, output_format(path, fmt)))


def read_records(path: str | PathLike[Any], fmt: OutputFormat | str | None = None) -> pd.DataFrame:
    """
    Read a table written by :func:`write_records`.

    Returns
    -------
    pd.DataFrame
        The records
    """
    fmt = output_format(path, fmt)
    if fmt is OutputFormat.CSV:
        return pd.read_csv(path)
    if fmt is OutputFormat.JSON:
        return pd.DataFrame.from_records(json.loads(Path(path).read_text(encoding="utf-8")))
    return pd.DataFrame.from_records(cbor2.loads(Path(path).read_bytes()))


def _model_label(index: int) -> int:
    # Models are numbered from 1 in all outputs
    return index + 1


def path_frame(result: PathResult, design: StandardizedDesign | None = None) -> pd.DataFrame:
    """
    The long table of a path, one row per lambda, model and covariate.

    Parameters
    ----------
    result: PathResult
        The path
    design: StandardizedDesign, optional
        If given, the coefficients are reported on the raw scale, with one extra intercept row per model

    Returns
    -------
    pd.DataFrame
        The columns lambda, omega, model, covariate, scale, coefficient, sse, max_similarity, converged and
        omega_capped
    """
    rows = []
    for record in result.records:
        if design is None:
            beta, intercepts, scale = record.coef.beta, None, Scale.STANDARDIZED
        else:
            raw = destandardize(record.coef, design)
            beta, intercepts, scale = raw.coef.beta, raw.intercepts, Scale.RAW
        for i, coefficients in enumerate(beta):
            common = {"lambda": record.lambda_, "omega": record.omega, "model": _model_label(i), "scale": scale.value}
            flags = {
                "sse": float(record.per_model_sse[i]),
                "max_similarity": record.max_pairwise_similarity,
                "converged": record.converged,
                "omega_capped": record.omega_capped,
            }
            if intercepts is not None:
                rows.append(common | {"covariate": INTERCEPT, "coefficient": float(intercepts[i])} | flags)
            for name, value in zip(result.names, coefficients):
                rows.append(common | {"covariate": name, "coefficient": float(value)} | flags)
    return pd.DataFrame(rows, columns=list(PATH_COLUMNS))


def path_mse_frame(result: PathResult) -> pd.DataFrame:
    """One row per lambda and model with the SSE, the MSE and the diagnostics of the omega search"""
    rows = [
        {
            "lambda": record.lambda_,
            "omega": record.omega,
            "model": _model_label(i),
            "sse": float(record.per_model_sse[i]),
            "mse": float(record.per_model_mse[i]),
            "objective": record.objective,
            "converged": record.converged,
            "omega_capped": record.omega_capped,
            "monotone_violation": record.monotone_violation,
            "evaluations": record.evaluations,
        }
        for record in result.records
        for i in range(record.coef.models)
    ]
    return pd.DataFrame(rows)


def fit_frame(  # pylint: disable=too-many-arguments
    design: StandardizedDesign,
    coef: CoefficientSet,
    lambda_: float,
    omega: float,
    objective: float,
    converged: bool,
) -> pd.DataFrame:
    """
    The coefficients of a single fit on both scales. Every row is tagged with its scale, the raw scale adds one
    intercept row per model.
    """
    raw = destandardize(coef, design)
    common = {"lambda": lambda_, "omega": omega, "objective": objective, "converged": converged}
    rows = []
    for i in range(coef.models):
        tagged = [(Scale.STANDARDIZED, name, value) for name, value in zip(design.names, coef.beta[i])]
        tagged.append((Scale.RAW, INTERCEPT, raw.intercepts[i]))
        tagged.extend((Scale.RAW, name, value) for name, value in zip(design.names, raw.coef.beta[i]))
        rows.extend(
            {"model": _model_label(i), "covariate": name, "scale": scale.value, "coefficient": value} | common
            for scale, name, value in tagged
        )
    frame = pd.DataFrame(rows)
    frame["coefficient"] = frame["coefficient"].astype(np.float64)
    return frame


def inclusion_frame(table: InclusionTable) -> pd.DataFrame:
    """One row per aligned model plus a row `any` for the selection by at least one model"""
    frame = pd.DataFrame(table.proportions, columns=list(table.names))
    frame.insert(0, "model", [str(_model_label(i)) for i in range(table.proportions.shape[0])])
    any_row = pd.DataFrame([["any", *table.any_model]], columns=frame.columns)
    frame = pd.concat([frame, any_row], ignore_index=True)
    frame["replicates"] = table.replicates
    return frame


def diversity_frame(report: DiversityReport) -> pd.DataFrame:
    """One row per model with its errors and its similarity and prediction correlation to every model"""
    labels = [_model_label(i) for i in range(report.models)]
    frame = pd.DataFrame({"model": labels, "sse": report.per_model_sse, "mse": report.per_model_mse})
    for j, label in enumerate(labels):
        frame[f"similarity_{label}"] = report.coef_similarity[:, j]
    for j, label in enumerate(labels):
        frame[f"correlation_{label}"] = report.pred_correlation[:, j]
    return frame
