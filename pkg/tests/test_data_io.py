"""Tests of the CSV ingestion and the result tables"""

import json
import logging

import cbor2
import numpy as np
import pandas as pd
import pytest

from mmpr.constants import OutputFormat
from mmpr.data_io import (
    INTERCEPT,
    PATH_COLUMNS,
    diversity_frame,
    fit_frame,
    inclusion_frame,
    ingest_csv,
    output_format,
    path_frame,
    path_mse_frame,
    read_records,
    render_records,
    write_records,
)
from mmpr.errors import (
    InvalidConfigError,
    MalformedInputError,
    MissingColumnError,
    MissingValueError,
    NonNumericCellError,
)
from mmpr.metrics import InclusionTable, diversity_report
from mmpr.model import CoefficientSet, destandardize
from mmpr.tuner import PathSpec, fit_path, lambda_max


@pytest.fixture
def write_csv(tmp_path):
    """Write text to a CSV file in a temporary directory"""

    def writer(text, name="data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return writer


def test_ingest_small_file(write_csv):
    """All columns but the response are covariates"""
    ingested = ingest_csv(write_csv("a,b,y\n1,2,3\n4,5,6\n7,8.5,9\n"), "y")
    assert ingested.dataset.names == ("a", "b")
    assert ingested.dataset.n_samples == 3
    np.testing.assert_array_equal(ingested.dataset.X, [[1, 2], [4, 5], [7, 8.5]])
    np.testing.assert_array_equal(ingested.dataset.y, [3, 6, 9])
    assert ingested.filled_cells == 0


def test_ingest_response_in_the_middle(write_csv):
    """Covariates keep their file order"""
    ingested = ingest_csv(write_csv(" a , y ,b\n1, 2 ,3\n4,5,6\n"), "y")
    assert ingested.dataset.names == ("a", "b")
    np.testing.assert_array_equal(ingested.dataset.X, [[1, 3], [4, 6]])
    np.testing.assert_array_equal(ingested.dataset.y, [2, 5])


def test_ingest_fill_zero(write_csv, caplog):
    """An empty cell becomes zero and is counted"""
    path = write_csv("a,b,y\n1,,3\n4,5,6\n")
    with caplog.at_level(logging.WARNING, logger="mmpr.data_io"):
        ingested = ingest_csv(path, "y", fill_zero=True)
    assert ingested.dataset.X[0, 1] == 0.0
    assert ingested.filled_cells == 1
    assert "1 empty cells set to zero" in caplog.text
    assert all(record.levelno == logging.WARNING for record in caplog.records if "empty cells" in record.message)


def test_ingest_missing_value(write_csv):
    """Without filling, an empty cell is reported with its row and column"""
    with pytest.raises(MissingValueError) as excinfo:
        ingest_csv(write_csv("a,b,y\n1,2,3\n4,,6\n"), "y")
    assert (excinfo.value.row, excinfo.value.column) == (2, "b")
    assert "row 2" in str(excinfo.value)


def test_ingest_non_numeric(write_csv):
    """Text and non-finite numbers are rejected, the first problem in reading order is reported"""
    with pytest.raises(NonNumericCellError) as excinfo:
        ingest_csv(write_csv("a,b,y\n1,2,3\n4,abc,x\n"), "y", fill_zero=True)
    assert (excinfo.value.row, excinfo.value.column) == (2, "b")
    assert "'abc'" in str(excinfo.value)

    with pytest.raises(NonNumericCellError):
        ingest_csv(write_csv("a,y\n1,2\ninf,3\n"), "y")


def test_ingest_missing_response(write_csv):
    """The response column must exist"""
    with pytest.raises(MissingColumnError):
        ingest_csv(write_csv("a,b\n1,2\n"), "y")
    with pytest.raises(MissingColumnError):
        ingest_csv(write_csv(""), "y")


def test_ingest_invalid_encoding(tmp_path):
    """Bytes that are not UTF-8 are a data error"""
    path = tmp_path / "latin.csv"
    path.write_bytes(b"a,b,y\n1,2,3\n\xff\xfe,4,5\n")
    with pytest.raises(MalformedInputError) as excinfo:
        ingest_csv(path, "y")
    assert "UTF-8" in str(excinfo.value)


def test_ingest_ragged_row(write_csv):
    """A row with more fields than the header is a data error"""
    with pytest.raises(MalformedInputError):
        ingest_csv(write_csv("a,b,y\n1,2,3\n4,5,6,7,8\n"), "y")


def test_ingest_complete_file_is_quiet(write_csv, caplog):
    """Nothing is reported above INFO if no cell was filled"""
    with caplog.at_level(logging.INFO, logger="mmpr.data_io"):
        ingest_csv(write_csv("a,y\n1,2\n3,4\n"), "y", fill_zero=True)
    assert not [record for record in caplog.records if record.levelno >= logging.WARNING]


def test_output_format():
    """Explicit format first, then the file extension, then CSV"""
    assert output_format("out.json") is OutputFormat.JSON
    assert output_format("out.CBOR") is OutputFormat.CBOR
    assert output_format("out.txt") is OutputFormat.CSV
    assert output_format(None) is OutputFormat.CSV
    assert output_format("out.json", "cbor") is OutputFormat.CBOR
    with pytest.raises(InvalidConfigError):
        output_format("out.csv", "xml")


@pytest.fixture
def small_frame():
    """A table with numbers, text and flags"""
    return pd.DataFrame(
        {"lambda": [1.5, 0.25], "model": [1, 2], "covariate": ["x1", "x2"], "converged": [True, False]}
    )


@pytest.mark.parametrize("fmt", list(OutputFormat))
def test_records_round_trip(tmp_path, small_frame, fmt):
    """Every format reads back the same table"""
    path = tmp_path / f"table.{fmt.value}"
    write_records(small_frame, path)
    pd.testing.assert_frame_equal(read_records(path), small_frame)


def test_render_records(small_frame):
    """CSV uses Unix line endings, JSON and CBOR are arrays of records"""
    expected = "lambda,model,covariate,converged\n1.5,1,x1,True\n0.25,2,x2,False\n"
    assert render_records(small_frame, "csv").decode() == expected
    records = json.loads(render_records(small_frame, OutputFormat.JSON))
    assert records[0] == {"lambda": 1.5, "model": 1, "covariate": "x1", "converged": True}
    assert cbor2.loads(render_records(small_frame, OutputFormat.CBOR)) == records


def test_render_missing_values():
    """NaN is written as null"""
    frame = pd.DataFrame({"sse": [1.0, np.nan]})
    assert json.loads(render_records(frame, "json"))[1]["sse"] is None
    assert cbor2.loads(render_records(frame, "cbor"))[1]["sse"] is None


@pytest.fixture
def small_path(make_design):
    """A two-point path of two models on three covariates"""
    design = make_design(n=40, p=3, seed=6)
    largest = lambda_max(design)
    return design, fit_path(design, PathSpec(models=2, lambda_grid=(largest, 0.2 * largest)))


def test_path_frame_standardized(small_path):
    """One row per lambda, model and covariate"""
    design, path = small_path
    frame = path_frame(path)
    assert list(frame.columns) == list(PATH_COLUMNS)
    assert len(frame) == 2 * 2 * 3
    assert set(frame["scale"]) == {"standardized"}
    assert set(frame["model"]) == {1, 2}
    np.testing.assert_array_equal(frame["coefficient"], path.coefficients().ravel())
    assert list(frame["covariate"][:3]) == list(design.names)


def test_path_frame_raw(small_path):
    """The raw scale adds an intercept row per model"""
    design, path = small_path
    frame = path_frame(path, design)
    assert len(frame) == 2 * 2 * 4
    assert set(frame["scale"]) == {"raw"}
    raw = destandardize(path.records[1].coef, design)
    last = frame[frame["lambda"] == path.records[1].lambda_]
    model2 = last[last["model"] == 2]
    assert model2["covariate"].iloc[0] == INTERCEPT
    assert model2["coefficient"].iloc[0] == pytest.approx(raw.intercepts[1])
    np.testing.assert_allclose(model2["coefficient"].iloc[1:], raw.coef.beta[1])


def test_path_mse_frame(small_path):
    """One row per lambda and model"""
    design, path = small_path
    frame = path_mse_frame(path)
    assert len(frame) == 4
    np.testing.assert_allclose(frame["mse"] * design.n_samples, frame["sse"])
    assert {"objective", "evaluations", "monotone_violation"} <= set(frame.columns)


def test_fit_frame(design):
    """Both scales of a single fit"""
    coef = CoefficientSet(np.random.default_rng(3).standard_normal((2, 6)))
    frame = fit_frame(design, coef, lambda_=1.0, omega=2.0, objective=3.0, converged=True)
    assert len(frame) == 2 * (2 * 6 + 1)
    standardized = frame[frame["scale"] == "standardized"]
    np.testing.assert_array_equal(standardized["coefficient"], coef.beta.ravel())
    raw = frame[(frame["scale"] == "raw") & (frame["covariate"] == INTERCEPT)]
    np.testing.assert_allclose(raw["coefficient"], destandardize(coef, design).intercepts)
    assert set(frame["lambda"]) == {1.0}


def test_inclusion_frame():
    """Model rows, the any row and the number of replicates"""
    table = InclusionTable.from_fits([CoefficientSet([[1.0, 0.0], [0.0, 2.0]])], names=("a", "b"))
    frame = inclusion_frame(table)
    assert list(frame["model"]) == ["1", "2", "any"]
    assert list(frame.columns) == ["model", "a", "b", "replicates"]
    np.testing.assert_array_equal(frame[["a", "b"]].to_numpy(dtype=float), [[1, 0], [0, 1], [1, 1]])
    assert set(frame["replicates"]) == {1}


def test_diversity_frame(design):
    """One row per model with the similarity and correlation columns"""
    report = diversity_report(design, CoefficientSet(np.random.default_rng(4).standard_normal((3, 6))))
    frame = diversity_frame(report)
    assert list(frame.columns) == [
        "model",
        "sse",
        "mse",
        "similarity_1",
        "similarity_2",
        "similarity_3",
        "correlation_1",
        "correlation_2",
        "correlation_3",
    ]
    np.testing.assert_allclose(frame[["similarity_1", "similarity_2", "similarity_3"]], report.coef_similarity)
