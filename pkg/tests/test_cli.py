"""Tests of the command line interface"""

import io
import json
import logging

import numpy as np
import pandas as pd
import pytest

from mmpr.cli import RunConfig, main, parse_args, run
from mmpr.command_factory import command_factory
from mmpr.commands import FitCommand
from mmpr.constants import CommandIdentifier, ExitCode, OutputFormat, PenaltyPower, StartPolicy
from mmpr.data_io import read_records
from mmpr.errors import InvalidConfigError
from mmpr.simulation import sample, simulation_case


@pytest.fixture
def dataset_csv(tmp_path):
    """A small simulated dataset of two correlated blocks written by the simulate command"""
    path = tmp_path / "data.csv"
    argv = ["simulate", "--case", "4", "--seed", "1", "--n", "40", "--out", str(path)]
    assert run(parse_args(argv)) is ExitCode.SUCCESS
    return path


def test_parse_defaults():
    """Options not given keep their defaults"""
    config = parse_args(["simulate"])
    assert config.command is CommandIdentifier.SIMULATE
    assert config.seed == 0
    assert config.models == (3,)
    assert config.output is None
    assert config.log_level == logging.WARNING


def test_parse_options(tmp_path):
    """Lists and enumerations are converted"""
    config = parse_args(
        [
            "path",
            "--input",
            "data.csv",
            "--models",
            "1",
            "2",
            "--out",
            str(tmp_path / "path.csv"),
            "--starts",
            "zeros",
            "random",
            "--lambda-grid",
            "2,1,0.5",
            "--c",
            "2",
            "--shared",
            "x1, x2",
            "--format",
            "json",
            "-vv",
        ]
    )
    assert config.models == (1, 2)
    assert config.starts == (StartPolicy.ZEROS, StartPolicy.RANDOM)
    assert config.lambda_grid == (2.0, 1.0, 0.5)
    assert config.c is PenaltyPower.SQUARED
    assert config.shared == ("x1", "x2")
    assert config.fmt is OutputFormat.JSON
    assert config.log_level == logging.DEBUG


@pytest.mark.parametrize(
    "argv",
    [
        ["fit", "--input", "data.csv"],
        ["fit", "--input", "data.csv", "--lambda", "1", "--lambda-cv"],
        ["fit", "--lambda", "1"],
        ["fit", "--input", "data.csv", "--lambda", "1", "--models", "2", "3"],
        ["path", "--input", "data.csv", "--models", "1", "2"],
        ["path", "--input", "data.csv", "--models", "0"],
        ["penalty-surface"],
        ["penalty-surface", "--beta1", "1,2,3"],
        ["inclusion-study", "--case", "1", "--replicates", "0"],
        ["inclusion-study", "--case", "1", "--lambda", "1", "--lambda-cv"],
    ],
)
def test_inconsistent_options(argv):
    """Options that contradict each other are rejected before anything runs"""
    with pytest.raises(InvalidConfigError):
        parse_args(argv)


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["unknown"],
        ["fit", "--c", "3"],
        ["fit", "--lambda", "abc"],
        ["simulate", "--case", "8"],
    ],
)
def test_usage_error(argv, capsys):
    """Unparsable arguments exit with the usage error status"""
    with pytest.raises(SystemExit) as excinfo:
        parse_args(argv)
    assert excinfo.value.code == ExitCode.USAGE_ERROR
    assert "error" in capsys.readouterr().err


def test_run_config_conversion():
    """Strings are accepted where enumerations are expected"""
    config = RunConfig(command="penalty-surface", beta1=(1.0, 0.0), c=2, starts=("zeros", "exhaustive"))
    assert config.command is CommandIdentifier.PENALTY_SURFACE
    assert config.c is PenaltyPower.SQUARED
    assert config.starts == (StartPolicy.ZEROS, StartPolicy.EXHAUSTIVE)
    with pytest.raises(InvalidConfigError):
        RunConfig(command="simulate", structure="spiral")


def test_simulate(dataset_csv):
    """The written dataset equals the sampled reference case"""
    frame = pd.read_csv(dataset_csv)
    expected = sample(simulation_case(4, seed=1, n=40)).to_frame()
    assert list(frame.columns) == ["x1", "x2", "x3", "x4", "x5", "x6", "y"]
    assert len(frame) == 40
    np.testing.assert_allclose(frame.to_numpy(), expected.to_numpy(), rtol=1e-15)


def test_path_deterministic(dataset_csv, tmp_path):
    """Two runs with the same seed write identical files"""
    outputs = []
    for name in ("first", "second"):
        folder = tmp_path / name
        folder.mkdir()
        argv = [
            "path",
            "--input",
            str(dataset_csv),
            "--models",
            "2",
            "--n-lambda",
            "3",
            "--lambda-ratio",
            "0.1",
            "--seed",
            "5",
            "--out",
            str(folder / "path.csv"),
            "--mse-out",
            str(folder / "mse.csv"),
        ]
        assert run(parse_args(argv)) is ExitCode.SUCCESS
        outputs.append(folder)
    for name in ("path.csv", "path_raw.csv", "mse.csv"):
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()

    path = pd.read_csv(outputs[0] / "path.csv")
    assert len(path) == 3 * 2 * 6
    assert len(pd.read_csv(outputs[0] / "mse.csv")) == 3 * 2


def test_path_several_models(dataset_csv, tmp_path):
    """Every number of models gets its own file"""
    out = tmp_path / "path.json"
    argv = ["path", "--input", str(dataset_csv), "--models", "1", "2", "--n-lambda", "2", "--out", str(out)]
    assert run(parse_args(argv)) is ExitCode.SUCCESS
    for models in (1, 2):
        records = read_records(tmp_path / f"path_m{models}.json")
        assert set(records["model"]) == set(range(1, models + 1))
        assert (tmp_path / f"path_m{models}_raw.json").exists()
    assert not out.exists()


def test_path_to_stdout(dataset_csv, capsys):
    """Without an output file both scales are written to stdout and told apart by the scale column"""
    argv = ["path", "--input", str(dataset_csv), "--models", "2", "--n-lambda", "2"]
    assert run(parse_args(argv)) is ExitCode.SUCCESS
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert set(frame["scale"]) == {"standardized", "raw"}
    raw = frame[frame["scale"] == "raw"]
    assert len(raw) == 2 * 2 * 7
    assert set(raw.loc[raw["covariate"] == "(intercept)", "model"]) == {1, 2}
    assert len(frame[frame["scale"] == "standardized"]) == 2 * 2 * 6


def test_fit_fully_penalized(dataset_csv, tmp_path):
    """A huge sparsity weight leaves every model empty"""
    out = tmp_path / "fit.csv"
    argv = ["fit", "--input", str(dataset_csv), "--lambda", "1e9", "--out", str(out)]
    assert run(parse_args(argv)) is ExitCode.SUCCESS
    frame = pd.read_csv(out)
    standardized = frame[frame["scale"] == "standardized"]
    assert len(standardized) == 3 * 6
    np.testing.assert_array_equal(standardized["coefficient"], 0.0)
    assert set(frame["omega"]) == {0.0}


def test_metrics(dataset_csv, tmp_path):
    """One row per model"""
    out = tmp_path / "metrics.csv"
    argv = ["metrics", "--input", str(dataset_csv), "--models", "2", "--lambda", "5", "--omega", "1", "--out", str(out)]
    assert run(parse_args(argv)) is ExitCode.SUCCESS
    frame = pd.read_csv(out)
    assert list(frame["model"]) == [1, 2]
    np.testing.assert_allclose(frame["similarity_1"].iloc[0], 1.0)


def test_inclusion_study(tmp_path):
    """A small study writes the model rows and the any row"""
    out = tmp_path / "inclusion.json"
    argv = [
        "inclusion-study",
        "--case",
        "1",
        "--n",
        "40",
        "--replicates",
        "2",
        "--models",
        "2",
        "--lambda",
        "5",
        "--out",
        str(out),
    ]
    assert run(parse_args(argv)) is ExitCode.SUCCESS
    frame = read_records(out)
    assert list(frame["model"]) == ["1", "2", "any"]
    assert set(frame["replicates"]) == {2}


def test_penalty_surface(tmp_path, caplog):
    """The first model on x1 only gives a penalty of |beta21|"""
    out = tmp_path / "surface.csv"
    argv = [
        "penalty-surface",
        "--beta1",
        "1,0",
        "--d",
        "1",
        "--lambda",
        "0",
        "--omega",
        "1",
        "--resolution",
        "11",
        "--out",
        str(out),
    ]
    with caplog.at_level(logging.INFO, logger="mmpr.commands"):
        assert run(parse_args(argv)) is ExitCode.SUCCESS
    assert "11 points per axis" in caplog.text
    frame = pd.read_csv(out)
    assert len(frame) == 11 * 11
    assert "sse" not in frame.columns
    np.testing.assert_allclose(frame["penalty"], np.abs(frame["beta21"]), atol=1e-12)


def test_missing_input_file(tmp_path, capsys):
    """A missing file is a data error reported as JSON on stderr"""
    config = parse_args(["fit", "--input", str(tmp_path / "missing.csv"), "--lambda", "1"])
    assert run(config) is ExitCode.DATA_ERROR
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["command"] == "fit"
    assert error["exit_code"] == int(ExitCode.DATA_ERROR)
    assert error["error"] == "FileNotFoundError"


def test_malformed_input_file(tmp_path, capsys):
    """Rows that do not match the header are a data error"""
    path = tmp_path / "ragged.csv"
    path.write_text("a,b,y\n1,2,3\n4,5,6,7,8\n", encoding="utf-8")
    assert run(parse_args(["fit", "--input", str(path), "--lambda", "1"])) is ExitCode.DATA_ERROR
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "MalformedInputError"


def test_unknown_shared_covariate(dataset_csv, capsys):
    """Shared covariates must exist in the data"""
    config = parse_args(["fit", "--input", str(dataset_csv), "--lambda", "1", "--shared", "z"])
    assert run(config) is ExitCode.USAGE_ERROR
    assert "InvalidConfigError" in capsys.readouterr().err


def test_main_inconsistent_options(capsys):
    """The entry point exits with the usage status of the configuration error"""
    with pytest.raises(SystemExit) as excinfo:
        main(["fit"])
    assert excinfo.value.code == ExitCode.USAGE_ERROR
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["command"] is None


def test_command_factory():
    """Every sub-command is registered"""
    assert set(command_factory.identifiers) == set(CommandIdentifier)
    assert isinstance(command_factory.get("fit"), FitCommand)
    with pytest.raises(InvalidConfigError):
        command_factory.get("refit")
