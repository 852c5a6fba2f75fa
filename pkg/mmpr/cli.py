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
The command line interface. Every sub-command writes a table of records to a file or to stdout. Errors are reported
as a single JSON object on stderr, the exit status is 0 on success, 1 for usage errors, 2 for data errors and 3 for
numerical failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import NoReturn, Sequence

import numpy as np

from ._version import __version__
from .command_factory import command_factory
from .constants import (
    CommandIdentifier,
    CorrelationStructure,
    ExitCode,
    InitMethod,
    OutputFormat,
    PenaltyPower,
    StartPolicy,
)
from .errors import InvalidConfigError, MmprException
from .simulation import DEFAULT_BETA0
from .surfaces import DEFAULT_BOUNDS, DEFAULT_RESOLUTION

# Commands that fit the models at a single lambda
_SINGLE_FIT_COMMANDS = (CommandIdentifier.FIT, CommandIdentifier.METRICS)


@dataclass(frozen=True)
class RunConfig:  # pylint: disable=too-many-instance-attributes
    """
    The settings of a single invocation. Defaults match the command line defaults.
    """

    command: CommandIdentifier
    input: Path | None = None
    response: str = "y"
    fill_zero: bool = False
    output: Path | None = None
    fmt: OutputFormat | None = None
    models: tuple[int, ...] = (3,)
    c: PenaltyPower = PenaltyPower.ABSOLUTE
    d: PenaltyPower = PenaltyPower.ABSOLUTE
    lambda_: float | None = None
    lambda_cv: bool = False
    omega: float | None = None
    lambda_grid: tuple[float, ...] | None = None
    n_lambda: int = 50
    lambda_ratio: float = 1e-3
    rho_thresh: float = 0.3
    omega_max: float = 1e6
    omega_tol: float = 1e-2
    omega_start: float = 1e-4
    eps: float = 1e-6
    max_sweeps: int = 10000
    starts: tuple[StartPolicy, ...] = (StartPolicy.ZEROS,)
    random_starts: int = 8
    init: InitMethod = InitMethod.RIDGE
    shared: tuple[str, ...] = ()
    seed: int = 0
    folds: int = 10
    mse_out: Path | None = None
    case: int | None = None
    replicates: int = 16
    n: int = 80
    rho: float = 0.0
    blocks: int = 1
    block_size: int = 6
    structure: CorrelationStructure = CorrelationStructure.CS
    beta0: tuple[float, ...] = DEFAULT_BETA0
    sigma2: float = 9.0
    beta1: tuple[float, ...] | None = None
    bounds: float = DEFAULT_BOUNDS
    resolution: int = DEFAULT_RESOLUTION
    verbosity: int = 0

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "command", CommandIdentifier(self.command))
            object.__setattr__(self, "c", PenaltyPower(self.c))
            object.__setattr__(self, "d", PenaltyPower(self.d))
            object.__setattr__(self, "structure", CorrelationStructure(self.structure))
            object.__setattr__(self, "init", InitMethod(self.init))
            object.__setattr__(self, "starts", tuple(StartPolicy(policy) for policy in self.starts))
            if self.fmt is not None:
                object.__setattr__(self, "fmt", OutputFormat(self.fmt))
        except ValueError as exc:
            raise InvalidConfigError(str(exc)) from None
        for name in ("input", "output", "mse_out"):
            if getattr(self, name) is not None:
                object.__setattr__(self, name, Path(getattr(self, name)))
        object.__setattr__(self, "models", tuple(int(m) for m in self.models))
        object.__setattr__(self, "shared", tuple(self.shared))
        self.__validate()

    def __validate(self) -> None:
        command = self.command
        if not self.models or min(self.models) < 1:
            raise InvalidConfigError(f"The number of models must be positive, got {self.models}")
        if command is not CommandIdentifier.PATH and len(self.models) > 1:
            raise InvalidConfigError(f"'{command.value}' fits a single number of models, got {self.models}")
        if len(self.models) > 1 and self.output is None:
            raise InvalidConfigError("Paths for several numbers of models require --out")
        if command in _SINGLE_FIT_COMMANDS and (self.lambda_ is None) == (not self.lambda_cv):
            raise InvalidConfigError(f"'{command.value}' requires exactly one of --lambda and --lambda-cv")
        if command is CommandIdentifier.INCLUSION_STUDY and self.lambda_cv and self.lambda_ is not None:
            raise InvalidConfigError("--lambda and --lambda-cv are mutually exclusive")
        if command in _SINGLE_FIT_COMMANDS + (CommandIdentifier.PATH,) and self.input is None:
            raise InvalidConfigError(f"'{command.value}' requires --input")
        if command is CommandIdentifier.PENALTY_SURFACE and self.input is None and self.beta1 is None:
            raise InvalidConfigError("'penalty-surface' requires --beta1, --input or both")
        if self.beta1 is not None and len(self.beta1) != 2:
            raise InvalidConfigError(f"--beta1 takes two values, got {len(self.beta1)}")
        if self.replicates < 1:
            raise InvalidConfigError(f"At least one replicate is required, got {self.replicates}")
        if self.verbosity < 0:
            raise InvalidConfigError(f"The verbosity must be non-negative, got {self.verbosity}")

    @property
    def log_level(self) -> int:
        """WARNING by default, INFO with one -v, DEBUG with two or more"""
        if self.verbosity >= 2:
            return logging.DEBUG
        return logging.INFO if self.verbosity == 1 else logging.WARNING


class _ArgumentParser(argparse.ArgumentParser):
    """An argument parser exiting with the usage error status"""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(ExitCode.USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _float_list(value: str) -> tuple[float, ...]:
    try:
        return tuple(float(item) for item in value.split(",") if item.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got '{value}'") from None


def _name_list(value: str) -> tuple[str, ...]:
    return tuple(item.strip() for item in value.split(",") if item.strip())


def _common_arguments() -> argparse.ArgumentParser:
    parser = _ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    parser.add_argument("--seed", type=int, help="seed of all random choices (default: 0)")
    parser.add_argument(
        "-v", "--verbose", dest="verbosity", action="count", help="log progress, repeat for debug output"
    )
    parser.add_argument("--out", dest="output", type=Path, help="output file (default: stdout)")
    parser.add_argument(
        "--format", dest="fmt", choices=[fmt.value for fmt in OutputFormat], help="output format (default: by suffix)"
    )
    return parser


def _data_arguments() -> argparse.ArgumentParser:
    parser = _ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    parser.add_argument("--input", type=Path, help="CSV file with a header row")
    parser.add_argument("--response", help="name of the response column (default: y)")
    parser.add_argument("--fill-zero", action="store_true", help="treat empty cells as zero")
    return parser


def _penalty_arguments() -> argparse.ArgumentParser:
    parser = _ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    parser.add_argument("--c", type=int, choices=(1, 2), help="sparsity power (default: 1)")
    parser.add_argument("--d", type=int, choices=(1, 2), help="similarity power (default: 1)")
    parser.add_argument("--lambda", dest="lambda_", type=float, help="sparsity weight")
    parser.add_argument("--omega", type=float, help="similarity weight, tuned to --rho-thresh if not given")
    return parser


def _model_arguments() -> argparse.ArgumentParser:
    parser = _ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    parser.add_argument("--models", type=int, nargs="+", help="number of models (default: 3)")
    parser.add_argument("--lambda-cv", action="store_true", help="select lambda by cross-validated LASSO")
    parser.add_argument("--folds", type=int, help="folds of the cross validation (default: 10)")
    parser.add_argument("--rho-thresh", type=float, help="similarity ceiling (default: 0.3)")
    parser.add_argument("--omega-max", type=float, help="largest similarity weight tried (default: 1e6)")
    parser.add_argument("--omega-tol", type=float, help="relative width of the omega bracket (default: 1e-2)")
    parser.add_argument("--omega-start", type=float, help="first non-zero similarity weight (default: 1e-4)")
    parser.add_argument("--eps", type=float, help="convergence tolerance (default: 1e-6)")
    parser.add_argument("--max-sweeps", type=int, help="sweep limit of the solver (default: 10000)")
    parser.add_argument(
        "--starts",
        nargs="+",
        choices=[policy.value for policy in StartPolicy if policy is not StartPolicy.WARM],
        help="start families of the solver (default: zeros)",
    )
    parser.add_argument("--random-starts", type=int, help="number of random starts (default: 8)")
    parser.add_argument("--init", choices=[method.value for method in InitMethod], help="subset start fit")
    parser.add_argument("--shared", type=_name_list, help="comma separated covariates exempt from similarity")
    return parser


def _simulation_arguments() -> argparse.ArgumentParser:
    parser = _ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    parser.add_argument("--case", type=int, choices=range(1, 8), help="reference case 1 to 7")
    parser.add_argument("--n", type=int, help="sample size (default: 80)")
    parser.add_argument("--rho", type=float, help="within-block correlation of a custom design")
    parser.add_argument("--blocks", type=int, help="number of blocks of a custom design")
    parser.add_argument("--block-size", type=int, help="covariates per block of a custom design")
    parser.add_argument(
        "--structure", choices=[structure.value for structure in CorrelationStructure], help="block structure"
    )
    parser.add_argument("--beta0", type=_float_list, help="comma separated true coefficients")
    parser.add_argument("--sigma2", type=float, help="noise variance (default: 9)")
    return parser


def build_parser() -> argparse.ArgumentParser:
    """
    Returns
    -------
    argparse.ArgumentParser
        The parser of all sub-commands
    """
    common, data, penalty = _common_arguments(), _data_arguments(), _penalty_arguments()
    models, simulation = _model_arguments(), _simulation_arguments()
    parser = _ArgumentParser(prog="mmpr", description="Multi-model penalized regression")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    subparsers.add_parser(
        CommandIdentifier.FIT.value,
        parents=[common, data, penalty, models],
        argument_default=argparse.SUPPRESS,
        help="fit the models at a single lambda",
    )
    path = subparsers.add_parser(
        CommandIdentifier.PATH.value,
        parents=[common, data, penalty, models],
        argument_default=argparse.SUPPRESS,
        help="regularization path with omega tuned at every lambda",
    )
    path.add_argument("--lambda-grid", type=_float_list, help="comma separated descending lambda values")
    path.add_argument("--n-lambda", type=int, help="size of the default grid (default: 50)")
    path.add_argument("--lambda-ratio", type=float, help="smallest over largest grid value (default: 1e-3)")
    path.add_argument("--mse-out", type=Path, help="additional table of the per-model errors")
    subparsers.add_parser(
        CommandIdentifier.SIMULATE.value,
        parents=[common, simulation],
        argument_default=argparse.SUPPRESS,
        help="sample a simulated dataset",
    )
    study = subparsers.add_parser(
        CommandIdentifier.INCLUSION_STUDY.value,
        parents=[common, simulation, penalty, models],
        argument_default=argparse.SUPPRESS,
        help="selection frequencies over replicate datasets",
    )
    study.add_argument("--replicates", type=int, help="number of datasets (default: 16)")
    subparsers.add_parser(
        CommandIdentifier.METRICS.value,
        parents=[common, data, penalty, models],
        argument_default=argparse.SUPPRESS,
        help="similarity and prediction correlation of the models of a fit",
    )
    surface = subparsers.add_parser(
        CommandIdentifier.PENALTY_SURFACE.value,
        parents=[common, data, penalty],
        argument_default=argparse.SUPPRESS,
        help="grid data of the conditional penalty and SSE contours of two covariates",
    )
    surface.add_argument("--beta1", type=_float_list, help="comma separated coefficients of the first model")
    surface.add_argument("--bounds", type=float, help="half width of the grid (default: 2)")
    surface.add_argument("--resolution", type=int, help="points per axis (default: 201)")
    return parser


def parse_args(argv: Sequence[str] | None = None) -> RunConfig:
    """
    Parse the command line into a run configuration. Options not given keep the defaults of :class:`RunConfig`.

    Raises
    ------
    SystemExit
        With the usage error status if the arguments cannot be parsed.
    """
    namespace = build_parser().parse_args(argv)
    known = {field.name for field in fields(RunConfig)}
    return RunConfig(**{key: value for key, value in vars(namespace).items() if key in known})


def _report_error(command: CommandIdentifier | None, exc: BaseException, exit_code: ExitCode) -> None:
    error = {
        "error": type(exc).__name__,
        "command": None if command is None else command.value,
        "message": str(exc),
        "exit_code": int(exit_code),
    }
    print(json.dumps(error), file=sys.stderr)


def run(config: RunConfig) -> ExitCode:
    """
    Execute a command.

    Parameters
    ----------
    config: RunConfig
        The settings

    Returns
    -------
    ExitCode
        The exit status. Failures are reported on stderr.
    """
    logger = logging.getLogger(__name__)
    try:
        command_factory.get(config.command).run(config)
    except MmprException as exc:
        _report_error(config.command, exc, exc.exit_code)
        return exc.exit_code
    except OSError as exc:
        _report_error(config.command, exc, ExitCode.DATA_ERROR)
        return ExitCode.DATA_ERROR
    except np.linalg.LinAlgError as exc:
        _report_error(config.command, exc, ExitCode.NUMERICAL_FAILURE)
        return ExitCode.NUMERICAL_FAILURE
    logger.debug("'%(command)s' finished", {"command": config.command.value})
    return ExitCode.SUCCESS


def main(argv: Sequence[str] | None = None) -> NoReturn:
    """The console entry point"""
    try:
        config = parse_args(argv)
    except MmprException as exc:
        _report_error(None, exc, exc.exit_code)
        sys.exit(exc.exit_code)
    logging.basicConfig(level=config.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    sys.exit(run(config))


if __name__ == "__main__":
    main()
