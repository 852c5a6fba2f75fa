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
"""The sub-commands of the command line interface. Each command reads its settings from a :class:`RunConfig`."""
from __future__ import annotations

import logging
import sys
from abc import ABC, abstractmethod
from pathlib import Path
from typing import TYPE_CHECKING

import pandas as pd

from .constants import CommandIdentifier
from .data_io import (
    diversity_frame,
    fit_frame,
    inclusion_frame,
    ingest_csv,
    output_format,
    path_frame,
    path_mse_frame,
    render_records,
    write_records,
)
from .errors import InvalidConfigError
from .metrics import align_models, diversity_report, inclusion_study, lasso_cv_lambda
from .model import CoefficientSet, StandardizedDesign, standardize
from .simulation import SimCase, sample, simulation_case
from .solver import SolveControls, solve
from .surfaces import conditional_surface, penalty_surface, sse_surface
from .tuner import PathSpec, fit_path, tune_omega

if TYPE_CHECKING:
    from .cli import RunConfig


def _suffixed(path: Path, suffix: str) -> Path:
    """`results.csv` becomes `results<suffix>.csv`"""
    return path.with_name(f"{path.stem}{suffix}{path.suffix}")


class Command(ABC):
    """
    The base class of all sub-commands
    """

    @classmethod
    @abstractmethod
    def command_identifier(cls) -> CommandIdentifier:
        """
        Returns
        -------
        CommandIdentifier
            The name of the sub-command
        """

    def __init__(self) -> None:
        self.__logger = logging.getLogger(__name__)

    @abstractmethod
    def run(self, config: RunConfig) -> None:
        """
        Execute the command and write its output.

        Parameters
        ----------
        config: RunConfig
            The validated settings
        """

    def _emit(self, frame: pd.DataFrame, config: RunConfig, path: Path | None = None) -> None:
        """Write a table to `path`, or to the output of the config, or to stdout if neither is set"""
        target = config.output if path is None else path
        fmt = output_format(target, config.fmt)
        if target is None:
            sys.stdout.buffer.write(render_records(frame, fmt))
            sys.stdout.flush()
        else:
            write_records(frame, target, fmt)
            self.__logger.info("Wrote %(rows)i records to '%(path)s'", {"rows": len(frame), "path": target})

    @staticmethod
    def _load_design(config: RunConfig) -> StandardizedDesign:
        if config.input is None:
            raise InvalidConfigError(f"'{config.command.value}' requires --input")
        ingested = ingest_csv(config.input, config.response, config.fill_zero)
        return standardize(ingested.dataset)

    @staticmethod
    def _shared_indices(config: RunConfig, design: StandardizedDesign) -> frozenset[int]:
        unknown = sorted(set(config.shared) - set(design.names))
        if unknown:
            raise InvalidConfigError(f"Unknown shared covariates {unknown}, the covariates are {list(design.names)}")
        return frozenset(design.names.index(name) for name in config.shared)

    @staticmethod
    def _path_spec(config: RunConfig, shared: frozenset[int] = frozenset(), models: int | None = None) -> PathSpec:
        return PathSpec(
            models=config.models[0] if models is None else models,
            c=config.c,
            d=config.d,
            lambda_grid=config.lambda_grid,
            n_lambda=config.n_lambda,
            lambda_ratio=config.lambda_ratio,
            rho_thresh=config.rho_thresh,
            omega_max=config.omega_max,
            omega_tol=config.omega_tol,
            omega_start=config.omega_start,
            eps=config.eps,
            max_sweeps=config.max_sweeps,
            shared=shared,
            controls=SolveControls(
                policies=config.starts, random_starts=config.random_starts, seed=config.seed, init=config.init
            ),
        )

    def _single_fit(
        self, config: RunConfig, design: StandardizedDesign
    ) -> tuple[CoefficientSet, float, float, float, bool]:
        """Fit at the configured or cross-validated lambda, with a fixed or a tuned omega"""
        spec = self._path_spec(config, self._shared_indices(config, design))
        if config.lambda_ is not None:
            lambda_ = config.lambda_
        else:
            lambda_ = lasso_cv_lambda(design, folds=config.folds, seed=config.seed)
        if config.omega is not None:
            cfg = spec.penalty_config(lambda_, config.omega)
            result = solve(design, cfg, spec.controls)
            omega = config.omega
        else:
            fit = tune_omega(design, spec.penalty_config(), lambda_, spec)
            result, omega = fit.result, fit.omega
        return result.coef, lambda_, omega, result.objective, result.converged

    def _simulation_case(self, config: RunConfig) -> SimCase:
        if config.case is not None:
            return simulation_case(config.case, config.seed, n=config.n)
        return SimCase(
            rho=config.rho,
            blocks=config.blocks,
            block_size=config.block_size,
            structure=config.structure,
            n=config.n,
            beta0=config.beta0,
            sigma2=config.sigma2,
            seed=config.seed,
        )


class FitCommand(Command):
    """Fit the models at a single lambda"""

    @classmethod
    def command_identifier(cls) -> CommandIdentifier:
        return CommandIdentifier.FIT

    def run(self, config: RunConfig) -> None:
        design = self._load_design(config)
        coef, lambda_, omega, objective, converged = self._single_fit(config, design)
        self._emit(fit_frame(design, coef, lambda_, omega, objective, converged), config)


class PathCommand(Command):
    """Compute one regularization path per requested number of models"""

    @classmethod
    def command_identifier(cls) -> CommandIdentifier:
        return CommandIdentifier.PATH

    def run(self, config: RunConfig) -> None:
        design = self._load_design(config)
        shared = self._shared_indices(config, design)
        several = len(config.models) > 1
        for models in config.models:
            result = fit_path(design, self._path_spec(config, shared, models))
            output = config.output
            mse_out = config.mse_out
            if several:
                assert output is not None  # checked by RunConfig
                output = _suffixed(output, f"_m{models}")
                mse_out = None if mse_out is None else _suffixed(mse_out, f"_m{models}")
            if output is None:
                # A single stream holds both scales, told apart by the scale column
                both = pd.concat([path_frame(result), path_frame(result, design)], ignore_index=True)
                self._emit(both, config)
            else:
                self._emit(path_frame(result), config, output)
                self._emit(path_frame(result, design), config, _suffixed(output, "_raw"))
            if mse_out is not None:
                self._emit(path_mse_frame(result), config, mse_out)


class SimulateCommand(Command):
    """Sample a reference case or a custom block design"""

    @classmethod
    def command_identifier(cls) -> CommandIdentifier:
        return CommandIdentifier.SIMULATE

    def run(self, config: RunConfig) -> None:
        simulated = sample(self._simulation_case(config))
        self._emit(simulated.to_frame(), config)


class InclusionStudyCommand(Command):
    """Selection frequencies over replicate datasets of a simulation case"""

    @classmethod
    def command_identifier(cls) -> CommandIdentifier:
        return CommandIdentifier.INCLUSION_STUDY

    def run(self, config: RunConfig) -> None:
        case = self._simulation_case(config)
        names = tuple(f"x{k + 1}" for k in range(case.n_covariates))
        shared = frozenset(names.index(name) for name in config.shared if name in names)
        if len(shared) != len(config.shared):
            raise InvalidConfigError(f"Unknown shared covariates, the covariates are {list(names)}")
        fixed_lambda = config.lambda_
        table = inclusion_study(
            case,
            replicates=config.replicates,
            seed=config.seed,
            spec=self._path_spec(config, shared),
            lambda_rule=None if fixed_lambda is None else (lambda _design: fixed_lambda),
            folds=config.folds,
        )
        self._emit(inclusion_frame(table), config)


class MetricsCommand(Command):
    """Fit the models at a single lambda and compare them with each other"""

    @classmethod
    def command_identifier(cls) -> CommandIdentifier:
        return CommandIdentifier.METRICS

    def run(self, config: RunConfig) -> None:
        design = self._load_design(config)
        coef = self._single_fit(config, design)[0]
        report = diversity_report(design, align_models(design, coef), self._shared_indices(config, design))
        self._emit(diversity_frame(report), config)


class PenaltySurfaceCommand(Command):
    """Grid data of the conditional penalty region of the second model, the SSE, or both"""

    @classmethod
    def command_identifier(cls) -> CommandIdentifier:
        return CommandIdentifier.PENALTY_SURFACE

    def __init__(self) -> None:
        super().__init__()
        self.__logger = logging.getLogger(__name__)

    def run(self, config: RunConfig) -> None:
        lambda_ = 0.0 if config.lambda_ is None else config.lambda_
        omega = 1.0 if config.omega is None else config.omega
        if config.input is None:
            if config.beta1 is None:
                raise InvalidConfigError("'penalty-surface' requires --beta1, --input or both")
            grid = penalty_surface(config.beta1, config.c, config.d, lambda_, omega, config.bounds, config.resolution)
        elif config.beta1 is None:
            grid = sse_surface(self._load_design(config), config.bounds, config.resolution)
        else:
            grid = conditional_surface(
                self._load_design(config),
                config.beta1,
                config.c,
                config.d,
                lambda_,
                omega,
                config.bounds,
                config.resolution,
            )
        self.__logger.info(
            "Grid of %(resolution)i points per axis, minimum at %(minimum)s",
            {"resolution": grid.resolution, "minimum": grid.minimum},
        )
        self._emit(grid.to_frame(), config)
