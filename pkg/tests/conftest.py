"""Shared fixtures and the ordering of slow tests"""

from __future__ import annotations

from typing import Callable

import numpy as np
import pytest

from mmpr.model import CoefficientSet, Dataset, PenaltyConfig, StandardizedDesign, objective, standardize

# Floating point slack allowed for an increase of the objective after a single coordinate update
DESCENT_SLACK = 1e-10


def pytest_collection_modifyitems(items):
    """Move tests marked `slow` to the end of the run, keeping the order within both groups"""
    items.sort(key=lambda item: item.get_closest_marker("slow") is not None)


def random_dataset(n: int, p: int, seed: int, beta: np.ndarray | None = None, noise: float = 1.0) -> Dataset:
    """A Gaussian dataset with covariates named x1..xp"""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    beta = np.ones(p) if beta is None else np.asarray(beta, dtype=np.float64)
    y = X @ beta + noise * rng.standard_normal(n)
    return Dataset(X, y, tuple(f"x{k + 1}" for k in range(p)))


@pytest.fixture
def make_design() -> Callable[..., StandardizedDesign]:
    """Factory of seeded standardized designs"""

    def factory(n: int = 80, p: int = 6, seed: int = 0, beta=None, noise: float = 1.0) -> StandardizedDesign:
        return standardize(random_dataset(n, p, seed, beta, noise))

    return factory


@pytest.fixture
def design(make_design) -> StandardizedDesign:
    """An 80×6 design with three influential covariates"""
    return make_design(beta=[1.0, 1.0, 1.0, 0.0, 0.0, 0.0], noise=3.0)


class DescentMonitor:
    """
    Evaluates the objective after every coordinate update and fails on any increase. A matrix that differs from the
    previous one in more than one entry belongs to a new start and begins a new descent.
    """

    def __init__(self, design: StandardizedDesign, cfg: PenaltyConfig) -> None:
        self.design = design
        self.cfg = cfg
        self.previous: float | None = None
        self.previous_beta: np.ndarray | None = None
        self.updates = 0
        self.starts = 0

    def __call__(self, beta: np.ndarray) -> None:
        value = objective(self.design, CoefficientSet(beta), self.cfg)
        same_descent = self.previous_beta is not None and np.count_nonzero(beta != self.previous_beta) <= 1
        if same_descent:
            assert value <= self.previous + DESCENT_SLACK, (
                f"Objective increased from {self.previous!r} to {value!r} after update {self.updates}"
            )
        else:
            self.starts += 1
        self.previous = value
        self.previous_beta = beta.copy()
        self.updates += 1


@pytest.fixture
def descent_monitor() -> Callable[[StandardizedDesign, PenaltyConfig], DescentMonitor]:
    """Factory of monitors asserting that the objective never increases during coordinate descent"""
    return DescentMonitor
