"""Tests of the similarity weight search and the regularization paths"""

import logging

import numpy as np
import pytest

from mmpr.errors import InvalidConfigError
from mmpr.model import Dataset, standardize
from mmpr.similarity import max_pairwise_similarity
from mmpr.simulation import reference_case
from mmpr.solver import SolveControls, solve
from mmpr.tuner import PathSpec, _OmegaSearch, fit_path, fit_paths, lambda_grid, lambda_max, tune_omega

CEILING_SLACK = 1e-6


def test_lambda_max_examples():
    """Orthogonal response and a single column with xᵀy = 5"""
    orthogonal = standardize(Dataset([[1.0], [2.0], [3.0]], [1.0, -2.0, 1.0], ("a",)))
    assert lambda_max(orthogonal) == pytest.approx(0.0, abs=1e-14)

    half = 5.0 / np.sqrt(2.0)
    single = standardize(Dataset([[1.0], [2.0], [3.0]], [-half, 0.0, half], ("a",)))
    assert lambda_max(single) == pytest.approx(10.0)
    assert lambda_max(single, c=2) == pytest.approx(10.0)


def test_default_grid(design):
    """Fifty log-spaced values from lambda_max down to 1e-3 lambda_max"""
    grid = np.array(lambda_grid(design, PathSpec()))
    assert grid.size == 50
    assert grid[0] == pytest.approx(lambda_max(design))
    assert grid[-1] == pytest.approx(1e-3 * lambda_max(design))
    assert np.all(np.diff(grid) < 0)
    np.testing.assert_allclose(np.diff(np.log(grid)), np.log(1e-3) / 49)


def test_grid_of_orthogonal_response():
    """Without any correlation there is no grid"""
    orthogonal = standardize(Dataset([[1.0], [2.0], [3.0]], [1.0, -2.0, 1.0], ("a",)))
    with pytest.raises(InvalidConfigError):
        lambda_grid(orthogonal, PathSpec())


def test_path_spec_validation():
    """Grids must be positive and strictly descending"""
    for kwargs in (
        {"lambda_grid": ()},
        {"lambda_grid": (1.0, 2.0)},
        {"lambda_grid": (1.0, 0.0)},
        {"lambda_grid": (1.0, 1.0)},
        {"n_lambda": 0},
        {"lambda_ratio": 0.0},
        {"rho_thresh": 1.5},
        {"omega_tol": 0.0},
        {"omega_start": 2.0, "omega_max": 1.0},
        {"models": 0},
        {"c": 3},
    ):
        with pytest.raises(InvalidConfigError):
            PathSpec(**kwargs)
    assert PathSpec(lambda_grid=[2, 1]).lambda_grid == (2.0, 1.0)
    assert PathSpec().with_models(5).models == 5


def test_tune_omega_already_dissimilar(design):
    """A fully penalized fit has only empty models and needs no similarity weight"""
    spec = PathSpec()
    fit = tune_omega(design, spec.penalty_config(), lambda_max(design), spec)
    assert fit.omega == 0.0
    assert fit.evaluations == 1
    assert fit.similarity == 0.0
    assert not fit.omega_capped
    np.testing.assert_array_equal(fit.result.coef.beta, 0.0)


def test_tune_omega_trivial_ceiling(design):
    """Every fit satisfies a ceiling of 1"""
    spec = PathSpec(rho_thresh=1.0)
    fit = tune_omega(design, spec.penalty_config(), 0.1 * lambda_max(design), spec)
    assert fit.omega == 0.0
    assert fit.similarity == pytest.approx(1.0)


def test_tune_omega_reaches_ceiling(design):
    """The selected fit satisfies the ceiling with a positive weight"""
    spec = PathSpec(models=3)
    fit = tune_omega(design, spec.penalty_config(), 0.1 * lambda_max(design), spec)
    assert not fit.omega_capped
    assert fit.omega > 0
    assert fit.evaluations > 2
    assert fit.similarity <= spec.rho_thresh + CEILING_SLACK
    assert fit.similarity == pytest.approx(max_pairwise_similarity(fit.result.coef))


def test_tune_omega_highly_correlated():
    """Two models on strongly correlated blocks are kept at most 0.3 similar"""
    design = standardize(reference_case(5, seed=3).dataset)
    spec = PathSpec(models=2)
    fit = tune_omega(design, spec.penalty_config(), 0.1 * lambda_max(design), spec)
    assert not fit.omega_capped
    assert fit.similarity <= 0.3 + CEILING_SLACK


def test_tune_omega_capped(design, caplog):
    """An unreachable ceiling returns the fit at omega_max and says so"""
    spec = PathSpec(models=3, omega_start=1e-4, omega_max=2e-4)
    with caplog.at_level(logging.WARNING, logger="mmpr.tuner"):
        fit = tune_omega(design, spec.penalty_config(), 0.1 * lambda_max(design), spec)
    assert fit.omega_capped
    assert fit.omega == 2e-4
    assert fit.similarity > spec.rho_thresh
    assert "not reached" in caplog.text


def test_tune_omega_positive_lambda(design):
    """The sparsity weight must be positive"""
    spec = PathSpec()
    with pytest.raises(InvalidConfigError):
        tune_omega(design, spec.penalty_config(), 0.0, spec)


def test_path_single_point(design):
    """The fully penalized end of the path"""
    spec = PathSpec(models=3, lambda_grid=(lambda_max(design),))
    path = fit_path(design, spec)
    assert len(path.records) == 1
    record = path.records[0]
    assert record.omega == 0.0
    np.testing.assert_array_equal(record.coef.beta, 0.0)
    np.testing.assert_allclose(record.per_model_sse, design.yty)
    np.testing.assert_allclose(record.per_model_mse, design.yty / design.n_samples)
    assert record.max_pairwise_similarity == 0.0
    assert path.names == design.names


def test_path_records(design):
    """Records follow the grid and respect the similarity ceiling unless capped"""
    spec = PathSpec(models=3, n_lambda=5, lambda_ratio=0.05)
    path = fit_path(design, spec)
    np.testing.assert_allclose(path.lambdas, lambda_grid(design, spec))
    assert path.coefficients().shape == (5, 3, 6)
    for record in path.records:
        assert record.omega_capped or record.max_pairwise_similarity <= spec.rho_thresh + CEILING_SLACK
        np.testing.assert_allclose(record.per_model_mse * design.n_samples, record.per_model_sse)
    # Less penalization never leaves every model empty
    assert np.any(path.records[-1].coef.beta != 0.0)


def test_paths_per_number_of_models(design):
    """One path per M, a single model never needs a similarity weight"""
    spec = PathSpec(n_lambda=3, lambda_ratio=0.1)
    paths = fit_paths(design, spec, models=(1, 2))
    assert sorted(paths) == [1, 2]
    assert all(record.omega == 0.0 for record in paths[1].records)
    assert paths[2].spec.models == 2
    assert paths[2].coefficients().shape == (3, 2, 6)


def test_path_deterministic(design):
    """Two runs give identical paths"""
    spec = PathSpec(models=2, n_lambda=4, lambda_ratio=0.05)
    first, second = fit_path(design, spec), fit_path(design, spec)
    np.testing.assert_array_equal(first.coefficients(), second.coefficients())
    assert [record.omega for record in first.records] == [record.omega for record in second.records]


@pytest.mark.slow
@pytest.mark.parametrize("case_id", range(1, 8))
def test_similarity_ceiling_on_reference_cases(case_id):
    """Every record that is not capped keeps the models at most 0.3 similar"""
    design = standardize(reference_case(case_id, seed=case_id).dataset)
    spec = PathSpec(models=3, c=1, d=1, n_lambda=8)
    for record in fit_path(design, spec).records:
        assert record.omega_capped or record.max_pairwise_similarity <= 0.3 + CEILING_SLACK


@pytest.fixture
def scripted_search(monkeypatch, design):
    """
    Run the omega search against a similarity that is below the ceiling exactly where `admissible` is true. No model
    is fitted.
    """

    def search(admissible, **kwargs):
        def fake(self, omega):
            self.evaluations += 1
            return object(), 0.1 if admissible(omega) else 0.9

        monkeypatch.setattr(_OmegaSearch, "evaluate", fake)
        spec = PathSpec(**kwargs)
        return tune_omega(design, spec.penalty_config(), 1.0, spec)

    return search


def test_search_brackets_from_below(scripted_search):
    """Doubling from a small start stops within the tolerance above the threshold"""
    fit = scripted_search(lambda omega: omega >= 1e-2)
    assert 1e-2 <= fit.omega <= 1e-2 / (1.0 - 1e-2)
    assert not fit.omega_capped
    assert not fit.monotone_violation


def test_search_start_already_admissible(scripted_search):
    """A start above the threshold is halved instead of being returned"""
    fit = scripted_search(lambda omega: omega >= 1e-2, omega_start=1.0)
    assert 1e-2 <= fit.omega <= 1e-2 / (1.0 - 1e-2)
    assert not fit.omega_capped
    assert not fit.monotone_violation


def test_search_admissible_down_to_floor(scripted_search):
    """Any positive weight meets the ceiling, so the search stops at the floor"""
    fit = scripted_search(lambda omega: omega > 0.0, omega_start=1.0)
    assert 0.0 < fit.omega < 2e-12
    assert not fit.monotone_violation


def test_search_flags_monotone_violation(scripted_search):
    """An admissible weight just below the selected one is reported"""
    selected = scripted_search(lambda omega: omega >= 1e-2).omega
    below = selected / 1.02

    fit = scripted_search(lambda omega: omega >= 1e-2 or abs(omega - below) <= 1e-9 * below)
    assert fit.omega == selected
    assert fit.monotone_violation


def test_tune_omega_large_start(design):
    """Starting far above the needed weight still finds a small one"""
    spec = PathSpec(models=3, omega_start=1e3)
    fit = tune_omega(design, spec.penalty_config(), 0.1 * lambda_max(design), spec)
    assert not fit.omega_capped
    assert fit.omega < 1e3
    assert fit.similarity <= spec.rho_thresh + CEILING_SLACK


def test_path_not_worse_than_cold_start(design):
    """Every record is at least as good as a fit started from zero at the same weights"""
    spec = PathSpec(models=2, n_lambda=6, lambda_ratio=0.05)
    for record in fit_path(design, spec).records:
        cold = solve(design, spec.penalty_config(record.lambda_, record.omega), SolveControls())
        assert cold.objective >= record.objective - 1e-8


@pytest.mark.slow
def test_path_distinct_dominant_covariates():
    """On two blocks of three correlated covariates, three models lead with different covariates at small lambda"""
    distinct = 0
    for seed in range(5):
        design = standardize(reference_case(4, seed=seed).dataset)
        path = fit_path(design, PathSpec(models=3, n_lambda=10, lambda_ratio=0.01))
        dominant = np.argmax(np.abs(path.records[-1].coef.beta), axis=1)
        distinct += len(set(dominant.tolist())) == 3
    assert distinct >= 3


@pytest.mark.slow
def test_path_one_model_vanishes():
    """On three blocks of two covariates, one of three models stays nearly empty over the lower half of the path"""
    shrunk = 0
    for seed in range(3):
        design = standardize(reference_case(6, seed=seed).dataset)
        records = fit_path(design, PathSpec(models=3, n_lambda=10, lambda_ratio=0.01)).records
        lower = records[len(records) // 2 :]
        norms = np.array([np.linalg.norm(record.coef.beta, axis=1) for record in lower])
        ratios = norms.min(axis=1) / norms.max(axis=1)
        shrunk += np.mean(ratios < 0.1) >= 0.5
    assert shrunk >= 2
