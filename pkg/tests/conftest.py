"""Shared test fixtures: small model specs, known parameters and simulated data."""

from pathlib import Path

import numpy as np
import pytest

from src.data import aggregate
from src.models import ModelSpec, ParameterSet
from src.simulation import SimulationPlan, simulate

FIXTURES = Path(__file__).parent / "fixtures"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: recovery and clustering harnesses")


def graded_truth(spec: ModelSpec, spread: float = 1.5) -> ParameterSet:
    """
    Well-separated parameters for `spec`: equally spaced support points on
    every dimension, difficulties spread over [-1, 1] and increasing in the
    category, discriminations of one.
    """
    k, r = spec.k, spec.r
    pi = np.linspace(1.0, 2.0, k)
    pi = pi / pi.sum()
    points = np.linspace(-spread, spread, k) if k > 1 else np.zeros(1)
    xi = np.repeat(points[:, None], spec.s, axis=1)
    gamma = np.ones(r)
    if spec.rating_scale:
        beta = np.linspace(-0.5, 0.5, r)
        tau = np.linspace(-0.8, 0.8, spec.l - 1)
        return ParameterSet(pi=pi, xi=xi, beta=beta, tau=tau, gamma=gamma).normalize(spec)
    beta = np.full((r, max(spec.cats) - 1), np.nan)
    for j, l in enumerate(spec.cats):
        beta[j, : l - 1] = np.linspace(-0.8, 0.8, l - 1) + 0.3 * np.sin(j)
    return ParameterSet(pi=pi, xi=xi, beta=beta, gamma=gamma).normalize(spec)


def simulate_matrix(spec: ModelSpec, params: ParameterSet, n: int, seed: int = 0, missing_rate: float = 0.0):
    """Simulate and aggregate, keeping the spec's category counts."""
    plan = SimulationPlan(spec=spec, params=params, n=n, seed=seed, missing_rate=missing_rate)
    return aggregate(simulate(plan).responses, cats=spec.cats)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grm_spec() -> ModelSpec:
    """Unidimensional graded response model, 4 items with 3 categories, 2 classes."""
    return ModelSpec.build(k=2, link="global", cats=(3, 3, 3, 3))


@pytest.fixture
def grm_truth(grm_spec) -> ParameterSet:
    return graded_truth(grm_spec)


@pytest.fixture
def grm_data(grm_spec, grm_truth):
    return simulate_matrix(grm_spec, grm_truth, n=500, seed=1)


@pytest.fixture
def binary_spec() -> ModelSpec:
    return ModelSpec.build(k=2, link="global", cats=(2, 2, 2))


@pytest.fixture
def binary_data(binary_spec):
    return simulate_matrix(binary_spec, graded_truth(binary_spec), n=400, seed=2)


@pytest.fixture
def hads_cats() -> tuple[int, ...]:
    return (4,) * 14


def fixture_path(name: str) -> Path:
    path = FIXTURES / name
    if not path.exists():
        pytest.skip(f"{name} not found in tests/fixtures; reference-data checks skipped")
    return path
