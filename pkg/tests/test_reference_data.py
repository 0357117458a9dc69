"""
Reproduction of published results on the NAEP and HADS data sets.

Place naep.csv (12 binary items, 1510 units) and hads.csv (14 items with four
categories, 201 units) in tests/fixtures to run these checks.
"""

import numpy as np
import pytest

from src.data import aggregate, read_responses_csv
from src.estimation import StartPolicy, fit
from src.models import ModelSpec
from src.selection import class_item, suggest_cut, test_dim
from tests.conftest import fixture_path

HADS_DIM2 = ((1, 5, 6, 7, 9, 10, 11), (0, 2, 3, 4, 8, 12, 13))

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def naep():
    return aggregate(read_responses_csv(fixture_path("naep.csv")))


@pytest.fixture(scope="module")
def hads():
    return aggregate(read_responses_csv(fixture_path("hads.csv")), cats=(4,) * 14)


class TestNaep:
    def test_distinct_patterns(self, naep):
        assert naep.n == 1510
        assert naep.m == 704

    def test_clustering(self, naep):
        trace = class_item(naep, k=4, disc="free", policy=StartPolicy(n_random=3, seed=0))
        assert trace.merge[0].tolist() == [-3, -8]
        assert trace.height[0] == pytest.approx(0.243, abs=0.01)
        assert trace.height[-1] == pytest.approx(45.41, abs=0.5)
        assert suggest_cut(trace, alpha=0.05) == 3


class TestHads:
    def test_single_class_standard_lc(self, hads):
        result = fit(ModelSpec.build(1, "none", hads.cats), hads)
        assert result.lk == pytest.approx(-3153.151, abs=0.01)
        assert result.np == 42

    def test_unidimensional_grm(self, hads):
        spec = ModelSpec.build(3, "global", hads.cats)
        result = fit(spec, hads, StartPolicy(n_random=5, seed=0))
        assert result.lk == pytest.approx(-2741.285, abs=0.5)
        assert result.np == 46
        assert result.bic == pytest.approx(5726.521, abs=1.0)
        np.testing.assert_allclose(result.params.xi[:, 0], [-0.776, 1.183, 3.419], atol=0.05)
        np.testing.assert_allclose(result.params.pi, [0.342, 0.491, 0.167], atol=0.02)

    def test_standard_lc_three_classes(self, hads):
        result = fit(ModelSpec.build(3, "none", hads.cats), hads, StartPolicy(n_random=5, seed=0))
        assert result.np == 128
        assert result.lk == pytest.approx(-2677.822, abs=0.5)

    def test_bidimensional_against_each_item(self, hads):
        result = test_dim(
            hads, k=3, disc="free", multi0=HADS_DIM2, multi1=[(j,) for j in range(14)],
            policy=StartPolicy(n_random=3, seed=0),
        )
        assert result.df == 12
        assert result.deviance == pytest.approx(10.72, abs=0.05)

    def test_unidimensional_against_bidimensional(self, hads):
        result = test_dim(hads, k=3, disc="free", multi1=HADS_DIM2, policy=StartPolicy(n_random=3, seed=0))
        assert result.df == 1
        assert result.deviance == pytest.approx(0.369, abs=0.02)
