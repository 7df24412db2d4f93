import math

import numpy as np
import pytest

from zitd_gnn.distributions import (
    CdfBisection,
    MonteCarlo,
    ZitdParams,
    moment_check,
    normalization_check,
    oracle_sweep,
    sample_zitd,
    zitd_cdf,
    zitd_interval,
    zitd_log_density,
    zitd_moments,
    zitd_zero_mass,
)
from zitd_gnn.errors import ContractError


@pytest.fixture
def cell():
    return ZitdParams.of(0.3, 1.0, 1.0, 1.5)


class TestZeroMass:
    def test_formula(self, cell):
        assert zitd_zero_mass(cell) == pytest.approx(0.3 + 0.7 * math.exp(-2.0))

    def test_log_density_at_zero(self, cell):
        assert zitd_log_density(0.0, cell) == pytest.approx(math.log(zitd_zero_mass(cell)))

    def test_certain_zero(self):
        z = ZitdParams.of(1.0, 1.0, 1.0, 1.5)
        assert zitd_log_density(0.0, z) == pytest.approx(0.0)
        assert zitd_log_density(2.0, z) == -math.inf

    def test_pi_out_of_range(self):
        with pytest.raises(ContractError):
            ZitdParams.of(1.2, 1.0, 1.0, 1.5)


class TestMoments:
    def test_closed_forms(self, cell):
        moments = zitd_moments(cell)
        assert moments.mean == pytest.approx(0.7)
        assert moments.tweedie_variance == pytest.approx(1.0)


class TestSampling:
    def test_seeded_draws_repeat(self, cell):
        np.testing.assert_array_equal(sample_zitd(cell, 50, 9), sample_zitd(cell, 50, 9))

    def test_draws_are_nonnegative(self, cell):
        assert (sample_zitd(cell, 1000, 1) >= 0).all()

    def test_zero_mean_gives_zeros(self):
        assert not sample_zitd(ZitdParams.of(0.2, 0.0, 1.0, 1.5), 20, 0).any()

    def test_needs_one_draw(self, cell):
        with pytest.raises(ContractError):
            sample_zitd(cell, 0, 0)


class TestInterval:
    def test_degenerate_when_zero_mass_dominates(self):
        z = ZitdParams.of(0.96, 2.0, 1.0, 1.5)
        assert zitd_interval(z) == (0.0, 0.0)

    def test_bounds_are_ordered(self, cell):
        lower, upper = zitd_interval(cell, method=MonteCarlo(2000, 4))
        assert 0.0 <= lower <= upper

    def test_quantile_levels_validated(self, cell):
        with pytest.raises(ContractError):
            zitd_interval(cell, 0.9, 0.1)

    def test_seeded_interval_repeats(self, cell):
        seed = np.random.SeedSequence([0, 3, 7])
        assert zitd_interval(cell, method=MonteCarlo(500, seed)) == zitd_interval(
            cell, method=MonteCarlo(500, np.random.SeedSequence([0, 3, 7]))
        )

    @pytest.mark.slow
    def test_bisection_agrees_with_sampling(self):
        z = ZitdParams.of(0.0, 2.0, 1.0, 1.5)
        exact = zitd_interval(z, method=CdfBisection())
        sampled = zitd_interval(z, method=MonteCarlo(200_000, 11))
        assert sampled.upper == pytest.approx(exact.upper, rel=0.03)
        assert zitd_cdf(exact.upper, z) == pytest.approx(0.95, abs=1e-6)


class TestCdf:
    def test_below_zero(self, cell):
        assert zitd_cdf(-1.0, cell) == 0.0
        assert zitd_cdf(0.0, cell) == pytest.approx(zitd_zero_mass(cell))

    def test_monotone(self, cell):
        values = [zitd_cdf(v, cell) for v in (0.1, 0.5, 1.0, 3.0)]
        assert values == sorted(values)


@pytest.mark.slow
class TestAcceptance:
    def test_oracle_sweep(self):
        result = oracle_sweep()
        assert result.passed, result.detail

    def test_normalization(self):
        result = normalization_check()
        assert result.passed, result.detail

    def test_moments(self):
        for result in moment_check(100_000, 0):
            assert result.passed, result.detail
