"""Random-walk Metropolis and draw summaries."""
import numpy as np
import pytest
from pydantic import ValidationError

from abstract_labelembed.imports import DomainError, InitializationError
from abstract_labelembed.model_core import Embedding, GaussianPrior, log_posterior_rows
from abstract_labelembed.sampler import (
    McmcConfig, PosteriorDraws, chain_effective_sample_sizes, chain_seed, effective_sample_size,
    posterior_covariance, posterior_mean, run_chains, rw_metropolis,
)


def gaussian_target(mean, sd=1.0):
    mean = np.asarray(mean, dtype=np.float64)

    def target(z):
        return float(-0.5 * np.sum(((z - mean) / sd) ** 2))

    return target


class TestConfig:

    def test_total_steps(self):
        assert McmcConfig(n_retained=10, burn_in=5, thin=3).total_steps == 35

    def test_robust_profile(self):
        cfg = McmcConfig.robust(seed=4)
        assert (cfg.burn_in, cfg.thin, cfg.seed) == (500, 5, 4)

    @pytest.mark.parametrize("field", [{"thin": 0}, {"n_retained": 0}, {"proposal_scale": 0.0},
                                       {"burn_in": -1}, {"seed": -1}])
    def test_invalid(self, field):
        with pytest.raises(ValidationError):
            McmcConfig(**field)


class TestDraws:

    def test_draws_are_read_only(self):
        d = PosteriorDraws(draws=np.zeros((3, 2)), acceptance_rate=0.3, seed_used=1)
        with pytest.raises(ValueError):
            d.draws[0, 0] = 1.0

    def test_warning_band(self):
        assert PosteriorDraws(draws=np.zeros((1, 2)), acceptance_rate=0.01, seed_used=0).warning
        assert not PosteriorDraws(draws=np.zeros((1, 2)), acceptance_rate=0.3, seed_used=0).warning

    def test_rejects_bad_shapes(self):
        with pytest.raises(DomainError):
            PosteriorDraws(draws=np.zeros(3), acceptance_rate=0.3, seed_used=0)
        with pytest.raises(DomainError):
            PosteriorDraws(draws=[[np.nan, 0.0]], acceptance_rate=0.3, seed_used=0)


class TestMetropolis:

    def test_output_shape_and_seed(self):
        cfg = McmcConfig(n_retained=25, burn_in=10, thin=3, seed=99)
        out = rw_metropolis(gaussian_target([0.0, 0.0]), Embedding([0.0, 0.0]), cfg)
        assert out.draws.shape == (25, 2)
        assert out.seed_used == 99
        assert 0.0 <= out.acceptance_rate <= 1.0

    def test_same_seed_same_draws(self):
        cfg = McmcConfig(n_retained=100, burn_in=20, thin=2, seed=5)
        a = rw_metropolis(gaussian_target([1.0, 2.0]), Embedding([0.0, 0.0]), cfg)
        b = rw_metropolis(gaussian_target([1.0, 2.0]), Embedding([0.0, 0.0]), cfg)
        np.testing.assert_array_equal(a.draws, b.draws)
        assert a.acceptance_rate == b.acceptance_rate

    def test_different_seed_different_draws(self):
        target = gaussian_target([0.0, 0.0])
        a = rw_metropolis(target, Embedding([0.0, 0.0]), McmcConfig(n_retained=50, seed=1))
        b = rw_metropolis(target, Embedding([0.0, 0.0]), McmcConfig(n_retained=50, seed=2))
        assert not np.array_equal(a.draws, b.draws)

    def test_chains_do_not_depend_on_batch(self, standard_prior3):
        Y = np.array([[0, 0, 100], [42, 14, 44], [46, 53, 1]])
        cfg = McmcConfig(n_retained=60, burn_in=30, thin=3, seed=8)
        seeds = [chain_seed(8, (1, *row)) for row in Y.tolist()]
        init = np.zeros((3, 3))
        together = run_chains(lambda Z: log_posterior_rows(Z, Y, standard_prior3), init, seeds, cfg)
        for p in range(3):
            Yp = Y[p:p + 1]
            (alone,) = run_chains(lambda Z: log_posterior_rows(Z, Yp, standard_prior3),
                                  init[p:p + 1], [seeds[p]], cfg)
            np.testing.assert_array_equal(alone.draws, together[p].draws)
            assert alone.spawn_key == (1, *Y[p].tolist())

    def test_flat_target_increments(self):
        cfg = McmcConfig(n_retained=5000, burn_in=0, thin=1, proposal_scale=0.7,
                         adapt=False, seed=3)
        out = rw_metropolis(lambda z: 0.0, Embedding([0.0, 0.0]), cfg)
        assert out.acceptance_rate == 1.0
        steps = np.diff(out.draws, axis=0)
        np.testing.assert_allclose(steps.std(axis=0, ddof=1), 0.7, rtol=0.05)
        assert np.all(np.abs(steps.mean(axis=0)) < 4 * 0.7 / np.sqrt(steps.shape[0]))

    def test_tiny_proposals_accept_nearly_everything(self):
        cfg = McmcConfig(n_retained=200, burn_in=0, thin=1, proposal_scale=1e-8,
                         adapt=False, seed=2)
        out = rw_metropolis(gaussian_target([0.5, -0.5]), Embedding([0.5, -0.5]), cfg)
        assert out.acceptance_rate > 0.99
        np.testing.assert_allclose(out.draws, [[0.5, -0.5]] * 200, atol=1e-6)

    def test_huge_proposals_are_flagged(self):
        cfg = McmcConfig(n_retained=300, burn_in=0, thin=1, proposal_scale=10.0,
                         adapt=False, seed=2)
        out = rw_metropolis(gaussian_target([0.0, 0.0], sd=1e-3), Embedding([0.0, 0.0]), cfg)
        assert out.acceptance_rate < 0.05
        assert out.warning

    def test_adaptation_moves_scale_toward_target(self):
        cfg = McmcConfig(n_retained=10, burn_in=2000, thin=1, proposal_scale=20.0, seed=6)
        out = rw_metropolis(gaussian_target([0.0, 0.0, 0.0]), Embedding([0.0, 0.0, 0.0]), cfg)
        assert out.final_scale < 20.0

    def test_non_finite_start(self):
        with pytest.raises(InitializationError):
            rw_metropolis(lambda z: -np.inf, Embedding([0.0, 0.0]), McmcConfig(n_retained=5))

    def test_non_finite_proposals_are_rejected(self):
        def half_plane(z):
            return 0.0 if z[0] >= 0 else np.nan

        cfg = McmcConfig(n_retained=500, burn_in=0, thin=1, adapt=False, seed=4)
        out = rw_metropolis(half_plane, Embedding([0.1, 0.0]), cfg)
        assert np.all(out.draws[:, 0] >= 0)

    @pytest.mark.slow
    def test_gaussian_moments(self):
        cfg = McmcConfig(n_retained=10000, burn_in=500, thin=10, seed=21)
        mean = np.array([1.0, -1.0, 0.0])
        out = rw_metropolis(gaussian_target(mean), Embedding(np.zeros(3)), cfg)
        ess = effective_sample_size(out)
        est = posterior_mean(out).z
        assert np.all(np.abs(est - mean) < 3.0 / np.sqrt(ess))
        squares = (out.draws - mean) ** 2
        se = squares.std(axis=0, ddof=1) / np.sqrt(effective_sample_size(squares))
        assert np.all(np.abs(squares.mean(axis=0) - 1.0) < 3.0 * se)
        np.testing.assert_allclose(np.diag(posterior_covariance(out)), 1.0, rtol=0.1)
        assert 0.1 < out.acceptance_rate < 0.6


class TestSummaries:

    def test_mean_of_single_draw(self):
        np.testing.assert_array_equal(posterior_mean(np.array([[1.0, 2.0]])).z, [1.0, 2.0])

    def test_symmetric_draws(self):
        arr = np.array([[1.0, -2.0], [-1.0, 2.0]])
        np.testing.assert_allclose(posterior_mean(arr).z, [0.0, 0.0], atol=0)
        np.testing.assert_allclose(posterior_covariance(np.array([[1.0, 0.0], [-1.0, 0.0]])),
                                   [[2.0, 0.0], [0.0, 0.0]])

    def test_identical_draws_have_zero_covariance(self):
        np.testing.assert_array_equal(posterior_covariance(np.ones((5, 3))), np.zeros((3, 3)))

    def test_covariance_needs_two_draws(self):
        with pytest.raises(DomainError):
            posterior_covariance(np.ones((1, 3)))

    def test_mean_needs_a_draw(self):
        with pytest.raises(DomainError):
            posterior_mean(np.empty((0, 2)))

    def test_ess_of_independent_draws(self):
        arr = np.random.default_rng(1).normal(size=(5000, 2))
        ess = effective_sample_size(arr)
        assert np.all((ess > 0.7 * 5000) & (ess < 1.3 * 5000))

    def test_ess_of_autocorrelated_draws(self):
        rng = np.random.default_rng(2)
        n, rho = 20000, 0.9
        x = np.empty(n)
        x[0] = rng.normal()
        for t in range(1, n):
            x[t] = rho * x[t - 1] + np.sqrt(1 - rho ** 2) * rng.normal()
        ess = effective_sample_size(x[:, None])[0]
        expected = n * (1 - rho) / (1 + rho)
        assert expected / 2 < ess < expected * 2

    def test_ess_of_constant_chain(self):
        assert effective_sample_size(np.ones((50, 1)))[0] == 50

    def test_batched_ess_matches_one_chain_at_a_time(self):
        rng = np.random.default_rng(3)
        chains = [rng.normal(size=(400, 2)), np.cumsum(rng.normal(size=(400, 2)), axis=0)]
        batched = chain_effective_sample_sizes(chains)
        assert batched.shape == (2, 2)
        for row, chain in zip(batched, chains):
            np.testing.assert_allclose(row, effective_sample_size(chain), rtol=1e-12)
        assert np.all(batched[1] < batched[0])

    def test_short_chain_reports_its_length(self):
        np.testing.assert_array_equal(effective_sample_size(np.zeros((3, 2))), [3.0, 3.0])

    def test_ess_is_logged_at_debug(self, caplog):
        cfg = McmcConfig(n_retained=50, burn_in=10, thin=1, seed=2)
        with caplog.at_level("DEBUG", logger="abstract_labelembed.sampler"):
            rw_metropolis(gaussian_target([0.0, 0.0]), Embedding([0.0, 0.0]), cfg)
        assert "effective sample size per dimension" in caplog.text
