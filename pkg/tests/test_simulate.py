"""Forward simulation and recovery scoring."""
import itertools
import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.special import softmax

from abstract_labelembed.em_driver import FitResult
from abstract_labelembed.imports import DomainError, NumericalError
from abstract_labelembed.model_core import Embedding, GaussianPrior, log_dirichlet_multinomial_marginal
from abstract_labelembed.simulate import SimSpec, log_dirichlet_draw, recovery_score, sample_dataset


def fake_fit(Z, mu):
    K = Z.shape[1]
    return FitResult(
        labels=SimSpec.isotropic(n=1, J=1, mu=[0.0] * K).labels(),
        instance_ids=tuple(f"x{i}" for i in range(Z.shape[0])),
        embeddings=tuple(Embedding(z) for z in Z),
        final_prior=GaussianPrior(mu=mu, sigma=np.eye(K)),
        per_instance_cov=np.zeros((Z.shape[0], K, K)),
        final_draws=(),
        history=(),
        iterations_run=0,
        converged=False,
    )


class TestSpec:

    def test_isotropic(self):
        spec = SimSpec.isotropic(n=3, J=10, mu=[0.0, 1.0], variance=2.0)
        assert spec.sigma == ((2.0, 0.0), (0.0, 2.0))
        assert spec.votes_per_instance() == [10, 10, 10]
        assert spec.labels().names == ("c1", "c2")

    def test_J_list_must_match_n(self):
        with pytest.raises(ValidationError):
            SimSpec.isotropic(n=3, J=(5, 5), mu=[0.0, 0.0])

    def test_bad_sigma_shape(self):
        with pytest.raises(ValidationError):
            SimSpec(n=2, J=3, mu=(0.0, 0.0), sigma=((1.0, 0.0),))

    def test_indefinite_prior(self):
        spec = SimSpec(n=2, J=3, mu=(0.0, 0.0), sigma=((1.0, 3.0), (3.0, 1.0)))
        with pytest.raises(NumericalError):
            sample_dataset(spec)


class TestSampleDataset:

    def test_deterministic(self):
        spec = SimSpec.isotropic(n=50, J=20, mu=[0.5, 0.0, -0.5], seed=9)
        a, za = sample_dataset(spec)
        b, zb = sample_dataset(spec)
        assert a == b
        np.testing.assert_array_equal(za, zb)

    def test_ids_and_J(self):
        spec = SimSpec(n=12, J=tuple(range(1, 13)), mu=(0.0, 0.0),
                       sigma=((1.0, 0.0), (0.0, 1.0)), seed=1)
        ds, truth = sample_dataset(spec)
        assert ds.ids[0] == "sim01" and ds.ids[-1] == "sim12"
        assert [i.votes.J for i in ds.instances] == list(range(1, 13))
        assert truth.shape == (12, 2)

    def test_concentrated_prior_gives_unanimity(self):
        spec = SimSpec.isotropic(n=200, J=100, mu=[10.0, -10.0, -10.0], variance=1e-6, seed=4)
        ds, _ = sample_dataset(spec)
        unanimous = np.mean([i.votes.counts[0] == 100 for i in ds.instances])
        assert unanimous > 0.99

    def test_symmetric_prior_gives_uniform_mass(self):
        spec = SimSpec.isotropic(n=10000, J=1, mu=[0.0, 0.0, 0.0], variance=10.0, seed=5)
        _, truth = sample_dataset(spec)
        mass = softmax(truth, axis=1)
        se = mass.std(axis=0, ddof=1) / math.sqrt(mass.shape[0])
        assert np.all(np.abs(mass.mean(axis=0) - 1 / 3) < 4 * se)


class TestDirichletDraw:

    def test_small_shapes_keep_their_mean(self):
        rng = np.random.default_rng(0)
        alpha = np.array([0.1, 0.2, 0.3])
        draws = np.exp([log_dirichlet_draw(rng, np.log(alpha)) for _ in range(20000)])
        np.testing.assert_allclose(draws.sum(axis=1), 1.0, rtol=1e-12)
        mean = alpha / alpha.sum()
        se = draws.std(axis=0, ddof=1) / math.sqrt(draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - mean) < 4 * se)

    def test_tiny_shapes_stay_finite(self):
        rng = np.random.default_rng(1)
        log_pi = log_dirichlet_draw(rng, np.array([-25.0, -25.0, 0.0]))
        assert np.all(np.isfinite(log_pi))

    @pytest.mark.slow
    def test_votes_follow_the_marginal(self):
        rng = np.random.default_rng(3)
        z = np.array([0.4, -0.3, 0.1])
        J, N = 4, 100000
        tally = {}
        for _ in range(N):
            pi = np.exp(log_dirichlet_draw(rng, z))
            y = tuple(int(v) for v in rng.multinomial(J, pi / pi.sum()))
            tally[y] = tally.get(y, 0) + 1
        for cuts in itertools.combinations(range(J + 2), 2):
            y = (cuts[0], cuts[1] - cuts[0] - 1, J + 1 - cuts[1])
            p = math.exp(log_dirichlet_multinomial_marginal(y, z))
            se = math.sqrt(p * (1 - p) / N)
            assert abs(tally.get(y, 0) / N - p) < 4 * se


class TestRecovery:

    def test_perfect_fit(self):
        Z = np.random.default_rng(2).normal(size=(20, 3))
        score = recovery_score(Z, fake_fit(Z, Z.mean(axis=0)))
        assert score.rmse_mu == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(score.tv, 0.0, atol=1e-12)

    def test_constant_shift_leaves_tv_unchanged(self):
        Z = np.random.default_rng(3).normal(size=(20, 3))
        score = recovery_score(Z, fake_fit(Z + 2.0, Z.mean(axis=0) + 2.0))
        assert score.rmse_mu == pytest.approx(2.0, rel=1e-12)
        np.testing.assert_allclose(score.tv, 0.0, atol=1e-12)
        assert score.median_tv == pytest.approx(0.0, abs=1e-12)

    def test_shape_mismatch(self):
        Z = np.zeros((4, 3))
        with pytest.raises(DomainError):
            recovery_score(np.zeros((5, 3)), fake_fit(Z, np.zeros(3)))
