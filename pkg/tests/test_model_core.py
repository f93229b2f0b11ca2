"""Vote records, Gaussian prior, marginal likelihoods and moments."""
import itertools
import math
import threading

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate
from scipy.special import comb, softmax
from scipy.stats import beta as beta_dist
from scipy.stats import multivariate_normal

from abstract_labelembed.imports import DomainError, NumericalError
from abstract_labelembed.model_core import (
    AnnotationDataset, ClassLabels, Embedding, GaussianPrior, GridRange, Instance,
    VoteCounts, beta_moments, clamp_events, counting_clamps, dirichlet_moments, reset_clamp_events,
    log_beta_binomial_marginal, log_dirichlet_multinomial_marginal, log_posterior, moment_surface,
)

from conftest import make_dataset


def compositions(J, K):
    for cuts in itertools.combinations(range(J + K - 1), K - 1):
        bounds = (-1,) + cuts + (J + K - 1,)
        yield tuple(bounds[i + 1] - bounds[i] - 1 for i in range(K))


class TestVoteRecords:

    def test_vote_counts_totals(self):
        v = VoteCounts.of([0, 0, 100])
        assert v.J == 100 and v.K == 3

    def test_zero_total_rejected(self):
        with pytest.raises(ValidationError):
            VoteCounts(counts=(0, 0, 0))

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            VoteCounts(counts=(3, -1))

    def test_class_labels_need_two_unique_names(self):
        with pytest.raises(ValidationError):
            ClassLabels(names=("a",))
        with pytest.raises(ValidationError):
            ClassLabels(names=("a", "a"))

    def test_duplicate_instance_ids_rejected(self):
        labels = ClassLabels(names=("a", "b"))
        inst = Instance(instance_id="x", votes=VoteCounts(counts=(1, 1)))
        with pytest.raises(ValidationError):
            AnnotationDataset(labels=labels, instances=(inst, inst))

    def test_dimension_mismatch_rejected(self):
        labels = ClassLabels(names=("a", "b", "c"))
        inst = Instance(instance_id="x", votes=VoteCounts(counts=(1, 1)))
        with pytest.raises(ValidationError):
            AnnotationDataset(labels=labels, instances=(inst,))

    def test_patterns_first_appearance(self):
        ds = make_dataset([(1, 2), (3, 0), (1, 2), (0, 4), (3, 0)])
        unique, inverse = ds.patterns()
        np.testing.assert_array_equal(unique, [[1, 2], [3, 0], [0, 4]])
        np.testing.assert_array_equal(inverse, [0, 1, 0, 2, 1])

    def test_drop_classes_removes_empty_instances(self):
        ds = make_dataset([(1, 2, 0), (0, 0, 5), (3, 1, 1)], names=("a", "b", "c"), golds=[1, 2, 0])
        dropped = ds.drop_classes(["c"])
        assert dropped.labels.names == ("a", "b")
        assert dropped.ids == ["s1", "s3"]
        assert dropped.instances[1].votes.counts == (3, 1)
        assert dropped.instances[0].gold == 1

    def test_drop_classes_keeps_two(self):
        ds = make_dataset([(1, 2, 3)])
        with pytest.raises(DomainError):
            ds.drop_classes(["c1", "c2"])

    def test_permute_classes(self):
        ds = make_dataset([(1, 2, 3)], golds=[0])
        perm = ds.permute_classes([2, 0, 1])
        assert perm.labels.names == ("c3", "c1", "c2")
        assert perm.instances[0].votes.counts == (3, 1, 2)
        assert perm.instances[0].gold == 1


class TestGaussianPrior:

    def test_log_density_matches_scipy(self):
        rng = np.random.default_rng(3)
        A = rng.normal(size=(4, 4))
        sigma = A @ A.T + 0.5 * np.eye(4)
        mu = rng.normal(size=4)
        prior = GaussianPrior(mu=mu, sigma=sigma)
        for _ in range(5):
            z = rng.normal(size=4)
            np.testing.assert_allclose(prior.log_density(z),
                                       multivariate_normal(mu, sigma).logpdf(z), rtol=1e-10)

    def test_rows_match_single(self):
        prior = GaussianPrior(mu=[1.0, -1.0, 0.0], sigma=np.diag([1.0, 2.0, 3.0]))
        Z = np.random.default_rng(0).normal(size=(6, 3))
        rows = prior.log_density_rows(Z)
        np.testing.assert_allclose(rows, [prior.log_density(z) for z in Z], rtol=0, atol=0)

    def test_singular_covariance_is_jittered(self):
        prior = GaussianPrior(mu=[0.0, 0.0], sigma=[[1.0, 1.0], [1.0, 1.0]])
        assert prior.jitter > 0
        assert prior.sigma[0, 0] > 1.0
        assert np.all(np.isfinite(prior.chol))

    def test_zero_covariance_gets_absolute_jitter(self):
        prior = GaussianPrior(mu=[0.0, 0.0], sigma=np.zeros((2, 2)))
        np.testing.assert_allclose(prior.sigma, 1e-8 * np.eye(2))

    def test_indefinite_covariance_fails(self):
        with pytest.raises(NumericalError):
            GaussianPrior(mu=[0.0, 0.0], sigma=[[1.0, 2.0], [2.0, 1.0]])

    def test_asymmetric_covariance_rejected(self):
        with pytest.raises(DomainError):
            GaussianPrior(mu=[0.0, 0.0], sigma=[[1.0, 0.5], [0.0, 1.0]])

    def test_non_finite_mean_rejected(self):
        with pytest.raises(DomainError):
            GaussianPrior(mu=[0.0, np.nan], sigma=np.eye(2))


class TestKernelNormalization:

    def test_beta_binomial_sums_to_one(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            z = rng.uniform(-4, 4, size=2)
            J = int(rng.integers(1, 101))
            total = sum(math.exp(log_beta_binomial_marginal(y, J, z)) for y in range(J + 1))
            assert abs(total - 1.0) < 1e-10

    @pytest.mark.parametrize("K", [2, 3, 4])
    @pytest.mark.parametrize("J", [1, 3, 6])
    def test_dirichlet_multinomial_sums_to_one(self, K, J):
        rng = np.random.default_rng(K * 10 + J)
        for _ in range(5):
            z = rng.uniform(-3, 3, size=K)
            total = sum(math.exp(log_dirichlet_multinomial_marginal(y, z))
                        for y in compositions(J, K))
            assert abs(total - 1.0) < 1e-10

    def test_two_class_equivalence(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            z = rng.uniform(-5, 5, size=2)
            J = int(rng.integers(1, 200))
            y = int(rng.integers(0, J + 1))
            np.testing.assert_allclose(
                log_dirichlet_multinomial_marginal((y, J - y), z),
                log_beta_binomial_marginal(y, J, z), rtol=1e-12, atol=1e-10)


class TestSpotValues:

    def test_beta_binomial_uniform(self):
        assert math.isclose(math.exp(log_beta_binomial_marginal(3, 10, (0.0, 0.0))), 1 / 11,
                            rel_tol=1e-12)

    def test_dirichlet_multinomial_uniform(self):
        assert math.isclose(math.exp(log_dirichlet_multinomial_marginal((1, 1, 0), np.zeros(3))),
                            1 / 6, rel_tol=1e-12)

    def test_beta_moments_uniform(self):
        m = beta_moments((0.0, 0.0))
        assert math.isclose(m.mean, 0.5, rel_tol=1e-12)
        assert math.isclose(m.variance, 1 / 12, rel_tol=1e-12)
        assert math.isclose(m.log_variance, math.log(1 / 12), rel_tol=1e-12)

    def test_dirichlet_moments_diagonal(self):
        m = dirichlet_moments(np.zeros(4))
        np.testing.assert_allclose(np.diag(m.cov), 0.0375, rtol=1e-12)
        np.testing.assert_allclose(m.mean, 0.25, rtol=1e-12)

    def test_dirichlet_moments_match_beta_for_two_classes(self):
        z = (0.3, -1.2)
        np.testing.assert_allclose(dirichlet_moments(z).cov[0, 0], beta_moments(z).variance,
                                   rtol=1e-12)

    def test_log_variance_stays_finite_for_large_z(self):
        m = beta_moments((25.0, 25.0))
        assert np.isfinite(m.log_variance)
        assert m.log_variance < -25


class TestOracles:

    def test_beta_binomial_matches_quadrature(self):
        a, b = math.exp(1.0), math.exp(-0.5)

        def integrand(p):
            return comb(5, 2) * p ** 2 * (1 - p) ** 3 * beta_dist.pdf(p, a, b)

        expected, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)
        got = math.exp(log_beta_binomial_marginal(2, 5, (1.0, -0.5)))
        assert abs(got - expected) < 1e-8

    def test_dirichlet_multinomial_matches_forward_simulation(self):
        rng = np.random.default_rng(20)
        z = np.array([0.5, 0.0, -1.0])
        N = 10 ** 6
        pi = rng.dirichlet(np.exp(z), size=N)
        Y = rng.multinomial(5, pi)
        hits = np.mean(np.all(Y == (3, 1, 1), axis=1))
        p = math.exp(log_dirichlet_multinomial_marginal((3, 1, 1), z))
        assert abs(hits - p) < 3 * math.sqrt(p * (1 - p) / N)

    def test_posterior_at_origin_matches_direct_density(self):
        prior = GaussianPrior(mu=np.zeros(3), sigma=10.0 * np.eye(3))
        gaussian = -1.5 * math.log(2 * math.pi * 10.0)
        np.testing.assert_allclose(log_posterior(np.zeros(3), (1, 1, 0), prior),
                                   math.log(1 / 6) + gaussian, rtol=1e-12)

    def test_beta_moments_match_sampled_beta(self):
        rng = np.random.default_rng(21)
        x = rng.beta(math.exp(2.0), math.exp(-2.0), size=10 ** 6)
        m = beta_moments((2.0, -2.0))
        assert m.mean == pytest.approx(math.exp(2) / (math.exp(2) + math.exp(-2)), rel=1e-12)
        sq = (x - x.mean()) ** 2
        assert abs(sq.mean() - m.variance) < 3 * sq.std(ddof=1) / math.sqrt(x.size)


class TestDirichletMoments:

    @pytest.fixture
    def z(self):
        return np.random.default_rng(12).normal(size=5)

    def test_mean_is_softmax(self, z):
        np.testing.assert_allclose(dirichlet_moments(z).mean, softmax(z), rtol=1e-15, atol=1e-16)

    def test_covariance_is_compositional(self, z):
        cov = dirichlet_moments(z).cov
        np.testing.assert_allclose(cov, cov.T, atol=1e-15)
        np.testing.assert_allclose(cov.sum(axis=1), 0.0, atol=1e-10)
        assert np.linalg.eigvalsh(cov).min() > -1e-10
        assert np.all(np.diag(cov) > 0)

    def test_two_class_example(self):
        m = dirichlet_moments((math.log(2.0), 0.0))
        np.testing.assert_allclose(m.mean, [2 / 3, 1 / 3], rtol=1e-12)
        assert m.cov[0, 0] == pytest.approx(1 / 18, rel=1e-12)

    def test_shift_keeps_mean_and_shrinks_covariance(self, z):
        base, shifted = dirichlet_moments(z), dirichlet_moments(z + 1.5)
        np.testing.assert_allclose(shifted.mean, base.mean, rtol=0, atol=1e-15)
        assert np.trace(shifted.cov) < np.trace(base.cov)

    def test_matches_sampled_dirichlet(self, z):
        rng = np.random.default_rng(13)
        N = 10 ** 6
        X = rng.dirichlet(np.exp(z), size=N)
        m = dirichlet_moments(z)
        se_mean = X.std(axis=0, ddof=1) / math.sqrt(N)
        assert np.all(np.abs(X.mean(axis=0) - m.mean) < 3 * se_mean)
        D = X - X.mean(axis=0)
        for j, k in itertools.combinations_with_replacement(range(5), 2):
            prod = D[:, j] * D[:, k]
            se = prod.std(ddof=1) / math.sqrt(N)
            assert abs(prod.sum() / (N - 1) - m.cov[j, k]) < 3 * se, (j, k)


class TestKernelErrors:

    def test_y_above_J(self):
        with pytest.raises(DomainError):
            log_beta_binomial_marginal(11, 10, (0.0, 0.0))

    def test_non_finite_z(self):
        with pytest.raises(DomainError):
            log_dirichlet_multinomial_marginal((1, 2), (0.0, np.inf))

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            log_dirichlet_multinomial_marginal((1, 2, 3), (0.0, 0.0))

    def test_posterior_dimension_mismatch(self, standard_prior3):
        with pytest.raises(DomainError):
            log_posterior((0.0, 0.0), (1, 1), standard_prior3)

    def test_clamp_is_counted_not_raised(self):
        with counting_clamps() as counter:
            value = log_dirichlet_multinomial_marginal((1, 1), (50.0, 0.0))
            assert clamp_events() == 1
        assert np.isfinite(value)
        assert counter.count == 1

    def test_reset_returns_the_count(self):
        with counting_clamps():
            log_dirichlet_multinomial_marginal((1, 1), (50.0, 0.0))
            assert reset_clamp_events() == 1
            assert clamp_events() == 0

    def test_clamp_counts_stay_in_their_own_scope(self):
        barrier = threading.Barrier(2)
        counts = {}

        def work(name, calls):
            with counting_clamps() as counter:
                barrier.wait()
                for _ in range(calls):
                    log_dirichlet_multinomial_marginal((1, 1), (50.0, 0.0))
                barrier.wait()
                counts[name] = counter.count

        threads = [threading.Thread(target=work, args=("busy", 3)),
                   threading.Thread(target=work, args=("quiet", 0))]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert counts == {"busy": 3, "quiet": 0}

    def test_posterior_is_marginal_plus_prior(self, standard_prior3):
        z, y = np.array([0.2, -0.1, 0.4]), (3, 1, 2)
        expected = log_dirichlet_multinomial_marginal(y, z) + standard_prior3.log_density(z)
        np.testing.assert_allclose(log_posterior(z, y, standard_prior3), expected, rtol=1e-14)


class TestEmbedding:

    def test_softmax(self):
        np.testing.assert_allclose(Embedding([0.0, 0.0]).softmax(), [0.5, 0.5])

    def test_rejects_nan(self):
        with pytest.raises(DomainError):
            Embedding([0.0, np.nan])


class TestMomentSurface:

    def test_inclusive_grid_size(self):
        surface = moment_surface(GridRange.parse("-3:3:0.1"), GridRange.parse("-3:3:0.1"))
        assert len(surface) == 3721
        at_origin = np.isclose(surface.z1, 0.0, atol=1e-9) & np.isclose(surface.z2, 0.0, atol=1e-9)
        assert at_origin.sum() == 1
        assert surface.mean[at_origin][0] == pytest.approx(0.5, abs=1e-12)

    def test_z1_outer_z2_inner(self):
        surface = moment_surface(GridRange.parse("0:1:1"), GridRange.parse("0:2:1"))
        rows = list(surface.rows())
        assert [(r.z1, r.z2) for r in rows] == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]

    def test_empty_grid(self):
        with pytest.raises(DomainError):
            moment_surface(GridRange.parse("1:0:0.5"), GridRange.parse("0:1:0.5"))

    @pytest.mark.parametrize("spec", ["1:2", "a:b:c", "0:1:0", "0:1:-1"])
    def test_bad_ranges(self, spec):
        with pytest.raises(DomainError):
            GridRange.parse(spec)

    def test_swapping_classes_mirrors_the_mean(self):
        grid = GridRange.parse("-3:3:0.5")
        surface = moment_surface(grid, grid)
        n = int(round(math.sqrt(len(surface))))
        M = np.asarray(surface.mean).reshape(n, n)
        np.testing.assert_allclose(M + M.T, 1.0, atol=1e-12)

    def test_mean_increases_with_z1(self):
        surface = moment_surface(GridRange.parse("-3:3:0.1"), GridRange.parse("-3:3:0.1"))
        M = np.asarray(surface.mean).reshape(61, 61)
        assert np.all(np.diff(M, axis=0) > 0)

    def test_origin_log_variance(self):
        surface = moment_surface(GridRange.parse("0:0:1"), GridRange.parse("0:0:1"))
        row = next(iter(surface.rows()))
        assert row.log_variance == pytest.approx(math.log(1 / 12), rel=1e-12)
