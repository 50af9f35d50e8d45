"""Simulation harness: determinism, sampling, KS distances, experiments."""
import math

import numpy as np
import pytest

from renydiv import (
    DomainError,
    JointDistribution,
    ProbVector,
    SimConfig,
    UndefinedStatisticError,
    UsageError,
    bias_experiment,
    coverage_experiment,
    ks_distance_normal,
    mixture_distribution,
    normal_quantile,
    sample_joint,
    sample_multinomial,
    simulate_statistic,
)
from renydiv.montecarlo import replicate_stream


class TestSampling:
    def test_single_draw(self):
        c = sample_multinomial(ProbVector.uniform(5), 1, replicate_stream(0, 0))
        assert c.n == 1
        assert (c.counts == 1).sum() == 1

    def test_degenerate_p(self):
        c = sample_multinomial([1.0, 0.0], 50, replicate_stream(0, 1))
        assert c.counts[0] == 50 and c.counts[1] == 0

    def test_uniform_concentration(self):
        n = 30000
        c = sample_multinomial(ProbVector.uniform(3), n, replicate_stream(3, 0))
        bound = 4 * math.sqrt((1 / 3) * (2 / 3) / n)
        assert np.max(np.abs(c.counts / n - 1 / 3)) < bound

    def test_joint_point_mass(self):
        mat = np.zeros((3, 3))
        mat[1, 2] = 1.0
        t = sample_joint(JointDistribution(mat), 25, replicate_stream(1, 0))
        assert t.cells == {(1, 2): 25}

    def test_joint_product_marginals(self):
        p = np.array([0.6, 0.4])
        q = np.array([0.3, 0.7])
        t = sample_joint(JointDistribution.product(p, q), 20000, replicate_stream(2, 0))
        assert t.n == 20000
        bound = 4 * math.sqrt(0.25 / 20000)
        assert abs(t.row_counts()[0] / t.n - 0.6) < bound
        assert abs(t.col_counts()[0] / t.n - 0.3) < bound

    def test_equal_marginal_joint_balance(self):
        p = np.array([0.5, 0.3, 0.2])
        joint = JointDistribution.diagonal_mix(p, 0.4)
        rows = np.zeros(3)
        cols = np.zeros(3)
        for r in range(50):
            t = sample_joint(joint, 1000, replicate_stream(5, r))
            rows += t.row_counts()
            cols += t.col_counts()
        assert np.max(np.abs(rows - cols) / rows.sum()) < 0.01


class TestKSDistance:
    def test_plugin_quantiles(self):
        b = 500
        samples = [normal_quantile((i - 0.5) / b) for i in range(1, b + 1)]
        assert ks_distance_normal(samples) <= 0.5 / b + 1e-9

    def test_point_mass_at_median(self):
        assert ks_distance_normal(np.zeros(100)) == pytest.approx(0.5, abs=1e-12)

    def test_iid_normal_small(self):
        rng = np.random.default_rng(201)
        assert ks_distance_normal(rng.standard_normal(2000)) < 0.05

    def test_needs_two(self):
        with pytest.raises(DomainError):
            ks_distance_normal([0.0])


BASE = dict(family="power_law", beta=1.0, m=30, epsilon=1.0, alpha=0.5,
            B=40, master_seed=7)


class TestSimulateStatistic:
    def test_determinism_across_workers(self):
        cfg1 = SimConfig(statistic="thm1_entropy", workers=1, **BASE)
        cfg4 = SimConfig(statistic="thm1_entropy", workers=4, **BASE)
        r1 = simulate_statistic(cfg1)
        r4 = simulate_statistic(cfg4)
        assert np.array_equal(r1.samples, r4.samples)
        assert r1.ks_distance == r4.ks_distance
        assert np.array_equal(r1.qq_pairs, r4.qq_pairs)

    def test_seed_changes_samples(self):
        cfg = SimConfig(statistic="thm1_entropy", **BASE)
        cfg2 = SimConfig(statistic="thm1_entropy",
                         **{**BASE, "master_seed": 8})
        assert not np.array_equal(simulate_statistic(cfg).samples,
                                  simulate_statistic(cfg2).samples)

    @pytest.mark.parametrize("statistic,extra", [
        ("thm1_entropy", {}),
        ("lemma2_pearson", {}),
        ("thm2_divergence", {"family": "bivariate_product", "beta2": 0.5}),
        ("thm4_degenerate_divergence", {"family": "bivariate_product"}),
        ("lemma2_two_sample", {"family": "bivariate_product"}),
    ])
    def test_each_statistic_runs(self, statistic, extra):
        cfg = SimConfig(statistic=statistic, **{**BASE, **extra})
        run = simulate_statistic(cfg)
        assert run.samples.shape == (BASE["B"],)
        assert np.all(np.isfinite(run.samples))
        assert 0 <= run.ks_distance <= 1
        assert run.qq_pairs.shape == (BASE["B"], 2)

    def test_thm3_on_uniform(self):
        cfg = SimConfig(family="uniform", statistic="thm3_uniform_entropy",
                        m=30, epsilon=1.5, alpha=0.5, B=40, master_seed=7)
        run = simulate_statistic(cfg)
        assert np.all(np.isfinite(run.samples))

    def test_thm3_requires_uniform_family(self):
        cfg = SimConfig(statistic="thm3_uniform_entropy", **BASE)
        with pytest.raises(UsageError):
            simulate_statistic(cfg)

    def test_thm3_undefined_when_n_below_m(self):
        cfg = SimConfig(family="uniform", statistic="thm3_uniform_entropy",
                        m=30, epsilon=-0.5, alpha=0.5, B=40, master_seed=7)
        with pytest.raises(UndefinedStatisticError):
            simulate_statistic(cfg)

    def test_thm1_degenerate_on_uniform_family(self):
        cfg = SimConfig(family="uniform", statistic="thm1_entropy",
                        m=30, epsilon=1.0, alpha=0.5, B=40, master_seed=7)
        with pytest.raises(UsageError):
            simulate_statistic(cfg)

    def test_thm2_degenerate_on_equal_marginals(self):
        cfg = SimConfig(family="bivariate_product", statistic="thm2_divergence",
                        beta=1.0, m=30, epsilon=1.0, alpha=0.5, B=40, master_seed=7)
        with pytest.raises(UsageError):
            simulate_statistic(cfg)

    def test_univariate_statistic_rejects_bivariate_family(self):
        cfg = SimConfig(family="bivariate_product", statistic="thm1_entropy",
                        beta=1.0, m=30, epsilon=1.0, alpha=0.5, B=40, master_seed=7)
        with pytest.raises(UsageError):
            simulate_statistic(cfg)

    def test_thinning_runs_and_is_deterministic(self):
        cfg = SimConfig(statistic="thm1_entropy", thinning_tau=0.7, **BASE)
        r1 = simulate_statistic(cfg)
        r2 = simulate_statistic(cfg)
        assert np.array_equal(r1.samples, r2.samples)
        plain = simulate_statistic(SimConfig(statistic="thm1_entropy", **BASE))
        assert not np.array_equal(r1.samples, plain.samples)

    def test_noise_and_signal_family(self):
        cfg = SimConfig(family="noise_and_signal", p0=0.3, statistic="thm1_entropy",
                        m=20, epsilon=1.5, alpha=0.5, B=40, master_seed=7)
        run = simulate_statistic(cfg)
        assert np.all(np.isfinite(run.samples))

    def test_bivariate_joint_family(self):
        cfg = SimConfig(family="bivariate_joint", beta=0.5, diag_weight=0.3,
                        statistic="thm4_degenerate_divergence",
                        m=15, epsilon=1.5, alpha=0.5, B=30, master_seed=7)
        run = simulate_statistic(cfg)
        assert np.all(np.isfinite(run.samples))


class TestExperiments:
    def test_coverage_smoke(self):
        cfg = SimConfig(family="power_law", beta=1.0, m=50, n_override=20000,
                        statistic="thm1_entropy", alpha=0.5, B=200, master_seed=11)
        cov = coverage_experiment(cfg, 0.95)
        assert 0.85 <= cov <= 1.0

    def test_coverage_degrades_at_tiny_n(self):
        cfg = SimConfig(family="power_law", beta=0.87, m=165, n_override=82,
                        statistic="thm1_entropy", alpha=0.5, B=200, master_seed=12)
        assert coverage_experiment(cfg, 0.95) < 0.9

    def test_coverage_level_consistency(self):
        cfg = SimConfig(family="power_law", beta=1.0, m=50, n_override=20000,
                        statistic="thm1_entropy", alpha=0.5, B=400, master_seed=13)
        cov = coverage_experiment(cfg, 0.5)
        assert abs(cov - 0.5) < 0.1

    def test_coverage_statistic_domain(self):
        cfg = SimConfig(family="uniform", statistic="lemma2_pearson",
                        m=20, epsilon=1.0, B=10, master_seed=0)
        with pytest.raises(UsageError):
            coverage_experiment(cfg, 0.95)

    def test_bias_direction_and_size(self):
        cfg = SimConfig(family="power_law", beta=1.0, m=100, n_override=10**5,
                        statistic="thm1_entropy", alpha=0.5, B=400, master_seed=14)
        bias = bias_experiment(cfg)
        assert bias <= 3e-4  # <= 0 up to MC noise
        assert abs(bias) < 0.01

    def test_bias_under_sampling_regime(self):
        cfg = SimConfig(family="power_law", beta=1.0, m=100, n_override=10,
                        statistic="thm1_entropy", alpha=0.5, B=200, master_seed=15)
        assert bias_experiment(cfg) < -0.2

    def test_bias_divergence_direction(self):
        cfg = SimConfig(family="bivariate_product", beta=0.87, beta2=0.97,
                        m=100, n_override=20000, statistic="thm2_divergence",
                        alpha=0.5, B=200, master_seed=16)
        assert bias_experiment(cfg) <= 3e-4


class TestCLTQualityInvariants:
    def test_figure1_monotone_ks_entropy(self):
        # CLT quality improves strictly with sampling depth on the power law
        ks = {}
        for eps in (-0.5, 0.5, 1.5):
            cfg = SimConfig(family="power_law", beta=1.0, m=300, epsilon=eps,
                            alpha=0.5, B=700, statistic="thm1_entropy",
                            master_seed=31)
            ks[eps] = simulate_statistic(cfg).ks_distance
        assert ks[1.5] < ks[0.5] < ks[-0.5], ks

    def test_figure1_monotone_ks_pearson(self):
        # the 0.5-vs-1.5 gap for the Pearson statistic is a few 1e-3 at this
        # scale, below single-run KS noise; averaging independent runs
        # resolves the true ordering
        def mean_ks(eps, runs=12, B=2000):
            vals = []
            for k in range(runs):
                cfg = SimConfig(family="power_law", beta=1.0, m=300, epsilon=eps,
                                alpha=0.5, B=B, statistic="lemma2_pearson",
                                master_seed=3100 + k)
                vals.append(simulate_statistic(cfg).ks_distance)
            return float(np.mean(vals))

        ks_15 = mean_ks(1.5)
        ks_05 = mean_ks(0.5)
        ks_m05 = mean_ks(-0.5, runs=2)
        assert ks_15 < ks_05 < ks_m05, (ks_15, ks_05, ks_m05)

    def test_full_scale_design_override(self):
        # the shrunk desk defaults can be overridden to the full design
        # (m=1000, B=5000); the normalized-entropy statistic carries a
        # deterministic plug-in bias shift ~ -0.11 there, so its KS distance
        # concentrates near 0.05 even at full depth
        ks = {}
        for eps in (-0.5, 1.5):
            cfg = SimConfig(family="power_law", beta=1.0, m=1000, epsilon=eps,
                            alpha=0.5, B=5000, statistic="thm1_entropy",
                            master_seed=42, workers=4)
            ks[eps] = simulate_statistic(cfg).ks_distance
        assert 0.02 < ks[1.5] < 0.09
        assert ks[-0.5] > 0.25

    def test_thinning_leaves_ks_close_at_passing_scale(self):
        # at a depth where the CLT passes, binomial thinning moves KS < 0.02
        common = dict(family="power_law", beta=1.0, m=300,
                      n_override=155_884_500, alpha=0.5, B=1500,
                      statistic="thm1_entropy", master_seed=777)
        plain = simulate_statistic(SimConfig(**common)).ks_distance
        thinned = simulate_statistic(
            SimConfig(thinning_tau=0.7, **common)
        ).ks_distance
        assert plain < 0.05
        assert abs(plain - thinned) < 0.02


class TestMixtureFamily:
    def test_mixture_distribution_valid(self):
        mix = mixture_distribution(signal_beta=0.87, signal_m=40, signal_fraction=0.54,
                                   noise_block_sizes=(100, 50),
                                   noise_block_fractions=(0.26, 0.20))
        assert mix.m == 190
        assert math.isclose(float(np.sum(mix.probs)), 1.0, abs_tol=1e-12)

    def test_mixture_mass_mismatch(self):
        with pytest.raises(DomainError):
            mixture_distribution(signal_beta=1.0, signal_m=10, signal_fraction=0.5,
                                 noise_block_sizes=(10,), noise_block_fractions=(0.4,))

    def test_config_validation(self):
        with pytest.raises(UsageError):
            SimConfig(family="bogus", m=10, statistic="thm1_entropy",
                      epsilon=1.0).validate()
        with pytest.raises(UsageError):
            SimConfig(family="power_law", beta=1.0, m=10,
                      statistic="bogus", epsilon=1.0).validate()
        with pytest.raises(UsageError):
            SimConfig(family="power_law", beta=1.0, m=10,
                      statistic="thm1_entropy").n()
