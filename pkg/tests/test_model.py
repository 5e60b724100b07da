import pytest
import sys
import os
import math
import numpy as np

# Add the parent directory to the path so we can import the modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from starisac.model import (
    ReceiveBeamformers,
    SensingSpec,
    StarRisProfile,
    TransmitCovariances,
    augmented_objective,
    constraint_residual,
    effective_channel,
    effective_channels,
    evaluate_solution,
    penalty,
    secrecy_rate,
    sensing_rate,
    sensing_rates,
    sensing_sinr,
    sum_secrecy_rate,
)
from starisac.scenario import ChannelSet, ScenarioConfig, generate_channels
from starisac.validation import DomainError, EvaluationError


def small_channels(seed=0, reflection_users=(0,)):
    rng = np.random.default_rng(seed)

    def cn(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)

    return ChannelSet(h_bs=cn(4, 3), h_bk=cn(2, 2, 3), h_sk=cn(2, 2, 4), v_t=0.5 * cn(1, 3),
                      v_r=cn(1, 2), g_si=0.2 * cn(2, 3), reflection_users=reflection_users)


def unit_phis(channels):
    phis = np.ones((channels.n_targets, channels.n_rx), dtype=complex)
    return ReceiveBeamformers(phis / np.linalg.norm(phis, axis=1, keepdims=True))


def some_covariances(channels, power=0.5):
    n = channels.n_users + channels.n_targets
    mats = np.stack([np.eye(channels.n_tx, dtype=complex) * power / (n * channels.n_tx)] * n)
    return TransmitCovariances(mats, channels.n_users)


class TestDomainTypes:
    """Test covariance, profile and beamformer containers"""

    def test_uniform_profile_is_feasible(self):
        profile = StarRisProfile.uniform(5)
        assert profile.is_feasible()
        assert np.allclose(profile.theta_r, math.sqrt(0.5))

    def test_stacked_round_trip(self):
        profile = StarRisProfile(np.array([1.0, 0.0]), np.array([0.0, 1.0j]))
        assert np.array_equal(StarRisProfile.from_stacked(profile.stacked).theta_t, profile.theta_t)

    def test_per_user_selects_region(self):
        profile = StarRisProfile(np.array([1.0 + 0j]), np.array([2.0 + 0j]))
        rows = profile.per_user(np.array([True, False]))
        assert rows[0, 0] == 1.0 and rows[1, 0] == 2.0

    def test_covariance_views(self):
        cov = TransmitCovariances.zeros(2, 1, 3)
        assert cov.comm.shape == (2, 3, 3)
        assert cov.sensing.shape == (1, 3, 3)
        assert cov.total_power() == 0.0
        assert cov.is_feasible(1.0)

    def test_interference_excludes_own_covariance(self):
        channels = small_channels()
        cov = some_covariances(channels)
        assert np.allclose(cov.interference(0), cov.mats[1] + cov.mats[2])

    def test_random_beamformers_are_unit_norm(self):
        phis = ReceiveBeamformers.random(3, 4, np.random.default_rng(0))
        assert np.allclose(np.linalg.norm(phis.phis, axis=1), 1.0)

    def test_sensing_spec_from_config(self):
        config = ScenarioConfig(n_targets=2, sensing_sinr_threshold=3.0)
        spec = SensingSpec.from_config(config)
        assert np.allclose(spec.thresholds, math.log(4.0))


class TestEffectiveChannel:
    """Test Z_k = H_Bk + H_Sk diag(theta_k) H_BS"""

    def test_no_surface_leaves_direct_link(self):
        channels = small_channels().without_ris()
        z = effective_channel(channels, StarRisProfile.uniform(4), 1)
        assert np.array_equal(z, channels.h_bk[1])

    def test_region_selects_profile_half(self):
        channels = small_channels(reflection_users=(0,))
        profile = StarRisProfile(np.ones(4, dtype=complex), np.zeros(4, dtype=complex))
        assert np.allclose(effective_channel(channels, profile, 0), channels.h_bk[0] + channels.h_sk[0] @ channels.h_bs)
        assert np.allclose(effective_channel(channels, profile, 1), channels.h_bk[1])

    def test_stack_matches_single(self):
        channels = small_channels(3)
        profile = StarRisProfile.uniform(4)
        stack = effective_channels(channels, profile)
        for k in range(2):
            assert np.allclose(stack[k], effective_channel(channels, profile, k))

    def test_user_index_checked(self):
        with pytest.raises(DomainError):
            effective_channel(small_channels(), StarRisProfile.uniform(4), 2)


class TestSecrecyRate:
    """Test per-user secrecy rates"""

    def test_zero_power_gives_zero(self):
        channels = small_channels()
        cov = TransmitCovariances.zeros(2, 1, 3)
        assert secrecy_rate(channels, cov, StarRisProfile.uniform(4), 0) == pytest.approx(0.0, abs=1e-14)

    def test_blocked_user_is_not_positive(self):
        channels = ChannelSet(h_bs=np.zeros((1, 2)), h_bk=np.zeros((1, 1, 2)), h_sk=np.zeros((1, 1, 1)),
                              v_t=np.ones((1, 2)), v_r=np.ones((1, 1)), g_si=np.zeros((1, 2)),
                              reflection_users=(0,))
        cov = TransmitCovariances(np.stack([np.eye(2), np.zeros((2, 2))]).astype(complex), 1)
        assert secrecy_rate(channels, cov, StarRisProfile.uniform(1), 0) < 0.0

    def test_scalar_closed_form(self):
        channels = ChannelSet(h_bs=np.ones((1, 1)), h_bk=np.full((1, 1, 1), 2.0), h_sk=np.zeros((1, 1, 1)),
                              v_t=np.full((1, 1), 0.5), v_r=np.ones((1, 1)), g_si=np.zeros((1, 1)),
                              reflection_users=(0,))
        cov = TransmitCovariances(np.array([[[0.6]], [[0.4]]], dtype=complex), 1)
        expected = (math.log(1 + 4 * 0.6 / (1 + 4 * 0.4)) - math.log(1 + 0.25 * 0.6 / (1 + 0.25 * 0.4)))
        assert secrecy_rate(channels, cov, StarRisProfile.uniform(1), 0) == pytest.approx(expected, rel=1e-12)

    def test_sum_matches_individual(self):
        channels = small_channels(4)
        cov = some_covariances(channels)
        profile = StarRisProfile.uniform(4)
        total = sum(secrecy_rate(channels, cov, profile, k) for k in range(2))
        assert sum_secrecy_rate(channels, cov, profile) == pytest.approx(total, rel=1e-12)

    def test_indefinite_interference_raises(self):
        channels = small_channels()
        mats = np.stack([-50.0 * np.eye(3)] * 3).astype(complex)
        with pytest.raises(EvaluationError):
            secrecy_rate(channels, TransmitCovariances(mats, 2), StarRisProfile.uniform(4), 0)


class TestSensing:
    """Test sensing SINR, rate and constraint residual"""

    def setup_method(self):
        self.channels = small_channels(6)
        self.spec = SensingSpec(thresholds=np.array([0.4]), mean_rcs=0.5)
        self.phis = unit_phis(self.channels)

    def test_zero_power_gives_zero_sinr(self):
        cov = TransmitCovariances.zeros(2, 1, 3)
        assert sensing_sinr(self.channels, cov, self.phis[0], 0, self.spec) == 0.0
        assert sensing_rate(self.channels, cov, self.phis[0], 0, self.spec) == 0.0

    def test_sinr_closed_form(self):
        cov = some_covariances(self.channels)
        sigma = cov.total()
        echo = self.channels.v_r_mats[0].conj().T @ self.phis[0]
        g = self.channels.g_si.conj().T @ self.phis[0]
        expected = (0.5 * np.real(echo.conj() @ sigma @ echo)
                    / (np.real(g.conj() @ sigma @ g) + 1.0))
        assert sensing_sinr(self.channels, cov, self.phis[0], 0, self.spec) == pytest.approx(expected, rel=1e-12)

    def test_rate_is_log1p_of_sinr(self):
        cov = some_covariances(self.channels)
        sinr = sensing_sinr(self.channels, cov, self.phis[0], 0, self.spec)
        assert sensing_rate(self.channels, cov, self.phis[0], 0, self.spec) == pytest.approx(math.log1p(sinr))
        assert sensing_rates(self.channels, cov, self.phis, self.spec)[0] == pytest.approx(math.log1p(sinr))

    def test_residual_at_zero_power(self):
        cov = TransmitCovariances.zeros(2, 1, 3)
        residual = constraint_residual(self.channels, cov, self.phis[0], 0, self.spec, 0.25)
        assert residual == pytest.approx(0.4 + 0.25)

    def test_residual_vanishes_at_matching_slack(self):
        cov = some_covariances(self.channels, power=5.0)
        rate = sensing_rate(self.channels, cov, self.phis[0], 0, self.spec)
        spec = SensingSpec(thresholds=np.array([0.5 * rate]), mean_rcs=0.5)
        residual = constraint_residual(self.channels, cov, self.phis[0], 0, spec, 0.5 * rate)
        assert residual == pytest.approx(0.0, abs=1e-12)

    def test_negative_slack_rejected(self):
        cov = some_covariances(self.channels)
        with pytest.raises(DomainError):
            constraint_residual(self.channels, cov, self.phis[0], 0, self.spec, -0.1)

    def test_target_index_checked(self):
        cov = some_covariances(self.channels)
        with pytest.raises(DomainError):
            sensing_sinr(self.channels, cov, self.phis[0], 1, self.spec)


class TestAugmentedObjective:
    """Test the augmented Lagrangian"""

    def setup_method(self):
        self.channels = small_channels(8)
        self.cov = some_covariances(self.channels)
        self.profile = StarRisProfile.uniform(4)
        self.phis = unit_phis(self.channels)

    def test_equals_true_objective_when_residuals_vanish(self):
        rates = sensing_rates(self.channels, self.cov, self.phis, SensingSpec(np.zeros(1), 0.5))
        spec = SensingSpec(thresholds=rates, mean_rcs=0.5)
        value = augmented_objective(self.channels, self.cov, self.profile, np.zeros(1), np.array([3.0]), 0.1,
                                    self.phis, spec)
        assert value == pytest.approx(sum_secrecy_rate(self.channels, self.cov, self.profile), rel=1e-12)

    def test_penalty_formula(self):
        assert penalty(np.array([2.0]), np.array([0.5]), 4.0) == pytest.approx(0.5 * 2.0 + 4.0 / 8.0)

    def test_non_positive_rho_rejected(self):
        spec = SensingSpec(thresholds=np.ones(1), mean_rcs=0.5)
        with pytest.raises(DomainError):
            augmented_objective(self.channels, self.cov, self.profile, np.zeros(1), np.zeros(1), 0.0,
                                self.phis, spec)
        with pytest.raises(DomainError):
            penalty(np.ones(1), np.zeros(1), -1.0)


class TestEvaluateSolution:
    """Test reported solution metrics"""

    def test_metrics_consistency(self):
        config = ScenarioConfig(n_tx=3, n_rx=2, n_user_antennas=2, n_ris_elements=4, n_users=2, n_targets=1)
        channels = generate_channels(config, seed=2)
        cov = some_covariances(channels, power=config.p_max)
        profile = StarRisProfile.uniform(4)
        phis = unit_phis(channels)
        spec = SensingSpec.from_config(config)

        metrics = evaluate_solution(channels, cov, profile, phis, spec)

        assert metrics.sum_secrecy_bits == pytest.approx(metrics.sum_secrecy_nats / math.log(2.0), rel=1e-12)
        assert metrics.clamped_sum_secrecy_nats >= metrics.sum_secrecy_nats - 1e-12
        assert metrics.sum_secrecy_nats == pytest.approx(sum(metrics.per_user_secrecy))
        assert metrics.total_power == pytest.approx(config.p_max)
        assert metrics.sensing_rates[0] == pytest.approx(math.log1p(metrics.sensing_sinr[0]))
        assert set(metrics.to_dict()) >= {"sum_secrecy_nats", "sensing_rates", "sensing_satisfied"}
