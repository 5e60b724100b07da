import pytest
import sys
import os
import json
import math
import numpy as np

# Add the parent directory to the path so we can import the modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from starisac.scenario import (
    PathLossExponents,
    ScenarioConfig,
    build_geometry,
    db_to_linear,
    dbm_to_watts,
    dump_channels,
    generate_channels,
    load_channels,
    load_scenario_config,
    path_loss_db,
    steering_vector,
    watts_to_dbm,
)
from starisac.validation import ConfigError, DomainError


def small_config(**overrides):
    fields = dict(n_tx=3, n_rx=2, n_user_antennas=2, n_ris_elements=8, n_users=3, n_targets=2)
    fields.update(overrides)
    return ScenarioConfig(**fields)


class TestUnits:
    """Test unit conversions and the path-loss law"""

    def test_conversions(self):
        assert dbm_to_watts(30.0) == pytest.approx(1.0)
        assert watts_to_dbm(0.01) == pytest.approx(10.0)
        assert db_to_linear(10.0) == pytest.approx(10.0)

    def test_path_loss_examples(self):
        assert path_loss_db(1.0, 2.0) == pytest.approx(-30.0)
        assert path_loss_db(10.0, 2.2) == pytest.approx(-52.0)

    def test_path_loss_vectorized(self):
        losses = path_loss_db(np.array([1.0, 10.0]), 2.0)
        assert np.allclose(losses, [-30.0, -50.0])

    @pytest.mark.parametrize("distance", [0.0, -3.0, math.inf])
    def test_path_loss_rejects_bad_distance(self, distance):
        with pytest.raises(DomainError):
            path_loss_db(distance, 2.0)

    def test_noise_power(self):
        assert ScenarioConfig().noise_power == pytest.approx(3.98e-14, rel=1e-3)


class TestSteeringVector:
    """Test the uniform linear array response"""

    def test_broadside(self):
        assert np.allclose(steering_vector(0.0, 4), np.ones(4))

    def test_endfire_alternates(self):
        assert np.allclose(steering_vector(np.pi / 2, 3), [1.0, -1.0, 1.0])

    def test_unit_modulus(self):
        assert np.allclose(np.abs(steering_vector(0.3, 16)), 1.0)

    def test_empty_array(self):
        assert steering_vector(0.3, 0).shape == (0,)

    def test_negative_size_rejected(self):
        with pytest.raises(DomainError):
            steering_vector(0.0, -1)


class TestScenarioConfig:
    """Test configuration defaults, validation and parsing"""

    def test_defaults(self):
        config = ScenarioConfig()
        assert config.p_max_dbm == pytest.approx(10.0)
        assert config.sensing_sinr_db == pytest.approx(5.0)
        assert config.reflection_user_indices == (0, 1)
        assert config.path_loss_exponents == PathLossExponents()

    def test_odd_user_count_favors_reflection(self):
        assert small_config(n_users=3).reflection_user_indices == (0, 1)

    @pytest.mark.parametrize("changes", [
        {"n_users": 0},
        {"n_tx": 0},
        {"system_variant": "mirror"},
        {"p_max": 0.0},
        {"mean_rcs": -1.0},
        {"n_ris_elements": 0},
        {"reflection_user_indices": (5,)},
        {"target_azimuths_deg": (10.0,)},
        {"rician_factor": -1.0},
    ])
    def test_invalid_values_rejected(self, changes):
        with pytest.raises(ConfigError):
            small_config(**changes)

    def test_no_ris_may_drop_elements(self):
        config = small_config(n_ris_elements=0, system_variant="NoRIS")
        assert config.n_ris_elements == 0

    def test_from_dict_converts_decibels(self):
        config = ScenarioConfig.from_dict({"p_max_dbm": 20.0, "sensing_sinr_db": 0.0,
                                           "path_loss_exponents": {"direct": 3.0},
                                           "reflection_user_indices": [0]})
        assert config.p_max == pytest.approx(0.1)
        assert config.sensing_sinr_threshold == pytest.approx(1.0)
        assert config.path_loss_exponents.direct == 3.0
        assert config.reflection_user_indices == (0,)

    def test_from_dict_rejects_both_spellings(self):
        with pytest.raises(ConfigError):
            ScenarioConfig.from_dict({"p_max_dbm": 20.0, "p_max": 0.1})

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ConfigError) as exc_info:
            ScenarioConfig.from_dict({"n_antennas": 4})
        assert "n_antennas" in str(exc_info.value)

    def test_dict_round_trip(self):
        config = small_config(rng_seed=9, target_azimuths_deg=(15.0, 45.0))
        assert ScenarioConfig.from_dict(config.to_dict()) == config

    def test_load_section_and_flat_documents(self, tmp_path):
        sectioned = tmp_path / "sectioned.json"
        sectioned.write_text(json.dumps({"scenario": {"n_users": 2}, "solver": {"window": 3}}))
        flat = tmp_path / "flat.json"
        flat.write_text(json.dumps({"n_users": 3, "solver": {"window": 3}}))

        assert load_scenario_config(sectioned).n_users == 2
        assert load_scenario_config(flat).n_users == 3

    def test_load_failures_are_config_errors(self, tmp_path):
        broken = tmp_path / "broken.json"
        broken.write_text("{not json")
        with pytest.raises(ConfigError):
            load_scenario_config(broken)
        with pytest.raises(ConfigError):
            load_scenario_config(tmp_path / "missing.json")


class TestGeometry:
    """Test node placement"""

    def test_users_inside_their_disks(self):
        config = small_config(n_users=6)
        geometry = build_geometry(config, seed=2)
        for k, position in enumerate(geometry.user_positions):
            center = config.reflection_center if k in config.reflection_user_indices else config.transmission_center
            assert np.linalg.norm(position - np.asarray(center)) <= config.user_radius + 1e-9

    def test_target_layout(self):
        geometry = build_geometry(small_config(), seed=0)
        assert np.allclose(geometry.target_distances, [15.0, 20.0])
        assert np.allclose(geometry.target_azimuths, np.deg2rad([20.0, 40.0]))

    def test_explicit_azimuths(self):
        geometry = build_geometry(small_config(target_azimuths_deg=(-30.0, 60.0)), seed=0)
        assert np.allclose(geometry.target_azimuths, np.deg2rad([-30.0, 60.0]))


class TestChannelGeneration:
    """Test channel realizations"""

    def test_shapes(self):
        channels = generate_channels(small_config(), seed=1)
        assert channels.h_bs.shape == (8, 3)
        assert channels.h_bk.shape == (3, 2, 3)
        assert channels.h_sk.shape == (3, 2, 8)
        assert channels.v_t.shape == (2, 3)
        assert channels.v_r.shape == (2, 2)
        assert channels.g_si.shape == (2, 3)
        assert channels.v_r_mats.shape == (2, 2, 3)
        assert channels.reflection_users == (0, 1)
        assert channels.is_finite()

    def test_deterministic_per_seed(self):
        first = generate_channels(small_config(), seed=4)
        second = generate_channels(small_config(), seed=4)
        other = generate_channels(small_config(), seed=5)
        assert np.array_equal(first.h_sk, second.h_sk)
        assert not np.array_equal(first.h_bk, other.h_bk)

    def test_default_seed_from_config(self):
        assert np.array_equal(generate_channels(small_config(rng_seed=3)).g_si,
                              generate_channels(small_config(), seed=3).g_si)

    def test_arrays_are_read_only(self):
        channels = generate_channels(small_config(), seed=0)
        with pytest.raises(ValueError):
            channels.h_bk[0, 0, 0] = 1.0

    def test_no_ris_zeroes_surface_links(self):
        channels = generate_channels(small_config(system_variant="NoRIS"), seed=0)
        assert not np.any(channels.h_bs)
        assert not np.any(channels.h_sk)
        assert np.any(channels.h_bk)

    def test_surface_size_leaves_other_links_alone(self):
        small = generate_channels(small_config(n_ris_elements=4), seed=6)
        large = generate_channels(small_config(n_ris_elements=32), seed=6)
        assert np.array_equal(small.h_bk, large.h_bk)
        assert np.array_equal(small.g_si, large.g_si)
        assert np.array_equal(small.v_t, large.v_t)

    def test_self_interference_has_unit_variance(self):
        channels = generate_channels(small_config(n_tx=128, n_rx=128), seed=0)
        assert np.mean(np.abs(channels.g_si) ** 2) == pytest.approx(1.0, rel=0.03)

    def test_rician_mean_power_matches_path_loss(self):
        config = small_config(n_tx=100, n_ris_elements=200)
        channels = generate_channels(config, seed=0)
        distance = np.linalg.norm(np.asarray(config.ris_position) - np.asarray(config.bs_position))
        expected = db_to_linear(path_loss_db(distance, config.path_loss_exponents.bs_ris)) / config.noise_power
        assert np.mean(np.abs(channels.h_bs) ** 2) == pytest.approx(expected, rel=0.03)

    def test_target_rows_are_scaled_steering_vectors(self):
        config = small_config()
        channels = generate_channels(config, seed=0)
        gain = db_to_linear(path_loss_db(15.0, config.path_loss_exponents.bs_target)) / config.noise_power
        assert np.allclose(np.abs(channels.v_t[0]) ** 2, gain)
        assert np.allclose(np.abs(channels.v_r), 1.0)

    def test_without_ris(self):
        channels = generate_channels(small_config(), seed=0).without_ris()
        assert not np.any(channels.h_bs) and not np.any(channels.h_sk)


class TestChannelDump:
    """Test the binary channel dump"""

    def test_round_trip(self, tmp_path):
        config = small_config()
        channels = generate_channels(config, seed=2)
        path = dump_channels(channels, tmp_path / "channels.bin")

        loaded = load_channels(path, config)

        expected_bytes = 8 * sum(getattr(channels, name).size
                                 for name in ("h_bs", "h_bk", "h_sk", "v_t", "v_r", "g_si"))
        assert path.stat().st_size == expected_bytes
        assert np.allclose(loaded.h_sk, channels.h_sk, rtol=1e-6)
        assert np.allclose(loaded.v_t, channels.v_t, rtol=1e-6)
        assert loaded.reflection_users == channels.reflection_users

    def test_size_mismatch(self, tmp_path):
        path = dump_channels(generate_channels(small_config(), seed=2), tmp_path / "channels.bin")
        with pytest.raises(ConfigError):
            load_channels(path, small_config(n_ris_elements=9))
