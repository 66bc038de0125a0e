"""Forcing signals, benchmark generation, subsampling, noise, dataset I/O."""

import json
from pathlib import Path

import numpy as np
import pytest

from greenhouse_pinn.errors import DatasetFormatError
from greenhouse_pinn.forcings import (default_forcing_config, default_forcings,
                                      forcings_from_config)
from greenhouse_pinn.model import TimeGrid, Trajectory
from greenhouse_pinn.synthetic import (TRUE_PARAMETERS,
                                       NoiseSpec, ObservationSet, add_noise,
                                       clean_observations, generate_dataset,
                                       generate_reference, load_dataset,
                                       save_dataset, subsample)

FIXTURE = Path(__file__).parent / "data" / "benchmark_small.json"


def _flat_trajectory(n):
    """Cheap stand-in trajectory; subsampling ignores the values."""
    times = np.linspace(0.0, 72.0, n)
    return Trajectory(times=times, temperature=np.zeros(n), humidity=np.zeros(n))


class TestDefaultForcings:
    def test_outdoor_temperature_has_24h_period(self):
        f = default_forcings()
        ts = np.linspace(0.0, 72.0, 289)
        assert np.allclose(f.t_out(ts), f.t_out(ts + 24.0), atol=1e-9)
        assert np.allclose(f.h_out(ts), f.h_out(ts + 24.0), atol=1e-9)

    def test_radiation_zero_at_night(self):
        f = default_forcings()
        assert f.radiation(0.0) == 0.0
        night = np.concatenate([np.linspace(0.0, 5.99, 50),
                                np.linspace(18.01, 24.0, 50)])
        assert np.all(f.radiation(night) == 0.0)

    def test_radiation_positive_in_daytime(self):
        f = default_forcings()
        day = np.linspace(6.5, 17.5, 50)
        assert np.all(f.radiation(day) > 0.0)

    def test_proxies_nonnegative_over_horizon(self):
        f = default_forcings()
        ts = np.linspace(0.0, 72.0, 7201)
        for name in ("radiation", "ventilation", "moisture"):
            assert np.all(getattr(f, name)(ts) >= 0.0), name

    def test_outdoor_temperature_mean_equals_offset(self):
        # trapezoid-rule quadrature over one full period
        f = default_forcings()
        ts = np.linspace(0.0, 24.0, 20001)
        mean = np.trapezoid(f.t_out(ts), ts) / 24.0
        assert mean == pytest.approx(15.0, abs=1e-6)

    def test_config_reconstruction_matches(self):
        config = default_forcing_config()
        rebuilt = forcings_from_config(config)
        ts = np.linspace(0.0, 72.0, 101)
        f = default_forcings()
        for name in ("t_out", "h_out", "radiation", "ventilation", "moisture"):
            assert np.array_equal(getattr(f, name)(ts), getattr(rebuilt, name)(ts))

    def test_negative_proxy_config_rejected(self):
        config = default_forcing_config()
        config["ventilation"]["offset"] = -0.2
        with pytest.raises(ValueError, match="ventilation"):
            forcings_from_config(config)


class TestGenerateReference:
    def test_starts_at_benchmark_state(self):
        grid = TimeGrid(0.0, 2.0, 0.01)
        traj = generate_reference(TRUE_PARAMETERS, default_forcings(), grid)
        assert traj.temperature[0] == 22.0
        assert traj.humidity[0] == 70.0

    def test_zero_parameters_give_constant_trajectory(self):
        from greenhouse_pinn.model import ParameterSet
        grid = TimeGrid(0.0, 2.0, 0.1)
        traj = generate_reference(ParameterSet(0, 0, 0, 0, 0, 0, 0, 0),
                                  default_forcings(), grid)
        assert np.all(traj.temperature == 22.0)
        assert np.all(traj.humidity == 70.0)


class TestSubsample:
    def test_full_fraction_retains_every_node(self):
        traj = _flat_trajectory(101)
        obs = subsample(traj, 1.0, seed=0)
        assert obs.count == 101
        assert np.array_equal(obs.times, traj.times)

    def test_quarter_fraction_on_benchmark_grid(self):
        # floor(0.25 * 7201) = 1800 retained nodes, start node included
        traj = _flat_trajectory(7201)
        obs = subsample(traj, 0.25, seed=3)
        assert obs.count == 1800
        assert obs.times[0] == 0.0

    def test_deterministic_per_seed(self):
        traj = _flat_trajectory(500)
        a = subsample(traj, 0.3, seed=42)
        b = subsample(traj, 0.3, seed=42)
        assert np.array_equal(a.times, b.times)

    def test_different_seeds_differ(self):
        traj = _flat_trajectory(500)
        a = subsample(traj, 0.3, seed=1)
        b = subsample(traj, 0.3, seed=2)
        assert not np.array_equal(a.times, b.times)

    def test_times_are_grid_subset_and_sorted(self):
        traj = _flat_trajectory(1000)
        obs = subsample(traj, 0.2, seed=9)
        assert np.all(np.diff(obs.times) > 0)
        assert np.all(np.isin(obs.times, traj.times))

    @pytest.mark.parametrize("fraction", [0.0, -0.1, 1.2])
    def test_fraction_outside_unit_interval_rejected(self, fraction):
        with pytest.raises(ValueError, match="fraction"):
            subsample(_flat_trajectory(100), fraction, seed=0)

    def test_too_few_retained_nodes_rejected(self):
        with pytest.raises(ValueError, match="fewer than 2"):
            subsample(_flat_trajectory(100), 0.01, seed=0)


class TestAddNoise:
    def _obs(self, n=2000):
        times = np.linspace(0.0, 72.0, n)
        return ObservationSet(times=times, temp_obs=np.full(n, 20.0),
                              hum_obs=np.full(n, 75.0))

    def test_zero_sigma_is_identity(self):
        obs = self._obs()
        noisy = add_noise(obs, NoiseSpec(0.0, 0.0, seed=5))
        assert np.array_equal(noisy.temp_obs, obs.temp_obs)
        assert np.array_equal(noisy.hum_obs, obs.hum_obs)

    def test_sample_deviation_matches_spec(self):
        obs = self._obs(2000)
        noisy = add_noise(obs, NoiseSpec(0.30, 1.00, seed=7))
        sd_t = np.std(noisy.temp_obs - obs.temp_obs, ddof=1)
        sd_h = np.std(noisy.hum_obs - obs.hum_obs, ddof=1)
        assert abs(sd_t - 0.30) < 0.03
        assert abs(sd_h - 1.00) < 0.10

    def test_channels_are_independent_streams(self):
        obs = self._obs(2000)
        noisy = add_noise(obs, NoiseSpec(1.0, 1.0, seed=7))
        corr = np.corrcoef(noisy.temp_obs - obs.temp_obs,
                           noisy.hum_obs - obs.hum_obs)[0, 1]
        assert abs(corr) < 0.1

    def test_lag_one_autocorrelation_near_zero(self):
        obs = self._obs(2000)
        noisy = add_noise(obs, NoiseSpec(0.30, 1.00, seed=13))
        for delta in (noisy.temp_obs - obs.temp_obs, noisy.hum_obs - obs.hum_obs):
            centered = delta - delta.mean()
            rho = np.dot(centered[:-1], centered[1:]) / np.dot(centered, centered)
            assert abs(rho) < 0.1

    def test_deterministic_per_seed_and_seed_sensitivity(self):
        obs = self._obs(100)
        a = add_noise(obs, NoiseSpec(0.3, 1.0, seed=21))
        b = add_noise(obs, NoiseSpec(0.3, 1.0, seed=21))
        c = add_noise(obs, NoiseSpec(0.3, 1.0, seed=22))
        assert np.array_equal(a.temp_obs, b.temp_obs)
        assert not np.array_equal(a.temp_obs, c.temp_obs)


class TestObservationSet:
    def test_non_monotone_times_rejected(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            ObservationSet(times=np.array([0.0, 2.0, 1.0]),
                           temp_obs=np.zeros(3), hum_obs=np.zeros(3))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="equal length"):
            ObservationSet(times=np.array([0.0, 1.0]),
                           temp_obs=np.zeros(2), hum_obs=np.zeros(3))


def _small_dataset(seed=0):
    return generate_dataset(seed=seed, fraction=0.25, sigma_T=0.3, sigma_H=1.0,
                            grid=TimeGrid(0.0, 72.0, 0.5))


class TestDatasetIO:
    def test_round_trip_is_bit_exact(self, tmp_path):
        ds = _small_dataset()
        path = tmp_path / "ds.json"
        save_dataset(ds, path)
        loaded = load_dataset(path)
        assert loaded.meta == ds.meta
        assert np.array_equal(loaded.observations.times, ds.observations.times)
        assert np.array_equal(loaded.observations.temp_obs, ds.observations.temp_obs)
        assert np.array_equal(loaded.observations.hum_obs, ds.observations.hum_obs)
        assert np.array_equal(loaded.reference.times, ds.reference.times)
        assert np.array_equal(loaded.reference.temperature, ds.reference.temperature)
        assert np.array_equal(loaded.reference.humidity, ds.reference.humidity)

    def test_non_monotone_times_rejected_on_load(self, tmp_path):
        ds = _small_dataset()
        path = tmp_path / "ds.json"
        save_dataset(ds, path)
        doc = json.loads(path.read_text())
        doc["observations"]["t"][0], doc["observations"]["t"][1] = (
            doc["observations"]["t"][1], doc["observations"]["t"][0])
        path.write_text(json.dumps(doc))
        with pytest.raises(DatasetFormatError, match="strictly increasing"):
            load_dataset(path)

    def test_malformed_json_reports_line_number(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n "meta": {\n  broken\n}\n')
        with pytest.raises(DatasetFormatError, match="line 3"):
            load_dataset(path)

    def test_header_observation_count_enforced(self, tmp_path):
        ds = _small_dataset()
        path = tmp_path / "ds.json"
        save_dataset(ds, path)
        doc = json.loads(path.read_text())
        doc["meta"]["n_obs"] = doc["meta"]["n_obs"] + 1
        path.write_text(json.dumps(doc))
        with pytest.raises(DatasetFormatError, match="n_obs"):
            load_dataset(path)

    def test_shipped_fixture_reproduces_recorded_count(self):
        ds = load_dataset(FIXTURE)
        assert ds.observations.count == ds.meta.n_obs
        regenerated = generate_dataset(
            seed=ds.meta.seed, fraction=ds.meta.fraction, sigma_T=ds.meta.sigma_T,
            sigma_H=ds.meta.sigma_H, grid=ds.meta.grid,
            params=ds.meta.true_params, forcing_config=ds.meta.forcing_config)
        assert regenerated.meta.n_obs == ds.meta.n_obs
        assert np.array_equal(regenerated.observations.times, ds.observations.times)


class TestPipelineDeterminism:
    def test_same_seed_reproduces_everything(self):
        a = _small_dataset(seed=17)
        b = _small_dataset(seed=17)
        assert np.array_equal(a.observations.temp_obs, b.observations.temp_obs)
        assert np.array_equal(a.observations.hum_obs, b.observations.hum_obs)
        assert np.array_equal(a.reference.temperature, b.reference.temperature)

    def test_observation_times_are_reference_nodes(self):
        ds = _small_dataset(seed=4)
        assert np.all(np.isin(ds.observations.times, ds.reference.times))

    def test_clean_observations_match_reference(self):
        ds = _small_dataset(seed=4)
        clean = clean_observations(ds)
        idx = np.searchsorted(ds.reference.times, clean.times)
        assert np.array_equal(clean.temp_obs, ds.reference.temperature[idx])
        noise = ds.observations.temp_obs - clean.temp_obs
        assert np.std(noise) > 0.1  # the stored observations really are noisy
