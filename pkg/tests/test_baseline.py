"""Data-only baseline trainer and its parity with the coupled trainer."""

import numpy as np
import pytest

from greenhouse_pinn.baseline import train_baseline
from greenhouse_pinn.evaluation import method_metrics
from greenhouse_pinn.model import TimeGrid
from greenhouse_pinn.network import init_network, parameter_vector
from greenhouse_pinn.synthetic import ObservationSet, generate_dataset
from greenhouse_pinn.training import LossWeights, TrainingConfig, train_pinn


def _tiny_dataset(seed=3):
    return generate_dataset(seed=seed, fraction=0.5, sigma_T=0.1, sigma_H=0.3,
                            grid=TimeGrid(0.0, 72.0, 1.0))


def _tiny_config(**overrides):
    base = dict(iterations=80, hidden_layers=1, hidden_width=8,
                collocation_count=16, seed=5, log_every=20)
    base.update(overrides)
    return TrainingConfig(**base)


class TestParity:
    def test_network_initialization_is_bit_identical_to_coupled(self):
        cfg = _tiny_config()
        a = init_network(cfg.hidden_layers, cfg.hidden_width, cfg.seed,
                         time_range=cfg.horizon)
        b = init_network(cfg.hidden_layers, cfg.hidden_width, cfg.seed,
                         time_range=cfg.horizon)
        assert np.array_equal(parameter_vector(a), parameter_vector(b))

    def test_theta_iterates_match_data_only_coupled_training(self):
        # with physics and ic weights at zero, the coupled trainer performs
        # exactly the baseline's computation: final weights agree bit for bit
        ds = _tiny_dataset()
        cfg = _tiny_config(loss_weights=LossWeights(1.0, 0.0, 0.0))
        coupled = train_pinn(ds.observations, ds.forcings(),
                             ds.initial_condition(), cfg)
        base = train_baseline(ds.observations, cfg)
        assert np.array_equal(parameter_vector(coupled.network),
                              parameter_vector(base.network))
        coupled_data = [(b.iteration, b.l_data) for b in coupled.history]
        assert coupled_data == base.loss_history

    def test_objective_is_pure_data_loss(self):
        # gradients carry no physics or ic contribution: training on weights
        # (w, 5, 7) gives the same iterates as (w, 0, 0) because the baseline
        # ignores those terms entirely
        ds = _tiny_dataset()
        a = train_baseline(ds.observations,
                           _tiny_config(loss_weights=LossWeights(1.0, 5.0, 7.0)))
        b = train_baseline(ds.observations,
                           _tiny_config(loss_weights=LossWeights(1.0, 0.0, 0.0)))
        assert np.array_equal(parameter_vector(a.network),
                              parameter_vector(b.network))


class TestTrainBaseline:
    def test_loss_history_is_data_loss_only(self):
        ds = _tiny_dataset()
        result = train_baseline(ds.observations, _tiny_config())
        iterations = [it for it, _ in result.loss_history]
        assert iterations == [1, 20, 40, 60, 80]
        assert all(np.isfinite(v) and v >= 0.0 for _, v in result.loss_history)

    def test_single_observation_training_completes(self):
        obs = ObservationSet(times=np.array([36.0]), temp_obs=np.array([25.0]),
                             hum_obs=np.array([60.0]))
        result = train_baseline(obs, _tiny_config(iterations=40))
        flat = parameter_vector(result.network)
        assert np.all(np.isfinite(flat))

    def test_zero_data_weight_rejected(self):
        ds = _tiny_dataset()
        with pytest.raises(ValueError, match="data weight"):
            train_baseline(ds.observations,
                           _tiny_config(loss_weights=LossWeights(0.0, 1.0, 0.0)))

    def test_interpolates_dense_clean_data(self):
        # fraction 1.0 with zero noise: the fit should approach interpolation
        ds = generate_dataset(seed=2, fraction=1.0, sigma_T=0.0, sigma_H=0.0,
                              grid=TimeGrid(0.0, 72.0, 0.2))
        rmse_t, rmse_h = [], []
        for seed in (0, 1, 2):
            cfg = TrainingConfig(iterations=20000, learning_rate=3e-3,
                                 seed=seed, log_every=2000)
            result = train_baseline(ds.observations, cfg)
            m = method_metrics(result.network, ds.reference)
            rmse_t.append(m.temperature.rmse)
            rmse_h.append(m.humidity.rmse)
        assert np.median(rmse_t) < 0.05
        assert np.median(rmse_h) < 0.05
