"""Purely data-driven baseline: identical architecture and optimizer, with the
objective restricted to the observation misfit.

The baseline shares the network initialization (bit-identical per seed), the
optimizer, and the iteration budget with the coupled trainer, so any
difference in results is attributable solely to the objective.  No physical
parameters are trained and neither the dynamics residual nor the
initial-condition penalty contributes to any gradient step.
"""

from __future__ import annotations

from dataclasses import dataclass

from .network import NetworkModel, init_network
from .synthetic import ObservationSet
from .training import (LogCallback, LossWeights, TrainingConfig, _Objective,
                       _train_loop)


@dataclass
class BaselineResult:
    network: NetworkModel
    loss_history: list[tuple[int, float]]


def train_baseline(data: ObservationSet, cfg: TrainingConfig,
                   on_log: LogCallback | None = None) -> BaselineResult:
    """Minimize the observation loss alone over the network parameters.

    Honors ``cfg.loss_weights.w_data`` (so scaled-objective comparisons stay
    exact) and ignores the physics and ic weights by construction.
    """
    if data.count < 1:
        raise ValueError("training requires at least one observation")
    if cfg.loss_weights.w_data <= 0:
        raise ValueError("baseline training requires a positive data weight")
    net = init_network(cfg.hidden_layers, cfg.hidden_width, cfg.seed,
                       time_range=cfg.horizon, output_offset=cfg.output_offset,
                       output_scale=cfg.output_scale)
    objective = _Objective(obs=data, forcings=None, ic=None, colloc=None,
                           weights=LossWeights(cfg.loss_weights.w_data, 0.0, 0.0))
    history = _train_loop(net, None, objective, cfg, on_log)
    return BaselineResult(network=net,
                          loss_history=[(b.iteration, b.l_data) for b in history])
