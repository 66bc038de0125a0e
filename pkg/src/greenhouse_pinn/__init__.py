"""Coupled greenhouse temperature-humidity dynamics: reduced model, synthetic
benchmark generation, physics-informed and data-only training, and evaluation
reports."""

__version__ = "0.1.0"

from .model import (InitialCondition, ParameterSet, State, TimeGrid,
                    Trajectory, integrate_rk4, rhs)
from .forcings import ForcingSignals, default_forcings, forcings_from_config
from .synthetic import (Dataset, NoiseSpec, ObservationSet, add_noise,
                        generate_dataset, generate_reference, load_dataset,
                        save_dataset, subsample)
from .network import (NetworkModel, NetworkOutput, forward, init_network,
                      load_network, save_network)
from .training import (CollocationSet, LossBreakdown, LossWeights,
                       PinnResult, TrainablePhysicalParams, TrainingConfig,
                       loss_data, loss_ic, loss_phys, make_collocation,
                       residual_H, residual_T, total_loss, train_pinn)
from .baseline import BaselineResult, train_baseline
from .evaluation import (ChannelMetrics, ComparisonReport, RecoveryReport,
                         channel_metrics, compare_methods, noise_sweep,
                         recovery_report)
