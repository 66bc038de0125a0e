"""Joint state-reconstruction and coefficient-identification training.

The trainable set is the network parameters theta plus an unconstrained
8-vector phi; the physical coefficients enter the dynamics as exp(phi),
which keeps them strictly positive at every iterate.  The objective is a
weighted sum of three terms:

  data     mean squared misfit against the sparse noisy observations,
  physics  mean squared dynamics residual at collocation points, where the
           residual subtracts the model right-hand side (built from exp(phi))
           from the network's exact time derivative,
  ic       squared misfit against the prescribed start state.

Optimization is full-batch first-order adaptive moment estimation.  Every
loss evaluation and gradient is recorded through the reverse-mode tape, so
gradients flow through the tangent propagation (for the physics term) and
the exponential reparameterization (for phi) exactly.

Setting the physics and ic weights to zero reduces the loop to the purely
data-driven trainer: the recorded computation is then identical to the
baseline's, so theta iterates match it bit for bit under a shared seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import DivergenceError
from .forcings import ForcingSignals
from .model import InitialCondition, ParameterSet
from .network import (NetworkModel, TapedParameters, evaluate, init_network,
                      taped_evaluate)
from .synthetic import ObservationSet
from .tape import Tape, Var, grad_or_zeros


@dataclass
class TrainablePhysicalParams:
    """Unconstrained phi with exposed coefficients exp(phi).

    The exponential keeps every exposed coefficient strictly positive for any
    phi above the float64 underflow threshold (about -745); training never
    approaches that regime.
    """

    phi: np.ndarray

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float).reshape(8)
        if not np.all(np.isfinite(self.phi)):
            raise ValueError("phi must be finite")

    @classmethod
    def from_initial_value(cls, value: float = 0.1) -> "TrainablePhysicalParams":
        if value <= 0:
            raise ValueError(f"initial coefficient value must be positive, got {value}")
        return cls(np.full(8, math.log(value)))

    @classmethod
    def from_coefficients(cls, coefficients) -> "TrainablePhysicalParams":
        coefficients = np.asarray(coefficients, dtype=float)
        if np.any(coefficients <= 0):
            raise ValueError("coefficients must be strictly positive")
        return cls(np.log(coefficients))

    @property
    def coefficients(self) -> np.ndarray:
        return np.exp(self.phi)

    def to_parameter_set(self) -> ParameterSet:
        return ParameterSet.from_array(self.coefficients)


@dataclass(frozen=True)
class LossWeights:
    """Nonnegative weights for the data, physics, and ic terms."""

    w_data: float = 1.0
    w_phys: float = 1.0
    w_ic: float = 1.0

    def __post_init__(self):
        weights = (self.w_data, self.w_phys, self.w_ic)
        if any(w < 0 for w in weights):
            raise ValueError(f"loss weights must be nonnegative, got {weights}")
        if not any(w > 0 for w in weights):
            raise ValueError("at least one loss weight must be positive")


@dataclass(frozen=True)
class CollocationSet:
    """Times at which the dynamics residual is penalized."""

    times: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.size < 1:
            raise ValueError("collocation set must contain at least one point")
        object.__setattr__(self, "times", times)

    @property
    def count(self) -> int:
        return self.times.size


def make_collocation(start: float, end: float, n: int,
                     strategy: str = "uniform-grid",
                     seed: int | None = None) -> CollocationSet:
    """Place ``n`` collocation points in [start, end].

    ``uniform-grid`` includes both endpoints; ``seeded-uniform-random`` draws
    i.i.d. uniform times (sorted), deterministic per seed.
    """
    if n < 1:
        raise ValueError(f"need at least one collocation point, got {n}")
    if strategy == "uniform-grid":
        return CollocationSet(np.linspace(start, end, n))
    if strategy == "seeded-uniform-random":
        if seed is None:
            raise ValueError("seeded-uniform-random requires a seed")
        rng = np.random.default_rng(seed)
        return CollocationSet(np.sort(rng.uniform(start, end, n)))
    raise ValueError(f"unknown collocation strategy {strategy!r}")


@dataclass(frozen=True)
class LossBreakdown:
    """Per-iteration loss record; l_total is the weighted sum of the parts."""

    iteration: int
    l_data: float
    l_phys: float
    l_ic: float
    l_total: float

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in
                   (self.l_data, self.l_phys, self.l_ic, self.l_total))


@dataclass(frozen=True)
class TrainingConfig:
    """Hyperparameters shared by both trainers.

    The defaults are the benchmark settings: 3x64 tanh network, 2000
    uniform-grid collocation points over [0, 72] h, adaptive moment
    estimation at learning rate 1e-3 for 20000 full-batch iterations.
    """

    iterations: int = 20000
    learning_rate: float = 1e-3
    loss_weights: LossWeights = field(default_factory=LossWeights)
    collocation_count: int = 2000
    collocation_strategy: str = "uniform-grid"
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    hidden_layers: int = 3
    hidden_width: int = 64
    horizon: tuple[float, float] = (0.0, 72.0)
    output_offset: tuple[float, float] = (22.0, 70.0)
    output_scale: tuple[float, float] = (10.0, 20.0)
    phi_initial: float = 0.1
    log_every: int = 100

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")
        if self.log_every < 1:
            raise ValueError(f"log_every must be >= 1, got {self.log_every}")

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "learning_rate": self.learning_rate,
            "loss_weights": {"w_data": self.loss_weights.w_data,
                             "w_phys": self.loss_weights.w_phys,
                             "w_ic": self.loss_weights.w_ic},
            "collocation_count": self.collocation_count,
            "collocation_strategy": self.collocation_strategy,
            "seed": self.seed,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "hidden_layers": self.hidden_layers,
            "hidden_width": self.hidden_width,
            "horizon": list(self.horizon),
            "output_offset": list(self.output_offset),
            "output_scale": list(self.output_scale),
            "phi_initial": self.phi_initial,
            "log_every": self.log_every,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingConfig":
        d = dict(d)
        if "loss_weights" in d:
            d["loss_weights"] = LossWeights(**d["loss_weights"])
        for key in ("horizon", "output_offset", "output_scale"):
            if key in d:
                d[key] = tuple(d[key])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown training config fields: {sorted(unknown)}")
        return cls(**d)


# -- dynamics residuals --------------------------------------------------------

def _residual_arrays(temp, hum, d_temp, d_hum, coeffs, forcing_values):
    """Residuals of both channels; works on plain arrays and taped Vars."""
    t_out, h_out, rad, vent, moist = forcing_values
    a1, a2, a3, a4 = coeffs[0], coeffs[1], coeffs[2], coeffs[3]
    b1, b2, b3, b4 = coeffs[4], coeffs[5], coeffs[6], coeffs[7]
    r_temp = d_temp - (a1 * (t_out - temp) + a2 * rad
                       - a3 * (vent * (temp - t_out)) + a4 * (hum - h_out))
    r_hum = d_hum - (b1 * (h_out - hum) + b2 * moist
                     - b3 * (vent * (hum - h_out)) + b4 * (t_out - temp))
    return r_temp, r_hum


def residual_T(net: NetworkModel, params: TrainablePhysicalParams,
               forcings: ForcingSignals, t: float) -> float:
    """Temperature-channel residual at one time."""
    values, tangents = evaluate(net, [t], with_tangent=True)
    forcing_values = forcings.evaluate(t)
    r_temp, _ = _residual_arrays(values[0, 0], values[1, 0],
                                 tangents[0, 0], tangents[1, 0],
                                 params.coefficients, forcing_values)
    return float(r_temp)


def residual_H(net: NetworkModel, params: TrainablePhysicalParams,
               forcings: ForcingSignals, t: float) -> float:
    """Humidity-channel residual at one time."""
    values, tangents = evaluate(net, [t], with_tangent=True)
    forcing_values = forcings.evaluate(t)
    _, r_hum = _residual_arrays(values[0, 0], values[1, 0],
                                tangents[0, 0], tangents[1, 0],
                                params.coefficients, forcing_values)
    return float(r_hum)


# -- loss terms (plain evaluation) ---------------------------------------------

def loss_data(net: NetworkModel, obs: ObservationSet) -> float:
    """(1/N) sum of squared misfits over both channels."""
    if obs.count < 1:
        raise ValueError("observation set is empty")
    values, _ = evaluate(net, obs.times, with_tangent=False)
    d_temp = values[0] - obs.temp_obs
    d_hum = values[1] - obs.hum_obs
    return float(np.sum(d_temp * d_temp + d_hum * d_hum) / obs.count)


def loss_phys(net: NetworkModel, params: TrainablePhysicalParams,
              forcings: ForcingSignals, colloc: CollocationSet) -> float:
    """(1/N_r) sum of squared residuals over both channels."""
    if colloc.count < 1:
        raise ValueError("collocation set is empty")
    values, tangents = evaluate(net, colloc.times, with_tangent=True)
    forcing_values = forcings.evaluate(colloc.times)
    r_temp, r_hum = _residual_arrays(values[0], values[1], tangents[0], tangents[1],
                                     params.coefficients, forcing_values)
    return float(np.sum(r_temp * r_temp + r_hum * r_hum) / colloc.count)


def loss_ic(net: NetworkModel, ic: InitialCondition) -> float:
    """Squared misfit against the prescribed start state."""
    values, _ = evaluate(net, [ic.t0], with_tangent=False)
    d_temp = values[0, 0] - ic.state0.temperature
    d_hum = values[1, 0] - ic.state0.humidity
    return float(d_temp * d_temp + d_hum * d_hum)


def total_loss(net: NetworkModel, params: TrainablePhysicalParams,
               forcings: ForcingSignals, obs: ObservationSet,
               colloc: CollocationSet, ic: InitialCondition,
               weights: LossWeights) -> LossBreakdown:
    """Weighted combination of all three terms (iteration recorded as 0)."""
    l_d = loss_data(net, obs)
    l_p = loss_phys(net, params, forcings, colloc)
    l_i = loss_ic(net, ic)
    total = weights.w_data * l_d + weights.w_phys * l_p + weights.w_ic * l_i
    return LossBreakdown(iteration=0, l_data=l_d, l_phys=l_p, l_ic=l_i, l_total=total)


# -- taped objective -----------------------------------------------------------

class _Objective:
    """Precomputed constants plus a taped graph builder for one configuration.

    Loss terms with zero weight are skipped entirely (and logged as 0.0), so
    a data-only configuration performs exactly the data-only computation.
    """

    def __init__(self, obs: ObservationSet | None, forcings: ForcingSignals | None,
                 ic: InitialCondition | None, colloc: CollocationSet | None,
                 weights: LossWeights):
        self.weights = weights
        self.use_data = weights.w_data > 0
        self.use_phys = weights.w_phys > 0
        self.use_ic = weights.w_ic > 0

        if self.use_data:
            if obs is None or obs.count < 1:
                raise ValueError("data term requires a nonempty observation set")
            self.obs_times = obs.times
            self.obs_matrix = np.vstack([obs.temp_obs, obs.hum_obs])
        if self.use_phys:
            if colloc is None or forcings is None:
                raise ValueError("physics term requires collocation points and forcings")
            self.colloc_times = colloc.times
            self.forcing_values = forcings.evaluate(colloc.times)
        if self.use_ic:
            if ic is None:
                raise ValueError("ic term requires an initial condition")
            self.ic_time = ic.t0
            self.ic_target = np.array([[ic.state0.temperature], [ic.state0.humidity]])

    @property
    def needs_phi(self) -> bool:
        return self.use_phys

    def build(self, params: TapedParameters, phi_var: Var | None):
        """Record the total loss; returns (total Var, LossBreakdown floats)."""
        w = self.weights
        l_data = l_phys = l_ic = 0.0
        total = None

        if self.use_data:
            values, _ = taped_evaluate(params, self.obs_times, with_tangent=False)
            diff = values - self.obs_matrix
            term = (diff * diff).sum() / len(self.obs_times)
            l_data = term.item()
            piece = w.w_data * term
            total = piece if total is None else total + piece

        if self.use_phys:
            if phi_var is None:
                raise ValueError("physics term requires trainable phi")
            values, tangents = taped_evaluate(params, self.colloc_times, with_tangent=True)
            lam = phi_var.exp()
            coeffs = [lam[k] for k in range(8)]
            r_temp, r_hum = _residual_arrays(values[0], values[1],
                                             tangents[0], tangents[1],
                                             coeffs, self.forcing_values)
            term = ((r_temp * r_temp).sum() + (r_hum * r_hum).sum()) / len(self.colloc_times)
            l_phys = term.item()
            piece = w.w_phys * term
            total = piece if total is None else total + piece

        if self.use_ic:
            values, _ = taped_evaluate(params, [self.ic_time], with_tangent=False)
            diff = values - self.ic_target
            term = (diff * diff).sum()
            l_ic = term.item()
            piece = w.w_ic * term
            total = piece if total is None else total + piece

        return total, (l_data, l_phys, l_ic, total.item())


# -- optimizer ----------------------------------------------------------------

class Adam:
    """First-order adaptive moment estimation with bias correction,
    updating parameter arrays in place."""

    def __init__(self, arrays: list[np.ndarray], learning_rate: float,
                 beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.arrays = arrays
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m = [np.zeros_like(a) for a in arrays]
        self.v = [np.zeros_like(a) for a in arrays]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.arrays, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.epsilon)


# -- training loops ------------------------------------------------------------

# Called at each logging interval with (iteration, breakdown, coefficients);
# coefficients is None when no physical parameters are being trained.
LogCallback = Callable[[int, LossBreakdown, np.ndarray | None], None]


class PinnResult(NamedTuple):
    network: NetworkModel
    parameters: ParameterSet
    history: list[LossBreakdown]


def _train_loop(net: NetworkModel, phi: TrainablePhysicalParams | None,
                objective: _Objective, cfg: TrainingConfig,
                on_log: LogCallback | None = None) -> list[LossBreakdown]:
    """Run the full-batch optimization, mutating ``net`` (and ``phi``) in place."""
    trainables = list(net.weights) + list(net.biases)
    if phi is not None:
        trainables.append(phi.phi)
    optimizer = Adam(trainables, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)

    history: list[LossBreakdown] = []
    for it in range(1, cfg.iterations + 1):
        tape = Tape()
        params = TapedParameters(tape, net)
        phi_var = tape.var(phi.phi) if phi is not None else None

        # overflow here is diagnosed by the finite check, not by warnings
        with np.errstate(over="ignore", invalid="ignore"):
            total_var, (l_d, l_p, l_i, l_t) = objective.build(params, phi_var)
        breakdown = LossBreakdown(it, l_d, l_p, l_i, l_t)
        if not breakdown.is_finite():
            raise DivergenceError(
                f"non-finite loss at iteration {it}: {breakdown}",
                iteration=it, breakdown=breakdown)

        tape.backward(total_var)
        grads = [grad_or_zeros(v) for v in params.leaves()]
        if phi_var is not None:
            grads.append(grad_or_zeros(phi_var))
        optimizer.step(grads)

        if it == 1 or it % cfg.log_every == 0:
            history.append(breakdown)
            if on_log is not None:
                on_log(it, breakdown, np.exp(phi.phi) if phi is not None else None)

    return history


def train_pinn(data: ObservationSet, forcings: ForcingSignals,
               ic: InitialCondition, cfg: TrainingConfig,
               on_log: LogCallback | None = None) -> PinnResult:
    """Jointly fit the network and the physical coefficients.

    Deterministic given ``cfg.seed`` (which drives the weight initialization
    and, for the random strategy, collocation placement).  Raises
    DivergenceError if any loss term leaves the finite range.
    """
    if data.count < 1:
        raise ValueError("training requires at least one observation")
    net = init_network(cfg.hidden_layers, cfg.hidden_width, cfg.seed,
                       time_range=cfg.horizon, output_offset=cfg.output_offset,
                       output_scale=cfg.output_scale)
    colloc = make_collocation(cfg.horizon[0], cfg.horizon[1],
                              cfg.collocation_count, cfg.collocation_strategy,
                              seed=cfg.seed)
    phi = TrainablePhysicalParams.from_initial_value(cfg.phi_initial)
    objective = _Objective(obs=data, forcings=forcings, ic=ic, colloc=colloc,
                           weights=cfg.loss_weights)
    history = _train_loop(net, phi, objective, cfg, on_log)
    return PinnResult(network=net, parameters=phi.to_parameter_set(), history=history)
