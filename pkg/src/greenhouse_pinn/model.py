"""Reduced coupled indoor temperature-humidity dynamics.

Two lumped states, indoor temperature T (degC) and indoor relative humidity
H (%RH), evolve under outdoor exchange, radiative heating, ventilation, a
latent moisture source, and weak cross-couplings:

    dT/dt = a1*(T_out - T) + a2*R - a3*V*(T - T_out) + a4*(H - H_out)
    dH/dt = b1*(H_out - H) + b2*E - b3*V*(H - H_out) + b4*(T_out - T)

with nonnegative coefficients a1..a4, b1..b4.  Time is measured in hours.
The module also provides the classical fixed-step RK4 integrator used to
produce reference trajectories.  States are deliberately not clamped to
physical ranges (e.g. H <= 100): the right-hand side above is the whole
model, and clamping would break consistency with residual-based training.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO

import math
import numpy as np

from .errors import DivergenceError
from .forcings import ForcingSignals


@dataclass(frozen=True)
class State:
    """Instantaneous indoor state: temperature (degC) and humidity (%RH)."""

    temperature: float
    humidity: float

    def __post_init__(self):
        if not (math.isfinite(self.temperature) and math.isfinite(self.humidity)):
            raise ValueError(f"state must be finite, got {self}")


PARAMETER_NAMES = ("a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4")


@dataclass(frozen=True)
class ParameterSet:
    """The eight physical exchange coefficients, all nonnegative.

    a1: baseline thermal relaxation toward outdoor temperature (1/h)
    a2: direct radiative heating (degC per unit radiation per h)
    a3: ventilation-mediated thermal exchange (1/h per unit ventilation)
    a4: humidity -> temperature cross-coupling (degC per %RH per h)
    b1: baseline moisture relaxation toward outdoor humidity (1/h)
    b2: effective latent moisture input (%RH per unit moisture per h)
    b3: ventilation-mediated moisture exchange (1/h per unit ventilation)
    b4: temperature-difference -> humidity cross-coupling (%RH per degC per h)
    """

    a1: float
    a2: float
    a3: float
    a4: float
    b1: float
    b2: float
    b3: float
    b4: float

    def __post_init__(self):
        for name in PARAMETER_NAMES:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"coefficient {name} must be finite, got {value}")
            if value < 0:
                raise ValueError(f"coefficient {name} must be nonnegative, got {value}")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in PARAMETER_NAMES], dtype=float)

    @classmethod
    def from_array(cls, values) -> "ParameterSet":
        values = np.asarray(values, dtype=float)
        if values.shape != (8,):
            raise ValueError(f"expected 8 coefficients, got shape {values.shape}")
        return cls(*[float(v) for v in values])

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in PARAMETER_NAMES}


@dataclass(frozen=True)
class InitialCondition:
    """Start time (hours) and starting state of a simulation."""

    t0: float
    state0: State


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid: ``node_count`` points from start to end inclusive."""

    start: float
    end: float
    step: float

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"grid start must precede end, got [{self.start}, {self.end}]")
        if not self.step > 0:
            raise ValueError(f"grid step must be positive, got {self.step}")
        n = (self.end - self.start) / self.step
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError(
                f"(end - start)/step = {n} is not a whole number of steps")

    @property
    def step_count(self) -> int:
        return round((self.end - self.start) / self.step)

    @property
    def node_count(self) -> int:
        return self.step_count + 1

    def nodes(self) -> np.ndarray:
        return np.linspace(self.start, self.end, self.node_count)

    def to_dict(self) -> dict:
        return {"start": self.start, "end": self.end, "step": self.step}

    @classmethod
    def from_dict(cls, d: dict) -> "TimeGrid":
        return cls(float(d["start"]), float(d["end"]), float(d["step"]))


@dataclass(frozen=True)
class Trajectory:
    """States on a time grid: parallel arrays of times, T and H."""

    times: np.ndarray
    temperature: np.ndarray
    humidity: np.ndarray

    def __post_init__(self):
        n = len(self.times)
        if len(self.temperature) != n or len(self.humidity) != n:
            raise ValueError("trajectory arrays must have equal length")

    def __len__(self) -> int:
        return len(self.times)

    def endpoint(self) -> State:
        return State(float(self.temperature[-1]), float(self.humidity[-1]))


def _derivative(temperature, humidity, t_out, h_out, radiation, ventilation,
                moisture, p: ParameterSet):
    """The raw right-hand side; works on scalars or aligned arrays."""
    d_temp = (p.a1 * (t_out - temperature)
              + p.a2 * radiation
              - p.a3 * ventilation * (temperature - t_out)
              + p.a4 * (humidity - h_out))
    d_hum = (p.b1 * (h_out - humidity)
             + p.b2 * moisture
             - p.b3 * ventilation * (humidity - h_out)
             + p.b4 * (t_out - temperature))
    return d_temp, d_hum


def rhs(state: State, t: float, params: ParameterSet,
        forcings: ForcingSignals) -> tuple[float, float]:
    """Evaluate (dT/dt, dH/dt) at time ``t`` (degC/h, %RH/h)."""
    t_out, h_out, rad, vent, moist = forcings.evaluate(t)
    d_temp, d_hum = _derivative(state.temperature, state.humidity,
                                t_out, h_out, rad, vent, moist, params)
    return float(d_temp), float(d_hum)


def integrate_rk4(params: ParameterSet, forcings: ForcingSignals,
                  ic: InitialCondition, grid: TimeGrid) -> Trajectory:
    """Classical fixed-step fourth-order Runge-Kutta over ``grid``.

    The first trajectory state equals ``ic.state0`` exactly.  A non-finite
    state mid-integration raises DivergenceError carrying the failing time.
    """
    if grid.start != ic.t0:
        raise ValueError(
            f"grid start {grid.start} must equal the initial-condition time {ic.t0}")

    times = grid.nodes()
    h = grid.step
    n_steps = grid.step_count

    temp = np.empty(n_steps + 1)
    hum = np.empty(n_steps + 1)
    temp[0] = ic.state0.temperature
    hum[0] = ic.state0.humidity

    def f(t, y):
        t_out, h_out, rad, vent, moist = forcings.evaluate(t)
        d_temp, d_hum = _derivative(y[0], y[1], t_out, h_out, rad, vent, moist, params)
        return np.array([d_temp, d_hum])

    y = np.array([temp[0], hum[0]])
    # overflow inside a step is expected on divergence; the finite check below
    # turns it into a structured error instead of a warning cascade
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_steps):
            t = times[i]
            k1 = f(t, y)
            k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = f(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(y)):
                raise DivergenceError(
                    f"integration diverged at t={times[i + 1]:.6g} h",
                    time=float(times[i + 1]))
            temp[i + 1] = y[0]
            hum[i + 1] = y[1]

    return Trajectory(times=times, temperature=temp, humidity=hum)


def write_trajectory_csv(traj: Trajectory, stream: TextIO) -> None:
    """Write ``t,T,H`` rows at full double precision (17 significant digits)."""
    stream.write("t,T,H\n")
    for t, temp, hum in zip(traj.times, traj.temperature, traj.humidity):
        stream.write(f"{t:.17g},{temp:.17g},{hum:.17g}\n")


def save_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", encoding="utf-8") as stream:
        write_trajectory_csv(traj, stream)
