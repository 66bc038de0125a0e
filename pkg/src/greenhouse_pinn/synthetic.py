"""Synthetic benchmark generation: reference trajectory, sparse sampling, noise.

The benchmark covers a three-day window [0, 72] h starting from (T, H) =
(22, 70), integrated at a 0.01 h step (7201 nodes).  A fixed fraction of the
grid nodes (default 25%) is retained as observation times, and independent
Gaussian noise (default standard deviations 0.30 degC and 1.00 %RH) is added
per channel.

Randomness is fully reproducible: subsampling draws from the PCG64 stream
seeded directly with the dataset seed, while the two noise channels use the
first two children spawned from ``SeedSequence(seed)`` (child 0 ->
temperature, child 1 -> humidity), so every stage is an independent,
documented substream of one integer seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DatasetFormatError
from .forcings import ForcingSignals, default_forcing_config, forcings_from_config
from .model import (InitialCondition, ParameterSet, State, TimeGrid,
                    Trajectory, integrate_rk4)

# Benchmark configuration: true coefficients, start state, and grid.
TRUE_PARAMETERS = ParameterSet(a1=0.18, a2=3.50, a3=0.12, a4=0.015,
                               b1=0.12, b2=5.00, b3=0.08, b4=0.06)
BENCHMARK_INITIAL = InitialCondition(t0=0.0, state0=State(22.0, 70.0))
BENCHMARK_GRID = TimeGrid(start=0.0, end=72.0, step=0.01)
BENCHMARK_FRACTION = 0.25
BENCHMARK_SIGMA_T = 0.30
BENCHMARK_SIGMA_H = 1.00

DATASET_FORMAT = "greenhouse-dataset-v1"


@dataclass(frozen=True)
class ObservationSet:
    """Sparse measurements: strictly increasing times with per-channel values."""

    times: np.ndarray
    temp_obs: np.ndarray
    hum_obs: np.ndarray

    def __post_init__(self):
        n = len(self.times)
        if n < 1:
            raise ValueError("observation set must contain at least one point")
        if len(self.temp_obs) != n or len(self.hum_obs) != n:
            raise ValueError("observation arrays must have equal length")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("observation times must be strictly increasing")

    @property
    def count(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class NoiseSpec:
    """Per-channel Gaussian noise standard deviations and the RNG seed."""

    sigma_T: float
    sigma_H: float
    seed: int

    def __post_init__(self):
        if self.sigma_T < 0 or self.sigma_H < 0:
            raise ValueError("noise standard deviations must be nonnegative")


def generate_reference(params: ParameterSet, forcings: ForcingSignals,
                       grid: TimeGrid) -> Trajectory:
    """Integrate the model from the benchmark start state over ``grid``."""
    ic = BENCHMARK_INITIAL
    if grid.start != ic.t0:
        raise ValueError(f"benchmark grid must start at t={ic.t0}")
    return integrate_rk4(params, forcings, ic, grid)


def subsample(traj: Trajectory, fraction: float, seed: int) -> ObservationSet:
    """Retain ``floor(fraction * node_count)`` nodes, drawn uniformly without
    replacement and re-sorted by time.

    The initial node is always among the retained points so the start state
    is observed.  Deterministic for a fixed seed.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    total = len(traj)
    n_obs = math.floor(fraction * total)
    if fraction * total < 2:
        raise ValueError(
            f"fraction {fraction} retains fewer than 2 of {total} nodes")

    rng = np.random.default_rng(seed)
    rest = rng.choice(np.arange(1, total), size=n_obs - 1, replace=False)
    idx = np.sort(np.concatenate(([0], rest)))
    return ObservationSet(times=traj.times[idx],
                          temp_obs=traj.temperature[idx],
                          hum_obs=traj.humidity[idx])


def add_noise(obs: ObservationSet, spec: NoiseSpec) -> ObservationSet:
    """Add independent Gaussian perturbations per channel (see module docstring
    for the substream layout)."""
    temp_stream, hum_stream = np.random.SeedSequence(spec.seed).spawn(2)
    temp = obs.temp_obs + np.random.default_rng(temp_stream).normal(
        0.0, spec.sigma_T, obs.count)
    hum = obs.hum_obs + np.random.default_rng(hum_stream).normal(
        0.0, spec.sigma_H, obs.count)
    return ObservationSet(times=obs.times, temp_obs=temp, hum_obs=hum)


@dataclass(frozen=True)
class DatasetMeta:
    """Everything needed to regenerate a dataset from scratch."""

    seed: int
    fraction: float
    sigma_T: float
    sigma_H: float
    grid: TimeGrid
    true_params: ParameterSet
    forcing_config: dict
    n_obs: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "fraction": self.fraction,
            "sigma_T": self.sigma_T,
            "sigma_H": self.sigma_H,
            "grid": self.grid.to_dict(),
            "true_params": self.true_params.to_dict(),
            "forcing_config": self.forcing_config,
            "n_obs": self.n_obs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetMeta":
        return cls(seed=int(d["seed"]), fraction=float(d["fraction"]),
                   sigma_T=float(d["sigma_T"]), sigma_H=float(d["sigma_H"]),
                   grid=TimeGrid.from_dict(d["grid"]),
                   true_params=ParameterSet(**{k: float(v) for k, v in d["true_params"].items()}),
                   forcing_config=d["forcing_config"], n_obs=int(d["n_obs"]))


@dataclass(frozen=True)
class Dataset:
    """A saved benchmark: sparse noisy observations plus the clean reference."""

    meta: DatasetMeta
    observations: ObservationSet
    reference: Trajectory

    def forcings(self) -> ForcingSignals:
        return forcings_from_config(self.meta.forcing_config)

    def initial_condition(self) -> InitialCondition:
        return InitialCondition(
            t0=float(self.reference.times[0]),
            state0=State(float(self.reference.temperature[0]),
                         float(self.reference.humidity[0])))


def generate_dataset(seed: int = 0, fraction: float = BENCHMARK_FRACTION,
                     sigma_T: float = BENCHMARK_SIGMA_T,
                     sigma_H: float = BENCHMARK_SIGMA_H,
                     grid: TimeGrid = BENCHMARK_GRID,
                     params: ParameterSet = TRUE_PARAMETERS,
                     forcing_config: dict | None = None) -> Dataset:
    """Run the full generation pipeline: integrate, subsample, perturb.

    The result is a pure function of the arguments; ``seed`` drives both the
    subsampling and the noise substreams.
    """
    config = forcing_config if forcing_config is not None else default_forcing_config()
    forcings = forcings_from_config(config)
    reference = generate_reference(params, forcings, grid)
    clean = subsample(reference, fraction, seed)
    noisy = add_noise(clean, NoiseSpec(sigma_T, sigma_H, seed))
    meta = DatasetMeta(seed=seed, fraction=fraction, sigma_T=sigma_T,
                       sigma_H=sigma_H, grid=grid, true_params=params,
                       forcing_config=config, n_obs=noisy.count)
    return Dataset(meta=meta, observations=noisy, reference=reference)


def clean_observations(dataset: Dataset) -> ObservationSet:
    """Noise-free observation values: the reference sampled at the observation
    times (exact grid lookups, since observation times are retained nodes)."""
    ref = dataset.reference
    idx = np.searchsorted(ref.times, dataset.observations.times)
    if not np.array_equal(ref.times[idx], dataset.observations.times):
        raise ValueError("observation times are not nodes of the reference grid")
    return ObservationSet(times=ref.times[idx],
                          temp_obs=ref.temperature[idx],
                          hum_obs=ref.humidity[idx])


def save_dataset(dataset: Dataset, path) -> None:
    """Write the dataset as a single JSON document; floats round-trip
    bit-exactly (shortest repr)."""
    doc = {
        "format": DATASET_FORMAT,
        "meta": dataset.meta.to_dict(),
        "observations": {
            "t": dataset.observations.times.tolist(),
            "T": dataset.observations.temp_obs.tolist(),
            "H": dataset.observations.hum_obs.tolist(),
        },
        "reference": {
            "t": dataset.reference.times.tolist(),
            "T": dataset.reference.temperature.tolist(),
            "H": dataset.reference.humidity.tolist(),
        },
    }
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(doc, stream)
        stream.write("\n")


def load_dataset(path) -> Dataset:
    """Read a dataset file, enforcing structural invariants.

    Malformed JSON raises DatasetFormatError with the failing line number;
    schema or invariant violations raise DatasetFormatError as well.
    """
    with open(path, "r", encoding="utf-8") as stream:
        try:
            doc = json.load(stream)
        except json.JSONDecodeError as err:
            raise DatasetFormatError(
                f"{path}: malformed JSON at line {err.lineno}: {err.msg}") from err

    if not isinstance(doc, dict) or doc.get("format") != DATASET_FORMAT:
        raise DatasetFormatError(f"{path}: not a {DATASET_FORMAT} file")
    try:
        meta = DatasetMeta.from_dict(doc["meta"])
        obs_block = doc["observations"]
        ref_block = doc["reference"]
        observations = ObservationSet(
            times=np.asarray(obs_block["t"], dtype=float),
            temp_obs=np.asarray(obs_block["T"], dtype=float),
            hum_obs=np.asarray(obs_block["H"], dtype=float))
        reference = Trajectory(
            times=np.asarray(ref_block["t"], dtype=float),
            temperature=np.asarray(ref_block["T"], dtype=float),
            humidity=np.asarray(ref_block["H"], dtype=float))
    except (KeyError, TypeError, ValueError) as err:
        raise DatasetFormatError(f"{path}: invalid dataset contents: {err}") from err

    if observations.count != meta.n_obs:
        raise DatasetFormatError(
            f"{path}: header records n_obs={meta.n_obs} but file holds "
            f"{observations.count} observations")
    return Dataset(meta=meta, observations=observations, reference=reference)
