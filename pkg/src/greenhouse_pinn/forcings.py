"""Exogenous forcing signals driving the coupled indoor climate model.

Five signals act on the two-state system:

    t_out       outdoor air temperature (degC)
    h_out       outdoor relative humidity (%RH)
    radiation   solar-radiation proxy, dimensionless, zero outside daylight
    ventilation effective ventilation proxy, dimensionless, nonnegative
    moisture    effective moisture-source proxy, dimensionless, nonnegative

The benchmark set uses smooth diurnal (24 h period) shapes:

    t_out(t) = 15 + 5 * sin(2*pi*(t - 9)/24)
    h_out(t) = 75 - 10 * sin(2*pi*(t - 9)/24)
    radiation(t) = max(0, sin(pi*(h - 6)/12)),  h = t mod 24, zero for h outside [6, 18]
    ventilation(t) = 0.5 + 0.25 * radiation(t)
    moisture(t)    = 0.3 + 0.50 * radiation(t)

All shapes are configurable through a per-signal JSON object with fields
``{offset, amplitude, phase_hours, daylight_window}``; the defaults above are
not load-bearing anywhere else in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EvaluationError

# A signal accepts a scalar time in hours or an ndarray of times and returns
# values of the same shape.
SignalFn = Callable[[float | np.ndarray], float | np.ndarray]

SIGNAL_NAMES = ("t_out", "h_out", "radiation", "ventilation", "moisture")

DAY_HOURS = 24.0


@dataclass(frozen=True)
class ForcingSignals:
    """Bundle of the five evaluable exogenous signals.

    ``config`` retains the JSON-able description the signals were built from,
    when available, so datasets and manifests can reproduce them exactly.
    """

    t_out: SignalFn
    h_out: SignalFn
    radiation: SignalFn
    ventilation: SignalFn
    moisture: SignalFn
    config: dict | None = None

    def evaluate(self, t):
        """Evaluate all five signals at ``t``, rejecting non-finite values.

        Returns (t_out, h_out, radiation, ventilation, moisture).
        """
        out = []
        for name in SIGNAL_NAMES:
            value = getattr(self, name)(t)
            if not np.all(np.isfinite(value)):
                raise EvaluationError(
                    f"forcing signal '{name}' is non-finite at t={t!r}")
            out.append(value)
        return tuple(out)


def default_forcing_config() -> dict:
    """Benchmark forcing configuration (see module docstring for the shapes)."""
    return {
        "t_out": {"offset": 15.0, "amplitude": 5.0, "phase_hours": 9.0},
        "h_out": {"offset": 75.0, "amplitude": -10.0, "phase_hours": 9.0},
        "radiation": {"offset": 0.0, "amplitude": 1.0,
                      "daylight_window": [6.0, 18.0]},
        "ventilation": {"offset": 0.5, "amplitude": 0.25},
        "moisture": {"offset": 0.3, "amplitude": 0.5},
    }


def _sinusoid(offset: float, amplitude: float, phase_hours: float) -> SignalFn:
    omega = 2.0 * math.pi / DAY_HOURS

    def signal(t):
        return offset + amplitude * np.sin(omega * (np.asarray(t, dtype=float) - phase_hours))

    return signal


def _daylight_bump(offset: float, amplitude: float, window: tuple[float, float]) -> SignalFn:
    lo, hi = window
    span = hi - lo

    def signal(t):
        h = np.mod(np.asarray(t, dtype=float), DAY_HOURS)
        bump = np.sin(math.pi * (h - lo) / span)
        return offset + amplitude * np.where((h >= lo) & (h <= hi), np.maximum(bump, 0.0), 0.0)

    return signal


def _radiation_scaled(offset: float, amplitude: float, radiation: SignalFn) -> SignalFn:
    def signal(t):
        return offset + amplitude * radiation(t)

    return signal


def forcings_from_config(config: dict) -> ForcingSignals:
    """Build the signal bundle from a per-signal configuration object.

    ``t_out``/``h_out`` are diurnal sinusoids; ``radiation`` is a half-sine
    bump confined to the daylight window; ``ventilation`` and ``moisture``
    ride on the radiation proxy (offset + amplitude * radiation).
    """
    missing = [name for name in SIGNAL_NAMES if name not in config]
    if missing:
        raise ValueError(f"forcing config missing signals: {missing}")

    def field(name, key, default=None):
        value = config[name].get(key, default)
        if value is None:
            raise ValueError(f"forcing config {name!r} missing field {key!r}")
        return value

    t_out = _sinusoid(field("t_out", "offset"), field("t_out", "amplitude"),
                      field("t_out", "phase_hours", 0.0))
    h_out = _sinusoid(field("h_out", "offset"), field("h_out", "amplitude"),
                      field("h_out", "phase_hours", 0.0))

    rad_offset = field("radiation", "offset", 0.0)
    rad_amp = field("radiation", "amplitude", 1.0)
    window = tuple(field("radiation", "daylight_window", (6.0, 18.0)))
    if rad_offset < 0 or rad_amp < 0 or rad_offset + min(0.0, rad_amp) < 0:
        raise ValueError("radiation proxy must be nonnegative everywhere")
    if not 0.0 <= window[0] < window[1] <= DAY_HOURS:
        raise ValueError(f"daylight window must satisfy 0 <= lo < hi <= 24, got {window}")
    radiation = _daylight_bump(rad_offset, rad_amp, window)

    proxies = {}
    for name in ("ventilation", "moisture"):
        offset = field(name, "offset")
        amplitude = field(name, "amplitude", 0.0)
        # radiation is in [0, max bump]; offset + min(0, amplitude)*max covers the worst case
        if offset < 0 or offset + min(0.0, amplitude) * (rad_offset + rad_amp) < 0:
            raise ValueError(f"{name} proxy must be nonnegative everywhere")
        proxies[name] = _radiation_scaled(offset, amplitude, radiation)

    return ForcingSignals(t_out=t_out, h_out=h_out, radiation=radiation,
                          ventilation=proxies["ventilation"],
                          moisture=proxies["moisture"], config=config)


def default_forcings() -> ForcingSignals:
    """The benchmark forcing set."""
    return forcings_from_config(default_forcing_config())


def constant_forcings(t_out: float, h_out: float, radiation: float = 0.0,
                      ventilation: float = 0.0, moisture: float = 0.0) -> ForcingSignals:
    """Time-invariant signals; mostly useful for analytic checks."""

    def const(value):
        def signal(t):
            return np.full_like(np.asarray(t, dtype=float), value) if np.ndim(t) else float(value)
        return signal

    return ForcingSignals(t_out=const(t_out), h_out=const(h_out),
                          radiation=const(radiation),
                          ventilation=const(ventilation),
                          moisture=const(moisture))
