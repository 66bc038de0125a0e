"""Report emission: delimited data files, JSON/text summaries, and rendered
figures.

Every figure has a CSV twin carrying the plotted data at full precision, so
downstream tooling never needs to scrape images.  Text tables use four
decimal places.
"""

from __future__ import annotations

import csv
import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import (METHOD_BASELINE, METHOD_PINN, ComparisonReport,
                         RecoveryReport, SweepResult)
from .forcings import ForcingSignals
from .model import Trajectory
from .network import NetworkModel, evaluate
from .synthetic import ObservationSet
from .training import LossBreakdown

LOSS_HISTORY_HEADER = ["iter", "l_data", "l_phys", "l_ic", "l_total"]
SWEEP_HEADER = ["sigma_mult", "seed", "method",
                "rmse_T", "mae_T", "r2_T", "rmse_H", "mae_H", "r2_H"]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# -- delimited outputs ---------------------------------------------------------

def write_loss_history_csv(path, history: list[LossBreakdown]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream)
        writer.writerow(LOSS_HISTORY_HEADER)
        for b in history:
            writer.writerow([b.iteration, _fmt(b.l_data), _fmt(b.l_phys),
                             _fmt(b.l_ic), _fmt(b.l_total)])


def write_baseline_history_csv(path, history: list[tuple[int, float]]) -> None:
    """Baseline history in the shared format; physics/ic columns are zero."""
    with open(path, "w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream)
        writer.writerow(LOSS_HISTORY_HEADER)
        for it, l_data in history:
            writer.writerow([it, _fmt(l_data), _fmt(0.0), _fmt(0.0), _fmt(l_data)])


def read_loss_history_csv(path) -> list[LossBreakdown]:
    out = []
    with open(path, "r", newline="", encoding="utf-8") as stream:
        for row in csv.DictReader(stream):
            out.append(LossBreakdown(iteration=int(row["iter"]),
                                     l_data=float(row["l_data"]),
                                     l_phys=float(row["l_phys"]),
                                     l_ic=float(row["l_ic"]),
                                     l_total=float(row["l_total"])))
    return out


def write_reconstruction_csv(path, reference: Trajectory,
                             pinn_net: NetworkModel, baseline_net: NetworkModel,
                             obs: ObservationSet) -> dict[str, np.ndarray]:
    """Dense reconstructions of both methods next to the reference, with an
    ``obs_flag`` marking grid nodes that were observation times.

    Returns the evaluated arrays for reuse (e.g. by the figure renderers).
    """
    pinn_values, _ = evaluate(pinn_net, reference.times, with_tangent=False)
    base_values, _ = evaluate(baseline_net, reference.times, with_tangent=False)
    obs_flag = np.isin(reference.times, obs.times).astype(int)
    with open(path, "w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream)
        writer.writerow(["t", "reference_T", "reference_H", "pinn_T", "pinn_H",
                         "baseline_T", "baseline_H", "obs_flag"])
        for i, t in enumerate(reference.times):
            writer.writerow([_fmt(t), _fmt(reference.temperature[i]),
                             _fmt(reference.humidity[i]),
                             _fmt(pinn_values[0, i]), _fmt(pinn_values[1, i]),
                             _fmt(base_values[0, i]), _fmt(base_values[1, i]),
                             obs_flag[i]])
    return {"pinn": pinn_values, "baseline": base_values, "obs_flag": obs_flag}


def write_forcings_csv(path, forcings: ForcingSignals, times: np.ndarray) -> dict:
    t_out, h_out, rad, vent, moist = forcings.evaluate(times)
    with open(path, "w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream)
        writer.writerow(["t", "T_out", "H_out", "R", "V", "E"])
        for i, t in enumerate(times):
            writer.writerow([_fmt(t), _fmt(t_out[i]), _fmt(h_out[i]),
                             _fmt(rad[i]), _fmt(vent[i]), _fmt(moist[i])])
    return {"t_out": t_out, "h_out": h_out, "radiation": rad,
            "ventilation": vent, "moisture": moist}


def write_recovery_csv(path, report: RecoveryReport) -> None:
    with open(path, "w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream)
        writer.writerow(["name", "true_value", "learned_value", "relative_error"])
        for row in report.rows:
            writer.writerow([row.name, _fmt(row.true_value),
                             _fmt(row.learned_value), _fmt(row.relative_error)])


def write_sweep_csv(path, result: SweepResult, multipliers: list[float]) -> None:
    """Per-cell rows plus per-(multiplier, method) aggregate rows whose seed
    column reads ``median``; the aggregation policy is stated in the leading
    comment line."""
    with open(path, "w", newline="", encoding="utf-8") as stream:
        stream.write("# one row per (sigma_mult, seed, method) training cell; "
                     "rows with seed=median aggregate each metric as the median "
                     "over seeds\n")
        writer = csv.writer(stream)
        writer.writerow(SWEEP_HEADER)
        for cell in result.cells:
            if cell.metrics is None:
                continue
            m = cell.metrics
            writer.writerow([_fmt(cell.sigma_mult), cell.seed, cell.method,
                             _fmt(m.temperature.rmse), _fmt(m.temperature.mae),
                             _fmt(m.temperature.r2), _fmt(m.humidity.rmse),
                             _fmt(m.humidity.mae), _fmt(m.humidity.r2)])
        for mult, report in zip(multipliers, result.medians):
            for method, m in report.methods.items():
                writer.writerow([_fmt(mult), "median", method,
                                 _fmt(m.temperature.rmse), _fmt(m.temperature.mae),
                                 _fmt(m.temperature.r2), _fmt(m.humidity.rmse),
                                 _fmt(m.humidity.mae), _fmt(m.humidity.r2)])


# -- JSON / text reports ---------------------------------------------------------

def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(payload, stream, indent=2)
        stream.write("\n")


COMPARISON_COLUMNS = ["RMSE_T", "MAE_T", "R2_T", "RMSE_H", "MAE_H", "R2_H"]


def comparison_table(report: ComparisonReport) -> str:
    """Aligned plain-text table, four decimals per value."""
    lines = [f"{'Method':<14}" + "".join(f"{c:>9}" for c in COMPARISON_COLUMNS)]
    for name in (METHOD_BASELINE, METHOD_PINN):
        if name not in report.methods:
            continue
        m = report.methods[name]
        cells = [m.temperature.rmse, m.temperature.mae, m.temperature.r2,
                 m.humidity.rmse, m.humidity.mae, m.humidity.r2]
        lines.append(f"{name:<14}" + "".join(f"{v:>9.4f}" for v in cells))
    return "\n".join(lines) + "\n"


def recovery_table(report: RecoveryReport) -> str:
    lines = [f"{'Parameter':<10}{'True':>12}{'Learned':>12}{'RelError':>12}"]
    for row in report.rows:
        lines.append(f"{row.name:<10}{row.true_value:>12.6f}"
                     f"{row.learned_value:>12.6f}{row.relative_error:>12.6f}")
    return "\n".join(lines) + "\n"


def write_text(path, content: str) -> None:
    with open(path, "w", encoding="utf-8") as stream:
        stream.write(content)


# -- figures ---------------------------------------------------------------------

def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_reconstruction_figure(path, reference: Trajectory,
                                 pinn_values: np.ndarray, base_values: np.ndarray,
                                 obs: ObservationSet, channel: str) -> None:
    """One channel's dense reconstruction with the observation scatter."""
    idx = 0 if channel == "temperature" else 1
    ref = reference.temperature if idx == 0 else reference.humidity
    obs_vals = obs.temp_obs if idx == 0 else obs.hum_obs
    unit = "T (degC)" if idx == 0 else "H (%RH)"

    fig, ax = plt.subplots(figsize=(10, 4.5))
    ax.scatter(obs.times, obs_vals, s=6, c="0.6", alpha=0.4, label="observations")
    ax.plot(reference.times, ref, "k-", lw=1.5, label="reference")
    ax.plot(reference.times, pinn_values[idx], "--", color="tab:orange", lw=1.5,
            label="coupled")
    ax.plot(reference.times, base_values[idx], ":", color="tab:green", lw=1.5,
            label="data-only")
    ax.set_xlabel("t (hours)")
    ax.set_ylabel(unit)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    _save(fig, path)


def render_forcings_figure(path, times: np.ndarray, signals: dict) -> None:
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(10, 6), sharex=True)
    ax1.plot(times, signals["t_out"], label="T_out (degC)", color="tab:red")
    ax1.plot(times, signals["h_out"], label="H_out (%RH)", color="tab:blue")
    ax1.set_ylabel("outdoor conditions")
    ax1.grid(True, alpha=0.3)
    ax1.legend(loc="best")
    ax2.plot(times, signals["radiation"], label="radiation proxy", color="tab:orange")
    ax2.plot(times, signals["ventilation"], label="ventilation proxy", color="tab:cyan")
    ax2.plot(times, signals["moisture"], label="moisture proxy", color="tab:olive")
    ax2.set_xlabel("t (hours)")
    ax2.set_ylabel("proxies")
    ax2.grid(True, alpha=0.3)
    ax2.legend(loc="best")
    _save(fig, path)


def render_loss_figure(path, history: list[LossBreakdown]) -> None:
    iters = [b.iteration for b in history]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(iters, [b.l_total for b in history], "k-", lw=1.8, label="total")
    ax.plot(iters, [b.l_data for b in history], lw=1.2, label="data")
    ax.plot(iters, [b.l_phys for b in history], lw=1.2, label="physics")
    ax.plot(iters, [b.l_ic for b in history], lw=1.2, label="ic")
    ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("loss")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    _save(fig, path)


def render_recovery_figure(path, report: RecoveryReport) -> None:
    names = [row.name for row in report.rows]
    x = np.arange(len(names))
    width = 0.38
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.bar(x - width / 2, [row.true_value for row in report.rows], width,
           label="true", color="0.4")
    ax.bar(x + width / 2, [row.learned_value for row in report.rows], width,
           label="learned", color="tab:orange")
    ax.set_xticks(x, names)
    ax.set_yscale("log")
    ax.set_ylabel("coefficient value")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend(loc="best")
    _save(fig, path)


def render_sweep_figure(path, result: SweepResult, multipliers: list[float]) -> None:
    pinn_h, base_h = [], []
    for report in result.medians:
        pinn_h.append(report.methods.get(METHOD_PINN).humidity.rmse
                      if METHOD_PINN in report.methods else np.nan)
        base_h.append(report.methods.get(METHOD_BASELINE).humidity.rmse
                      if METHOD_BASELINE in report.methods else np.nan)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(multipliers, pinn_h, "o-", color="tab:orange", label="coupled")
    ax.plot(multipliers, base_h, "s--", color="tab:green", label="data-only")
    ax.set_xlabel("noise multiplier")
    ax.set_ylabel("median RMSE_H")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    _save(fig, path)
