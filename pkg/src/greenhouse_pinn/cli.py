"""Command-line pipeline: dataset generation, training, evaluation, noise
sweeps, and the one-shot benchmark reproduction.

Every command writes a ``manifest.json`` into its output directory recording
the tool version, the exact command line, the fully resolved configuration
(flags override config-file fields, which override built-in defaults), input
hashes, produced files, seeds, and wall-clock duration.  Re-running a
command with the same resolved configuration reproduces every artifact
byte-identically in single-process mode; only the manifest (which carries
timing) differs.

Exit codes: 0 success, 1 numeric divergence, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import BaselineResult, train_baseline
from .errors import DatasetFormatError, DivergenceError
from .evaluation import (BENCHMARK_TARGETS, METHOD_BASELINE, METHOD_PINN,
                         SweepCell, compare_methods, noise_sweep,
                         recovery_report)
from .model import ParameterSet, TimeGrid
from .network import load_network, save_network
from .synthetic import (BENCHMARK_FRACTION, BENCHMARK_GRID, BENCHMARK_SIGMA_H,
                        BENCHMARK_SIGMA_T, TRUE_PARAMETERS, Dataset,
                        generate_dataset, load_dataset, save_dataset)
from .training import PinnResult, TrainingConfig, train_pinn
from . import reporting

EXIT_OK = 0
EXIT_DIVERGENCE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Bad invocation, unreadable input, or mismatched artifacts."""


# -- manifest -------------------------------------------------------------------

def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as stream:
        for chunk in iter(lambda: stream.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _atomic_write_json(path: Path, payload: dict) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as stream:
        json.dump(payload, stream, indent=2)
        stream.write("\n")
    os.replace(tmp, path)


def write_manifest(out_dir: Path, command: list[str], resolved_config: dict,
                   inputs: dict, outputs: list[str], seeds: list[int],
                   started: float) -> None:
    _atomic_write_json(out_dir / "manifest.json", {
        "tool_version": __version__,
        "command": command,
        "resolved_config": resolved_config,
        "inputs": inputs,
        "outputs": sorted(outputs),
        "seeds": seeds,
        "duration_seconds": time.perf_counter() - started,
    })


def _read_manifest(run_dir: Path) -> dict:
    path = run_dir / "manifest.json"
    if not path.is_file():
        raise UsageError(f"no manifest found in {run_dir}")
    with open(path, "r", encoding="utf-8") as stream:
        return json.load(stream)


def _load_json_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {p}")
    with open(p, "r", encoding="utf-8") as stream:
        try:
            return json.load(stream)
        except json.JSONDecodeError as err:
            raise UsageError(f"{p}: invalid JSON at line {err.lineno}: {err.msg}")


def _ensure_out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _progress(tag: str):
    def on_log(it, breakdown, coeffs):
        if it % 1000 == 0 or it == 1:
            print(f"[{tag}] iter {it:>6}  l_total={breakdown.l_total:.6e}",
                  file=sys.stderr)
    return on_log


# -- generate --------------------------------------------------------------------

def _resolve_generate_config(args) -> dict:
    cfg = {
        "seed": 0,
        "fraction": BENCHMARK_FRACTION,
        "sigma_T": BENCHMARK_SIGMA_T,
        "sigma_H": BENCHMARK_SIGMA_H,
        "grid": BENCHMARK_GRID.to_dict(),
        "true_params": TRUE_PARAMETERS.to_dict(),
        "forcing_config": None,
    }
    file_cfg = _load_json_config(args.config)
    unknown = set(file_cfg) - set(cfg)
    if unknown:
        raise UsageError(f"unknown generate config fields: {sorted(unknown)}")
    cfg.update(file_cfg)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.fraction is not None:
        cfg["fraction"] = args.fraction
    if args.sigma_T is not None:
        cfg["sigma_T"] = args.sigma_T
    if args.sigma_H is not None:
        cfg["sigma_H"] = args.sigma_H
    return cfg


def cmd_generate(args, argv: list[str]) -> int:
    started = time.perf_counter()
    cfg = _resolve_generate_config(args)
    out_dir = _ensure_out_dir(args.output)
    try:
        dataset = generate_dataset(
            seed=cfg["seed"], fraction=cfg["fraction"], sigma_T=cfg["sigma_T"],
            sigma_H=cfg["sigma_H"], grid=TimeGrid.from_dict(cfg["grid"]),
            params=ParameterSet(**cfg["true_params"]),
            forcing_config=cfg["forcing_config"])
    except ValueError as err:
        raise UsageError(f"invalid generate configuration: {err}")
    dataset_path = out_dir / "dataset.json"
    save_dataset(dataset, dataset_path)
    cfg["forcing_config"] = dataset.meta.forcing_config
    write_manifest(out_dir, argv, cfg, inputs={},
                   outputs=["dataset.json"], seeds=[cfg["seed"]], started=started)
    print(f"wrote {dataset_path} ({dataset.meta.n_obs} observations)")
    return EXIT_OK


# -- train -----------------------------------------------------------------------

def _resolve_training_config(config_path: str | None, seed: int | None) -> TrainingConfig:
    file_cfg = _load_json_config(config_path)
    try:
        cfg = TrainingConfig.from_dict(file_cfg)
    except (TypeError, ValueError) as err:
        raise UsageError(f"invalid training configuration: {err}")
    if seed is not None:
        d = cfg.to_dict()
        d["seed"] = seed
        cfg = TrainingConfig.from_dict(d)
    return cfg


def _load_dataset_checked(path_str: str) -> tuple[Dataset, Path]:
    path = Path(path_str)
    if not path.is_file():
        raise UsageError(f"dataset path not found: {path}")
    try:
        return load_dataset(path), path
    except DatasetFormatError as err:
        raise UsageError(str(err))


def cmd_train(args, argv: list[str]) -> int:
    started = time.perf_counter()
    dataset, dataset_path = _load_dataset_checked(args.dataset)
    cfg = _resolve_training_config(args.config, args.seed)
    out_dir = _ensure_out_dir(args.output)
    tag = f"{args.method} seed={cfg.seed}"

    if args.method == METHOD_PINN:
        result = train_pinn(dataset.observations, dataset.forcings(),
                            dataset.initial_condition(), cfg,
                            on_log=_progress(tag))
        save_network(result.network, out_dir / "checkpoint.json")
        reporting.write_json(out_dir / "recovered_params.json", {
            **result.parameters.to_dict(),
            "phi": np.log(result.parameters.as_array()).tolist(),
        })
        reporting.write_loss_history_csv(out_dir / "loss_history.csv", result.history)
        outputs = ["checkpoint.json", "recovered_params.json", "loss_history.csv"]
        learned = ", ".join(f"{k}={v:.6f}" for k, v in result.parameters.to_dict().items())
        print(f"recovered coefficients: {learned}")
    else:
        result = train_baseline(dataset.observations, cfg, on_log=_progress(tag))
        save_network(result.network, out_dir / "checkpoint.json")
        reporting.write_baseline_history_csv(out_dir / "loss_history.csv",
                                             result.loss_history)
        outputs = ["checkpoint.json", "loss_history.csv"]

    write_manifest(out_dir, argv, {"method": args.method, "training": cfg.to_dict()},
                   inputs={"dataset": {"path": str(dataset_path),
                                       "sha256": _sha256(dataset_path)}},
                   outputs=outputs, seeds=[cfg.seed], started=started)
    print(f"trained {args.method} -> {out_dir}")
    return EXIT_OK


# -- evaluate ---------------------------------------------------------------------

def _check_run_pairing(run_dir: Path, dataset_hash: str) -> dict:
    manifest = _read_manifest(run_dir)
    recorded = manifest.get("inputs", {}).get("dataset", {}).get("sha256")
    if recorded != dataset_hash:
        raise UsageError(
            f"run {run_dir} was trained on a different dataset "
            f"(manifest hash {recorded}, given {dataset_hash})")
    return manifest


def cmd_evaluate(args, argv: list[str]) -> int:
    started = time.perf_counter()
    dataset, dataset_path = _load_dataset_checked(args.dataset)
    dataset_hash = _sha256(dataset_path)

    pinn_dir = Path(args.pinn_run)
    base_dir = Path(args.baseline_run)
    pinn_manifest = _check_run_pairing(pinn_dir, dataset_hash)
    base_manifest = _check_run_pairing(base_dir, dataset_hash)

    pinn_net = load_network(pinn_dir / "checkpoint.json")
    base_net = load_network(base_dir / "checkpoint.json")
    with open(pinn_dir / "recovered_params.json", "r", encoding="utf-8") as stream:
        learned_doc = json.load(stream)
    learned = ParameterSet(**{k: learned_doc[k] for k in TRUE_PARAMETERS.to_dict()})
    pinn_history = reporting.read_loss_history_csv(pinn_dir / "loss_history.csv")

    out_dir = _ensure_out_dir(args.output)
    seeds = tuple(pinn_manifest.get("seeds", []) + base_manifest.get("seeds", []))

    pinn_result = PinnResult(network=pinn_net, parameters=learned, history=pinn_history)
    base_result = BaselineResult(network=base_net, loss_history=[])
    comparison = compare_methods(pinn_result, base_result, dataset.reference,
                                 dataset.meta.grid, seeds=seeds,
                                 sigma_T=dataset.meta.sigma_T,
                                 sigma_H=dataset.meta.sigma_H)
    recovery = recovery_report(learned, dataset.meta.true_params)

    arrays = reporting.write_reconstruction_csv(
        out_dir / "reconstruction.csv", dataset.reference, pinn_net, base_net,
        dataset.observations)
    forcing_arrays = reporting.write_forcings_csv(
        out_dir / "forcings.csv", dataset.forcings(), dataset.reference.times)
    reporting.write_loss_history_csv(out_dir / "loss_history.csv", pinn_history)
    reporting.write_recovery_csv(out_dir / "parameter_recovery.csv", recovery)
    reporting.write_json(out_dir / "comparison.json", comparison.to_dict())
    reporting.write_text(out_dir / "comparison.txt", reporting.comparison_table(comparison))
    reporting.write_json(out_dir / "recovery.json", recovery.to_dict())
    reporting.write_text(out_dir / "recovery.txt", reporting.recovery_table(recovery))

    for channel in ("temperature", "humidity"):
        reporting.render_reconstruction_figure(
            out_dir / f"reconstruction_{channel}.png", dataset.reference,
            arrays["pinn"], arrays["baseline"], dataset.observations, channel)
    reporting.render_forcings_figure(out_dir / "forcings.png",
                                     dataset.reference.times, forcing_arrays)
    reporting.render_loss_figure(out_dir / "loss_history.png", pinn_history)
    reporting.render_recovery_figure(out_dir / "parameter_recovery.png", recovery)

    outputs = ["reconstruction.csv", "forcings.csv", "loss_history.csv",
               "parameter_recovery.csv", "comparison.json", "comparison.txt",
               "recovery.json", "recovery.txt", "reconstruction_temperature.png",
               "reconstruction_humidity.png", "forcings.png", "loss_history.png",
               "parameter_recovery.png"]
    write_manifest(out_dir, argv, {"pinn_run": str(pinn_dir),
                                   "baseline_run": str(base_dir)},
                   inputs={"dataset": {"path": str(dataset_path),
                                       "sha256": dataset_hash}},
                   outputs=outputs, seeds=list(seeds), started=started)
    print(reporting.comparison_table(comparison), end="")
    return EXIT_OK


# -- sweep ------------------------------------------------------------------------

def _parse_multipliers(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise UsageError(f"cannot parse multiplier list {text!r}")
    if not values:
        raise UsageError("multiplier list is empty")
    return values


def _cell_key_name(cell_key: tuple[float, int, str]) -> str:
    mult, seed, method = cell_key
    return f"mult{mult:g}_seed{seed}_{method}"


def cmd_sweep(args, argv: list[str]) -> int:
    started = time.perf_counter()
    dataset, dataset_path = _load_dataset_checked(args.dataset)
    file_cfg = _load_json_config(args.config)
    multipliers = [float(m) for m in file_cfg.get("multipliers", [1.0, 2.0, 4.0])]
    seeds = [int(s) for s in file_cfg.get("seeds", [0, 1, 2])]
    try:
        train_cfg = TrainingConfig.from_dict(file_cfg.get("training", {}))
    except (TypeError, ValueError) as err:
        raise UsageError(f"invalid training configuration: {err}")
    if args.multipliers is not None:
        multipliers = _parse_multipliers(args.multipliers)

    out_dir = _ensure_out_dir(args.output)
    cells_dir = out_dir / "cells"
    cells_dir.mkdir(exist_ok=True)

    # Resume: any cell whose result.json parses is final (results are written
    # atomically, so partially written cells cannot be mistaken for complete).
    completed = {}
    for mult in multipliers:
        for seed in seeds:
            for method in (METHOD_PINN, METHOD_BASELINE):
                key = (mult, seed, method)
                result_path = cells_dir / _cell_key_name(key) / "result.json"
                if result_path.is_file():
                    try:
                        with open(result_path, "r", encoding="utf-8") as stream:
                            completed[key] = SweepCell.from_dict(json.load(stream))
                    except (json.JSONDecodeError, KeyError, ValueError):
                        pass
    if completed:
        print(f"resuming: {len(completed)} cells already complete", file=sys.stderr)

    def on_cell(cell: SweepCell) -> None:
        key = (cell.sigma_mult, cell.seed, cell.method)
        cell_dir = cells_dir / _cell_key_name(key)
        cell_dir.mkdir(exist_ok=True)
        _atomic_write_json(cell_dir / "result.json", cell.to_dict())
        _atomic_write_json(cell_dir / "manifest.json", {
            "tool_version": __version__,
            "cell": {"sigma_mult": cell.sigma_mult, "seed": cell.seed,
                     "method": cell.method},
            "training": train_cfg.to_dict(),
            "dataset_sha256": _sha256(dataset_path),
            "error": cell.error,
        })
        status = "error" if cell.error else "done"
        print(f"cell {_cell_key_name(key)}: {status}", file=sys.stderr)

    result = noise_sweep(dataset, multipliers, seeds, train_cfg,
                         jobs=args.jobs, completed=completed, on_cell=on_cell)
    reporting.write_sweep_csv(out_dir / "sweep.csv", result, multipliers)
    reporting.render_sweep_figure(out_dir / "sweep.png", result, multipliers)
    write_manifest(out_dir, argv,
                   {"multipliers": multipliers, "seeds": seeds,
                    "training": train_cfg.to_dict(), "jobs": args.jobs},
                   inputs={"dataset": {"path": str(dataset_path),
                                       "sha256": _sha256(dataset_path)}},
                   outputs=["sweep.csv", "sweep.png"], seeds=seeds, started=started)
    failed = [c for c in result.cells if c.error]
    print(f"sweep complete: {len(result.cells)} cells, {len(failed)} failed")
    return EXIT_OK


# -- reproduce-paper -----------------------------------------------------------------

def _median(values):
    return float(np.median(np.asarray(values, dtype=float)))


def cmd_reproduce(args, argv: list[str]) -> int:
    started = time.perf_counter()
    file_cfg = _load_json_config(args.config)
    base_seed = args.seed if args.seed is not None else int(file_cfg.get("seed", 0))
    seeds = [int(s) for s in file_cfg.get("seeds", [base_seed, base_seed + 1,
                                                    base_seed + 2])]
    multipliers = [float(m) for m in file_cfg.get("multipliers", [1.0, 2.0, 4.0])]
    out_dir = _ensure_out_dir(args.output)

    # Stage 1: dataset.
    print("[1/4] generating dataset", file=sys.stderr)
    gen_args = argparse.Namespace(config=None, seed=base_seed, fraction=None,
                                  sigma_T=None, sigma_H=None,
                                  output=str(out_dir / "dataset"), default=True)
    if "generate" in file_cfg:
        gen_path = out_dir / "generate_config.json"
        _atomic_write_json(gen_path, file_cfg["generate"])
        gen_args.config = str(gen_path)
    cmd_generate(gen_args, argv)
    dataset_path = out_dir / "dataset" / "dataset.json"
    dataset = load_dataset(dataset_path)

    try:
        train_cfg = TrainingConfig.from_dict(file_cfg.get("training", {}))
    except (TypeError, ValueError) as err:
        raise UsageError(f"invalid training configuration: {err}")

    # Stage 2: paired training runs.
    per_seed = []
    for i, seed in enumerate(seeds):
        print(f"[2/4] training pair {i + 1}/{len(seeds)} (seed {seed})",
              file=sys.stderr)
        d = train_cfg.to_dict()
        d["seed"] = seed
        cfg = TrainingConfig.from_dict(d)
        pinn = train_pinn(dataset.observations, dataset.forcings(),
                          dataset.initial_condition(), cfg,
                          on_log=_progress(f"pinn seed={seed}"))
        base = train_baseline(dataset.observations, cfg,
                              on_log=_progress(f"baseline seed={seed}"))

        run_dir = out_dir / "runs" / f"seed{seed}"
        pinn_dir = _ensure_out_dir(run_dir / "pinn")
        base_dir = _ensure_out_dir(run_dir / "baseline")
        save_network(pinn.network, pinn_dir / "checkpoint.json")
        reporting.write_json(pinn_dir / "recovered_params.json", {
            **pinn.parameters.to_dict(),
            "phi": np.log(pinn.parameters.as_array()).tolist()})
        reporting.write_loss_history_csv(pinn_dir / "loss_history.csv", pinn.history)
        save_network(base.network, base_dir / "checkpoint.json")
        reporting.write_baseline_history_csv(base_dir / "loss_history.csv",
                                             base.loss_history)

        comparison = compare_methods(pinn, base, dataset.reference,
                                     dataset.meta.grid, seeds=(seed,),
                                     sigma_T=dataset.meta.sigma_T,
                                     sigma_H=dataset.meta.sigma_H)
        recovery = recovery_report(pinn.parameters, dataset.meta.true_params)
        reporting.write_json(run_dir / "comparison.json", comparison.to_dict())
        reporting.write_json(run_dir / "recovery.json", recovery.to_dict())
        per_seed.append({"seed": seed, "comparison": comparison,
                         "recovery": recovery, "history": pinn.history,
                         "pinn": pinn, "baseline": base})

    # Stage 3: evaluation artifacts for the first seed pair.
    print("[3/4] writing evaluation artifacts", file=sys.stderr)
    first = per_seed[0]
    eval_dir = _ensure_out_dir(out_dir / "evaluation")
    arrays = reporting.write_reconstruction_csv(
        eval_dir / "reconstruction.csv", dataset.reference,
        first["pinn"].network, first["baseline"].network, dataset.observations)
    forcing_arrays = reporting.write_forcings_csv(
        eval_dir / "forcings.csv", dataset.forcings(), dataset.reference.times)
    reporting.write_loss_history_csv(eval_dir / "loss_history.csv", first["history"])
    reporting.write_recovery_csv(eval_dir / "parameter_recovery.csv",
                                 first["recovery"])
    for channel in ("temperature", "humidity"):
        reporting.render_reconstruction_figure(
            eval_dir / f"reconstruction_{channel}.png", dataset.reference,
            arrays["pinn"], arrays["baseline"], dataset.observations, channel)
    reporting.render_forcings_figure(eval_dir / "forcings.png",
                                     dataset.reference.times, forcing_arrays)
    reporting.render_loss_figure(eval_dir / "loss_history.png", first["history"])
    reporting.render_recovery_figure(eval_dir / "parameter_recovery.png",
                                     first["recovery"])

    # Stage 4: noise sweep.
    print("[4/4] noise sweep", file=sys.stderr)
    sweep_args = argparse.Namespace(dataset=str(dataset_path), config=None,
                                    multipliers=",".join(f"{m:g}" for m in multipliers),
                                    jobs=args.jobs, output=str(out_dir / "sweep"))
    sweep_cfg = {"multipliers": multipliers, "seeds": seeds,
                 "training": train_cfg.to_dict()}
    sweep_cfg_path = out_dir / "sweep_config.json"
    _atomic_write_json(sweep_cfg_path, sweep_cfg)
    sweep_args.config = str(sweep_cfg_path)
    cmd_sweep(sweep_args, argv)

    summary = _reproduction_summary(per_seed, out_dir)
    reporting.write_json(out_dir / "summary.json", summary)
    lines = _summary_lines(summary)
    reporting.write_text(out_dir / "summary.txt", "\n".join(lines) + "\n")
    print("\n".join(lines))

    write_manifest(out_dir, argv,
                   {"seeds": seeds, "multipliers": multipliers,
                    "training": train_cfg.to_dict()},
                   inputs={}, outputs=["summary.json", "summary.txt"],
                   seeds=seeds, started=started)
    return EXIT_OK


def _reproduction_summary(per_seed: list[dict], out_dir: Path) -> dict:
    targets = BENCHMARK_TARGETS

    def pick(entry, method, channel, metric):
        m = entry["comparison"].methods[method]
        channel_metrics = getattr(m, channel)
        return getattr(channel_metrics, metric)

    med = {}
    for method in (METHOD_PINN, METHOD_BASELINE):
        for channel in ("temperature", "humidity"):
            for metric in ("rmse", "mae", "r2"):
                med[f"{method}_{channel}_{metric}"] = _median(
                    [pick(e, method, channel, metric) for e in per_seed])

    ratio_T = _median([pick(e, METHOD_PINN, "temperature", "rmse")
                       / pick(e, METHOD_BASELINE, "temperature", "rmse")
                       for e in per_seed])
    ratio_H = _median([pick(e, METHOD_PINN, "humidity", "rmse")
                       / pick(e, METHOD_BASELINE, "humidity", "rmse")
                       for e in per_seed])

    recovery_med = {}
    for name in ("a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4"):
        recovery_med[name] = _median(
            [e["recovery"].by_name()[name].relative_error for e in per_seed])

    phys_decay = []
    for e in per_seed:
        by_iter = {b.iteration: b for b in e["history"]}
        if 100 in by_iter and by_iter[100].l_phys > 0:
            phys_decay.append(e["history"][-1].l_phys / by_iter[100].l_phys)
    phys_decay_med = _median(phys_decay) if phys_decay else float("nan")

    mult2 = _read_mult2_medians(out_dir / "sweep" / "sweep.csv")

    checks = [
        {"name": "rmse_T", "value": med["pinn_temperature_rmse"],
         "threshold": targets.rmse_T_max, "passed":
             med["pinn_temperature_rmse"] <= targets.rmse_T_max},
        {"name": "rmse_H", "value": med["pinn_humidity_rmse"],
         "threshold": targets.rmse_H_max, "passed":
             med["pinn_humidity_rmse"] <= targets.rmse_H_max},
        {"name": "r2_T", "value": med["pinn_temperature_r2"],
         "threshold": targets.r2_min, "passed":
             med["pinn_temperature_r2"] >= targets.r2_min},
        {"name": "r2_H", "value": med["pinn_humidity_r2"],
         "threshold": targets.r2_min, "passed":
             med["pinn_humidity_r2"] >= targets.r2_min},
        {"name": "ratio_T", "value": ratio_T, "threshold": targets.ratio_T_max,
         "passed": ratio_T <= targets.ratio_T_max},
        {"name": "ratio_H", "value": ratio_H, "threshold": targets.ratio_H_max,
         "passed": ratio_H <= targets.ratio_H_max},
        {"name": "phys_decay", "value": phys_decay_med,
         "threshold": targets.phys_decay_max,
         "passed": phys_decay_med <= targets.phys_decay_max},
    ]
    for name in ("a1", "a2", "b1", "b2"):
        checks.append({"name": f"recovery_{name}", "value": recovery_med[name],
                       "threshold": targets.dominant_error_max,
                       "passed": recovery_med[name] < targets.dominant_error_max})
    for name in ("a3", "b3"):
        checks.append({"name": f"recovery_{name}", "value": recovery_med[name],
                       "threshold": targets.ventilation_error_max,
                       "passed": recovery_med[name] < targets.ventilation_error_max})
    if mult2 is not None:
        checks.append({"name": "mult2_rmse_H", "value": mult2["pinn"],
                       "threshold": mult2["baseline"],
                       "passed": mult2["pinn"] < mult2["baseline"]})

    return {
        "medians": med,
        "improvement": {"temperature": 1.0 - ratio_T, "humidity": 1.0 - ratio_H},
        "reference_improvement": {"temperature": targets.reference_ratio_T,
                                  "humidity": targets.reference_ratio_H},
        "recovery_medians": recovery_med,
        "phys_decay_median": phys_decay_med,
        "checks": checks,
        "all_passed": all(c["passed"] for c in checks),
    }


def _read_mult2_medians(sweep_csv: Path) -> dict | None:
    if not sweep_csv.is_file():
        return None
    import csv as _csv
    out = {}
    with open(sweep_csv, "r", encoding="utf-8") as stream:
        rows = [line for line in stream if not line.startswith("#")]
    for row in _csv.DictReader(rows):
        if row["seed"] == "median" and float(row["sigma_mult"]) == 2.0:
            out[row["method"]] = float(row["rmse_H"])
    return out if set(out) == {METHOD_PINN, METHOD_BASELINE} else None


def _summary_lines(summary: dict) -> list[str]:
    lines = ["benchmark reproduction summary (medians over seeds)"]
    imp = summary["improvement"]
    ref = summary["reference_improvement"]
    lines.append(f"  RMSE reduction vs data-only: temperature "
                 f"{imp['temperature']:.1%} (reference {ref['temperature']:.0%}), "
                 f"humidity {imp['humidity']:.1%} (reference {ref['humidity']:.0%})")
    for check in summary["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        lines.append(f"  [{status}] {check['name']}: value {check['value']:.6g} "
                     f"vs threshold {check['threshold']:.6g}")
    lines.append("all checks passed" if summary["all_passed"]
                 else "SOME CHECKS FAILED")
    return lines


# -- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greenhouse-pinn",
        description="Coupled indoor-climate benchmark: generate data, train the "
                    "coupled and data-only models, evaluate, and sweep noise.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write the synthetic benchmark dataset")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--fraction", type=float, help="fraction of grid nodes retained")
    p.add_argument("--sigma-T", dest="sigma_T", type=float)
    p.add_argument("--sigma-H", dest="sigma_H", type=float)
    p.add_argument("--default", action="store_true",
                   help="use the built-in benchmark configuration")
    p.add_argument("--output", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train one method on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--method", choices=[METHOD_PINN, METHOD_BASELINE], required=True)
    p.add_argument("--config", help="training config JSON file")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score trained runs against a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--pinn-run", dest="pinn_run", required=True)
    p.add_argument("--baseline-run", dest="baseline_run", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="noise-sensitivity sweep")
    p.add_argument("--dataset", required=True)
    p.add_argument("--config", help="sweep config JSON file")
    p.add_argument("--multipliers", help="comma-separated noise multipliers")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reproduce-paper",
                       help="full pipeline with benchmark defaults")
    p.add_argument("--config", help="override config JSON file")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code not in (0, None) else EXIT_OK
    try:
        return args.func(args, [parser.prog] + argv)
    except DivergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
