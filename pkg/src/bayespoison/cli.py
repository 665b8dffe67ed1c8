"""Batch front-end: attack / sweep / evaluate subcommands over JSON configs.

Outputs are machine-readable: one JSON result per attack run (weights, trace,
evaluation, seeds, wall-clock time) plus, for sweeps, an aggregate CSV of
mean and two-standard-error columns per metric, ready for any plotting tool.
All files are written atomically (temp file then rename), so a crashed run
never leaves truncated JSON.

Exit codes: 0 success, 1 config error, 2 runtime/sampler error, 3 partial
sweep failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .attacks import make_attack
from .core import Budget, Dataset, RngSeed, load_dataset_csv
from .feasible import FeasibleSet
from .metrics import cross_evaluate, evaluate_attack
from .models import make_model
from .models.nig import NigLinearModel
from .models.synthetic import (
    SyntheticRegressionSpec,
    gen_synthetic_logistic,
    gen_synthetic_regression,
    gen_two_group_regression,
)
from .samplers import HmcConfig, laplace_approx
from .metrics import sample_induced_posterior
from .targets import (
    laplace_flip_target,
    nig_mean_shift_target,
    nig_variance_scale_target,
    response_shift_target,
    synthetic_refit_target,
)

SCHEMA_VERSION = 1

# Fixed child-stream labels so evaluate reproduces attack-embedded metrics.
_DATA_STREAM = 10_000
_ATTACK_STREAM = 20_000
_EVAL_STREAM = 30_000
_TARGET_STREAM = 40_000


class ConfigError(ValueError):
    pass


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: str, obj) -> None:
    _write_atomic(path, json.dumps(obj, indent=2, sort_keys=True))


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    version = cfg.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    return cfg


def _build_dataset(cfg: dict, seed: RngSeed, rep: int) -> Dataset:
    dcfg = cfg.get("dataset")
    if not isinstance(dcfg, dict):
        raise ConfigError("config needs a 'dataset' object")
    if "path" in dcfg:
        path = dcfg["path"]
        if not os.path.exists(path):
            raise ConfigError(f"dataset file not found: {path}")
        return load_dataset_csv(path, response=dcfg.get("response"))
    data_seed = seed.child(_DATA_STREAM + rep)
    if "synthetic_regression" in dcfg:
        s = dict(dcfg["synthetic_regression"])
        return gen_synthetic_regression(
            SyntheticRegressionSpec(
                n=int(s["n"]),
                beta0=float(s.get("beta0", 0.5)),
                beta1=float(s.get("beta1", 0.3)),
                noise_sd=float(s.get("noise_sd", 0.5)),
                seed=data_seed,
            )
        )
    if "synthetic_logistic" in dcfg:
        s = dict(dcfg["synthetic_logistic"])
        return gen_synthetic_logistic(
            n=int(s["n"]),
            coefs=s["coefs"],
            feature_prob=float(s.get("feature_prob", 0.3)),
            seed=data_seed,
        )
    if "synthetic_two_group" in dcfg:
        s = dict(dcfg["synthetic_two_group"])
        return gen_two_group_regression(
            n=int(s["n"]),
            beta0=float(s.get("beta0", 0.0)),
            beta1=float(s.get("beta1", -4.0)),
            noise_sd=float(s.get("noise_sd", 50.0)),
            outlier_sd=float(s.get("outlier_sd", 5000.0)),
            outlier_frac=float(s.get("outlier_frac", 0.015)),
            treat_frac=float(s.get("treat_frac", 0.5)),
            seed=data_seed,
        )
    raise ConfigError("dataset must give 'path' or a synthetic generator block")


def _build_mcmc(cfg: dict) -> HmcConfig:
    m = dict(cfg.get("mcmc") or {})
    return HmcConfig(
        warmup_steps=int(m.get("warmup_steps", 500)),
        samples=int(m.get("samples", 1000)),
        leapfrog_steps=int(m.get("leapfrog_steps", 32)),
        initial_step_size=float(m.get("initial_step_size", 0.1)),
        target_accept=float(m.get("target_accept", 0.8)),
        max_divergence_fraction=float(m.get("max_divergence_fraction", 0.05)),
        warm_start_warmup_fraction=float(m.get("warm_start_warmup_fraction", 0.25)),
    )


def _build_target(cfg: dict, model, data: Dataset, mcmc: HmcConfig, seed: RngSeed):
    tcfg = cfg.get("target")
    if not isinstance(tcfg, dict) or "kind" not in tcfg:
        raise ConfigError("config needs a 'target' object with a 'kind'")
    kind = tcfg["kind"]
    ones = np.ones(data.n)
    if kind in ("nig_mean_shift", "nig_variance_scale"):
        if not isinstance(model, NigLinearModel):
            raise ConfigError(f"target kind {kind!r} needs the conjugate linear model")
        base = model.exact_posterior(data, ones)
        if kind == "nig_mean_shift":
            return nig_mean_shift_target(base, int(tcfg["coord"]), float(tcfg["value"]))
        return nig_variance_scale_target(base, int(tcfg["coord"]), float(tcfg["rho"]))
    if kind == "laplace_flip":
        approx = laplace_approx(model, data, ones)
        return laplace_flip_target(approx, int(tcfg["coord"]))
    if kind == "response_shift":
        mask = _resolve_mask(tcfg, data)
        return response_shift_target(data, float(tcfg["shift"]), mask, model, mcmc)
    if kind == "synthetic_refit":
        count = int(tcfg.get("estimate_samples", 1000))
        batch = sample_induced_posterior(
            model, data, ones, count=count, mcmc=mcmc, seed=seed.child(_TARGET_STREAM)
        )
        estimates = batch.thetas.mean(axis=0)
        for coord in tcfg.get("zero_coords", []):
            estimates[int(coord)] = 0.0
        for coord, value in (tcfg.get("set_coords") or {}).items():
            estimates[int(coord)] = float(value)
        return synthetic_refit_target(
            model, estimates, data, mcmc, seed=seed.child(_TARGET_STREAM + 1)
        )
    raise ConfigError(f"unknown target kind {kind!r}")


def _resolve_mask(tcfg: dict, data: Dataset) -> np.ndarray:
    if "mask_rows" in tcfg:
        mask = np.zeros(data.n, dtype=bool)
        mask[np.asarray(tcfg["mask_rows"], dtype=int)] = True
        return mask
    column = tcfg.get("mask_column", 0)
    if isinstance(column, str):
        if data.column_names is None or column not in data.column_names:
            raise ConfigError(f"mask column {column!r} not found")
        column = data.column_names.index(column)
    return data.x[:, int(column)] == float(tcfg.get("mask_equals", 1.0))


def _run_single(cfg: dict, attack_cfg: dict, seed: RngSeed, rep: int) -> dict:
    """One full pipeline run: build, attack, evaluate, package as a dict."""
    data = _build_dataset(cfg, seed, rep)
    model = _build_model_cfg(cfg)
    mcmc = _build_mcmc(cfg)
    target = _build_target(cfg, model, data, mcmc, seed.child(rep))
    acfg = dict(attack_cfg)
    method = acfg.pop("method", None)
    if method is None:
        raise ConfigError("attack config needs a 'method'")
    try:
        attack = make_attack(
            method,
            model=model,
            target=target,
            mcmc=mcmc,
            seed=seed.child(_ATTACK_STREAM + rep),
            **acfg,
        )
    except TypeError as exc:
        raise ConfigError(f"bad attack parameters: {exc}") from None
    start = time.perf_counter()
    attack.fit(data)
    ecfg = dict(cfg.get("evaluation") or {})
    report = evaluate_attack(
        model,
        data,
        target,
        attack.w_,
        relaxed=attack.relaxed_w_,
        mcmc=mcmc,
        sample_count=int(ecfg.get("sample_count", 2000)),
        thresholds=ecfg.get("thresholds"),
        ci_levels=tuple(ecfg.get("ci_levels", [0.95])),
        seed=seed.child(_EVAL_STREAM + rep),
    )
    payload = attack.result_.to_dict()
    payload.update(
        {
            "schema_version": SCHEMA_VERSION,
            "replication": rep,
            "target": target.descriptor,
            "evaluation": report.to_dict(),
            "total_wall_time_s": time.perf_counter() - start,
            "root_seed": seed.to_dict(),
        }
    )
    return payload


def _build_model_cfg(cfg: dict):
    mcfg = cfg.get("model")
    if not isinstance(mcfg, dict) or "kind" not in mcfg:
        raise ConfigError("config needs a 'model' object with a 'kind'")
    try:
        return make_model(mcfg["kind"], mcfg.get("params"))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad model config: {exc}") from None


def _scalar_metrics(payload: dict) -> dict:
    """Flatten one run's evaluation into scalar metrics for aggregation."""
    out: dict[str, float] = {}
    ev = payload.get("evaluation") or {}
    if ev.get("kl_to_target") is not None:
        out["kl"] = float(ev["kl_to_target"])
    for name, entry in (ev.get("summaries") or {}).items():
        out[f"{name}_mean"] = float(entry["mean"])
        out[f"{name}_sd"] = float(entry["sd"])
        if "prob_below" in entry:
            out[f"{name}_prob_below"] = float(entry["prob_below"])
    gap = ev.get("rounding_gap")
    if gap:
        out["rounding_l0"] = float(gap["l0_dist"])
        out["rounding_l2"] = float(gap["l2_dist"])
        if gap.get("kl_before") is not None:
            out["kl_relaxed"] = float(gap["kl_before"])
    stats = ev.get("manipulation_stats")
    if stats:
        out["fraction_of_data"] = float(stats["fraction_of_data"])
    out["wall_time_s"] = float(payload.get("wall_time_s", 0.0))
    return out


def cmd_attack(args) -> int:
    cfg = _load_config(args.config)
    attack_cfg = cfg.get("attack")
    if not isinstance(attack_cfg, dict):
        raise ConfigError("config needs an 'attack' object")
    seed = RngSeed(args.seed if args.seed is not None else int(cfg.get("seed", 0)))
    payload = _run_single(cfg, attack_cfg, seed, rep=0)
    payload["config"] = cfg
    out_dir = args.out
    _write_json(os.path.join(out_dir, "result.json"), payload)
    w_lines = "w\n" + "\n".join(str(int(round(v))) for v in payload["w_star"])
    _write_atomic(os.path.join(out_dir, "w_star.csv"), w_lines + "\n")
    print(os.path.join(out_dir, "result.json"))
    return 0


def _sweep_overrides(cfg: dict, axis: str, value) -> dict:
    cfg = json.loads(json.dumps(cfg))  # deep copy
    if axis == "budget":
        return cfg  # handled on the attack config
    if axis == "noise_sd":
        block = cfg.get("dataset", {}).get("synthetic_regression")
        if block is None:
            raise ConfigError("noise_sd sweeps need a synthetic_regression dataset")
        block["noise_sd"] = float(value)
        return cfg
    if axis == "rho":
        if cfg.get("target", {}).get("kind") != "nig_variance_scale":
            raise ConfigError("rho sweeps need a nig_variance_scale target")
        cfg["target"]["rho"] = float(value)
        return cfg
    raise ConfigError(f"unknown sweep axis {axis!r}; expected budget, noise_sd, or rho")


def _run_cell(cfg: dict, axis: str, value, attack_cfg: dict, rep: int, master_seed: int, cell_stream: int):
    cell_cfg = _sweep_overrides(cfg, axis, value)
    acfg = dict(attack_cfg)
    if axis == "budget":
        acfg["b_max"] = int(value)
    # Distinct derived seed per cell: cells and replications never share streams.
    cell_seed = RngSeed(master_seed, cell_stream)
    payload = _run_single(cell_cfg, acfg, cell_seed, rep=rep)
    payload["cell"] = {"axis": axis, "value": value, "method": acfg.get("method"), "rep": rep}
    return payload


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    sweep = cfg.get("sweep")
    if not isinstance(sweep, dict) or "axis" not in sweep or "values" not in sweep:
        raise ConfigError("config needs a 'sweep' object with 'axis' and 'values'")
    axis, values = sweep["axis"], list(sweep["values"])
    attacks = cfg.get("attacks") or ([cfg["attack"]] if "attack" in cfg else None)
    if not attacks:
        raise ConfigError("config needs 'attack' or 'attacks'")
    replications = int(cfg.get("replications", 1))
    if replications < 1:
        raise ConfigError("replications must be at least 1")
    master_seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    out_dir = args.out
    cells = [
        (value, dict(acfg), rep, (vi + 1) * 1000 + ai)
        for vi, value in enumerate(values)
        for ai, acfg in enumerate(attacks)
        for rep in range(replications)
    ]
    results: list[dict] = []
    failures: list[dict] = []

    def handle(payload_or_exc, value, acfg, rep):
        label = f"{axis}={value}_{acfg.get('method')}_rep{rep}"
        if isinstance(payload_or_exc, Exception):
            failures.append({"cell": label, "error": str(payload_or_exc)})
            print(f"cell {label} failed: {payload_or_exc}", file=sys.stderr)
            return
        _write_json(os.path.join(out_dir, "cells", f"{label}.json"), payload_or_exc)
        results.append(payload_or_exc)

    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = {
                pool.submit(_run_cell, cfg, axis, value, acfg, rep, master_seed, stream): (
                    value,
                    acfg,
                    rep,
                )
                for value, acfg, rep, stream in cells
            }
            for fut, (value, acfg, rep) in futures.items():
                try:
                    handle(fut.result(), value, acfg, rep)
                except ConfigError:
                    raise
                except Exception as exc:  # noqa: BLE001 - cell isolation
                    handle(exc, value, acfg, rep)
    else:
        for value, acfg, rep, stream in cells:
            try:
                handle(_run_cell(cfg, axis, value, acfg, rep, master_seed, stream), value, acfg, rep)
            except ConfigError:
                raise
            except Exception as exc:  # noqa: BLE001 - cell isolation
                handle(exc, value, acfg, rep)

    _write_aggregate(out_dir, axis, results)
    if failures:
        _write_json(os.path.join(out_dir, "failures.json"), failures)
        return 3
    return 0


def _write_aggregate(out_dir: str, axis: str, results: list[dict]) -> None:
    groups: dict[tuple, list] = {}
    for payload in results:
        cell = payload["cell"]
        key = (cell["value"], cell["method"])
        groups.setdefault(key, []).append(_scalar_metrics(payload))
    metric_names = sorted({name for metrics in groups.values() for m in metrics for name in m})
    header = [axis, "method", "replications"]
    for name in metric_names:
        header += [f"{name}_mean", f"{name}_2se"]
    lines = [",".join(header)]
    for (value, method), metrics in sorted(groups.items(), key=lambda kv: (str(kv[0][0]), kv[0][1])):
        row = [str(value), str(method), str(len(metrics))]
        for name in metric_names:
            vals = np.array([m[name] for m in metrics if name in m], dtype=float)
            if vals.size == 0:
                row += ["", ""]
                continue
            mean = float(np.mean(vals))
            se2 = 2.0 * float(np.std(vals, ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
            row += [f"{mean:.10g}", f"{se2:.10g}"]
        lines.append(",".join(row))
    _write_atomic(os.path.join(out_dir, "aggregate.csv"), "\n".join(lines) + "\n")


def _read_weight_csv(path: str, n: int) -> np.ndarray:
    if not os.path.exists(path):
        raise ConfigError(f"weight file not found: {path}")
    values = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            cell = row[0].strip()
            try:
                values.append(float(cell))
            except ValueError:
                if not values:  # header line
                    continue
                raise ConfigError(f"non-numeric weight entry {cell!r}") from None
    w = np.asarray(values, dtype=float)
    if w.size != n:
        raise ConfigError(f"weight vector has length {w.size}, dataset has {n} rows")
    return w


def cmd_evaluate(args) -> int:
    cfg = _load_config(args.config)
    seed = RngSeed(args.seed if args.seed is not None else int(cfg.get("seed", 0)))
    rep = args.replication
    data = _build_dataset(cfg, seed, rep)
    model = _build_model_cfg(cfg)
    mcmc = _build_mcmc(cfg)
    target = _build_target(cfg, model, data, mcmc, seed.child(rep))
    w = _read_weight_csv(args.w_file, data.n)
    budget_cfg = cfg.get("attack") or (cfg.get("attacks") or [{}])[0]
    fs = FeasibleSet(
        data.n, Budget(int(budget_cfg.get("b_max", 10)), int(budget_cfg.get("l_max", 2)))
    )
    violations = []
    if np.min(w) < -1e-8:
        violations.append("nonnegativity")
    if np.max(w) > fs.budget.l_max + 1e-8:
        violations.append(f"replication cap (max {fs.budget.l_max})")
    if np.sum(np.abs(w - 1.0)) > fs.budget.b_max + 1e-8:
        violations.append(f"manipulation budget (limit {fs.budget.b_max})")
    if violations:
        print("infeasible weight vector: violates " + ", ".join(violations), file=sys.stderr)
        return 1
    ecfg = dict(cfg.get("evaluation") or {})
    report = evaluate_attack(
        model,
        data,
        target,
        w,
        mcmc=mcmc,
        sample_count=int(ecfg.get("sample_count", 2000)),
        thresholds=ecfg.get("thresholds"),
        ci_levels=tuple(ecfg.get("ci_levels", [0.95])),
        seed=seed.child(_EVAL_STREAM + rep),
    )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "evaluation": report.to_dict(),
        "w": w.tolist(),
        "root_seed": seed.to_dict(),
    }
    alternates = cfg.get("alternate_models") or []
    if alternates:
        models = [make_model(m["kind"], m.get("params")) for m in alternates]
        entries = cross_evaluate(
            w,
            models,
            data,
            target_builder=lambda m, d: _build_target(cfg, m, d, mcmc, seed.child(rep)),
            mcmc=mcmc,
            sample_count=int(ecfg.get("sample_count", 2000)),
            thresholds=ecfg.get("thresholds"),
            seed=seed.child(_EVAL_STREAM + rep),
        )
        payload["alternate_evaluations"] = [e.to_dict() for e in entries]
    _write_json(os.path.join(args.out, "evaluation.json"), payload)
    print(os.path.join(args.out, "evaluation.json"))
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bayespoison",
        description="Poisoning attacks on Bayesian inference via data deletion/replication",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("attack", cmd_attack), ("sweep", cmd_sweep), ("evaluate", cmd_evaluate)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--workers", type=int, default=1, help="parallel sweep cells")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.set_defaults(func=fn)
    sub.choices["evaluate"].add_argument("--w-file", required=True, help="single-column weight CSV")
    sub.choices["evaluate"].add_argument(
        "--replication", type=int, default=0, help="replication index for seed derivation"
    )
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - uniform runtime exit code
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
