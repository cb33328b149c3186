"""Monte-Carlo harness: trial orchestration, baselines, and CSV outputs.

A trial is (scenario config, solver id, seed): channels are drawn from the
seed, the solver runs, and a flat record comes back.  Sweeps fan a base
config across one parameter's value list, derive an independent sub-seed per
(value, trial, solver) cell, and persist one record row per trial plus one
mean/std summary row per (value, solver) pair.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import epprgd, wmmse_pdd
from .channel import ChannelSet, SystemConfig, estimated_channels, generate_channels
from .secrecy import IrsPhases, OneBitPrecoder, quantize_one_bit, secrecy_rate
from .trace import TRACE_COLUMNS, SolverTrace

SOLVERS = ("wmmse_pdd", "epprgd", "dp_irs", "woirs_onebit")

#: Config fields a sweep may vary, plus the estimation-error level.
SWEEPABLE = (
    "m",
    "n_b",
    "n_e",
    "n_i",
    "p_dbm",
    "sigma_b_dbm",
    "sigma_e_dbm",
    "rician_factor",
    "delta_e",
)

RECORD_COLUMNS = (
    "sweep_param",
    "sweep_value",
    "trial",
    "solver",
    "secrecy_bps_hz",
    "iters_inner_total",
    "iters_outer",
    "wall_ms",
    "violation",
    "converged",
)

SUMMARY_COLUMNS = (
    "sweep_param",
    "sweep_value",
    "solver",
    "trials",
    "secrecy_mean",
    "secrecy_std",
    "wall_ms_mean",
    "violation_mean",
    "converged_count",
)


@dataclass
class ExperimentSpec:
    """A sweep: base scenario, one varied parameter, trials, and solvers."""

    base: SystemConfig
    sweep_param: str
    sweep_values: list
    trials: int = 50
    solvers: list = field(default_factory=lambda: list(SOLVERS))
    settings: dict = field(default_factory=dict)
    delta_e: float = 0.0
    output: str = "results"
    save_traces: bool = False
    workers: int = 1
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trial count must be >= 1")
        if self.sweep_param not in SWEEPABLE:
            raise ValueError(
                f"unknown sweep parameter {self.sweep_param!r}; choose from {SWEEPABLE}"
            )
        for solver in self.solvers:
            if solver not in SOLVERS:
                raise ValueError(f"unknown solver {solver!r}; choose from {SOLVERS}")
        for value in self.sweep_values:
            self._apply(value)  # validates each value against the parameter

    def _apply(self, value) -> tuple[SystemConfig, float]:
        if self.sweep_param == "delta_e":
            if value < 0:
                raise ValueError("delta_e must be >= 0")
            return self.base, float(value)
        cfg = dataclasses.replace(self.base, **{self.sweep_param: value})
        return cfg, self.delta_e

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentSpec":
        with open(path) as fh:
            doc = json.load(fh)
        base = SystemConfig(**{
            k: tuple(v) if k.startswith("pos_") else v
            for k, v in doc.get("base", {}).items()
        })
        sweep = doc["sweep"]
        return cls(
            base=base,
            sweep_param=sweep["param"],
            sweep_values=list(sweep["values"]),
            trials=doc.get("trials", 50),
            solvers=list(doc.get("solvers", SOLVERS)),
            settings=doc.get("settings", {}),
            delta_e=doc.get("delta_e", 0.0),
            output=doc.get("output", "results"),
            save_traces=doc.get("save_traces", False),
            workers=doc.get("workers", 1),
            master_seed=doc.get("master_seed", 0),
        )


def derive_seed(master_seed: int, sweep_param: str, sweep_value, trial: int, solver: str) -> int:
    """Stable per-cell sub-seed; independent of execution order."""
    key = f"{master_seed}|{sweep_param}|{sweep_value!r}|{trial}|{solver}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


def _solver_settings(solver: str, settings):
    if settings is None:
        return epprgd.EpprgdSettings() if solver == "epprgd" else wmmse_pdd.PddSettings()
    if isinstance(settings, dict):
        cls = epprgd.EpprgdSettings if solver == "epprgd" else wmmse_pdd.PddSettings
        return cls(**settings)
    return settings


def baseline_dp_irs(
    channels: ChannelSet,
    settings: wmmse_pdd.PddSettings | None = None,
    init_seed: int = 0,
    eval_channels: ChannelSet | None = None,
) -> tuple[OneBitPrecoder, IrsPhases, float, SolverTrace]:
    """Direct-projection baseline: relaxed sphere solve, then one-bit snap.

    The phases are kept from the relaxed solve; only the precoder is
    projected onto the alphabet.
    """
    x_relaxed, theta, trace = wmmse_pdd.solve_relaxed(
        channels, settings, init_seed=init_seed
    )
    x = quantize_one_bit(x_relaxed)
    rate = secrecy_rate(eval_channels if eval_channels is not None else channels, x.x, theta.theta)
    return x, theta, rate, trace


def baseline_woirs_onebit(
    channels: ChannelSet,
    settings: wmmse_pdd.PddSettings | None = None,
    init_seed: int = 0,
    eval_channels: ChannelSet | None = None,
) -> tuple[OneBitPrecoder, float, SolverTrace]:
    """No-IRS baseline: zero all IRS links and run the one-bit solver.

    With zeroed reflection channels the phase blocks are exact no-ops, so
    this reduces to the precoder updates alone.
    """
    bare = channels.zero_irs()
    x, theta, trace = wmmse_pdd.solve(bare, settings, init_seed=init_seed)
    eval_bare = eval_channels.zero_irs() if eval_channels is not None else bare
    rate = secrecy_rate(eval_bare, x.x, theta.theta)
    return x, rate, trace


def run_trial(
    config: SystemConfig,
    solver: str,
    seed: int,
    delta_e: float = 0.0,
    settings=None,
) -> dict:
    """One seeded realization: draw channels, run the solver, flatten results.

    With ``delta_e > 0`` the solver sees Eve channels perturbed at that NMSE
    while the reported secrecy rate uses the true channels.  Records carry a
    convergence flag instead of being dropped on non-convergence.
    """
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}")
    true_channels = generate_channels(config, seed)
    if delta_e > 0:
        err_rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(seed, spawn_key=(1000,)))
        )
        opt_channels = estimated_channels(
            true_channels,
            delta_e,
            err_rng,
            config.p_lin,
            config.sigma_b_lin,
            config.sigma_e_lin,
        )
    else:
        opt_channels = true_channels

    settings = _solver_settings(solver, settings)
    start = time.perf_counter()
    if solver == "wmmse_pdd":
        x, theta, trace = wmmse_pdd.solve(opt_channels, settings, init_seed=seed)
        rate = secrecy_rate(true_channels, x.x, theta.theta)
    elif solver == "epprgd":
        x, theta, trace = epprgd.solve(opt_channels, settings, init_seed=seed)
        rate = secrecy_rate(true_channels, x.x, theta.theta)
    elif solver == "dp_irs":
        x, theta, rate, trace = baseline_dp_irs(
            opt_channels, settings, init_seed=seed, eval_channels=true_channels
        )
    else:  # woirs_onebit
        x, rate, trace = baseline_woirs_onebit(
            opt_channels, settings, init_seed=seed, eval_channels=true_channels
        )
    wall_ms = 1e3 * (time.perf_counter() - start)

    return {
        "solver": solver,
        "seed": seed,
        "secrecy_bps_hz": rate,
        "iters_inner_total": trace.inner_iterations,
        "iters_outer": len(trace),
        "wall_ms": wall_ms,
        "violation": trace.final_violation,
        "converged": trace.converged,
        "trace": trace,
    }


def _run_cell(args) -> tuple:
    spec_dict, value, trial, solver = args
    spec = _spec_from_plain(spec_dict)
    config, delta_e = spec._apply(value)
    seed = derive_seed(spec.master_seed, spec.sweep_param, value, trial, solver)
    try:
        record = run_trial(
            config, solver, seed, delta_e=delta_e, settings=spec.settings.get(solver)
        )
    except Exception:
        record = {
            "solver": solver,
            "seed": seed,
            "secrecy_bps_hz": float("nan"),
            "iters_inner_total": 0,
            "iters_outer": 0,
            "wall_ms": 0.0,
            "violation": float("inf"),
            "converged": False,
            "trace": SolverTrace(solver=solver),
        }
    return value, trial, solver, record


def _spec_to_plain(spec: ExperimentSpec) -> dict:
    doc = dataclasses.asdict(spec)
    doc["base"] = dataclasses.asdict(spec.base)
    return doc


def _spec_from_plain(doc: dict) -> ExperimentSpec:
    doc = dict(doc)
    doc["base"] = SystemConfig(**doc["base"])
    return ExperimentSpec(**doc)


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def run_sweep(spec: ExperimentSpec) -> tuple[Path, Path]:
    """Execute the sweep and write ``records.csv`` and ``summary.csv``.

    Rows are written in (value, trial, solver) order regardless of execution
    order; failures are recorded with ``converged=false`` rather than
    dropped.  Returns the two output paths.
    """
    out_dir = Path(spec.output)
    out_dir.mkdir(parents=True, exist_ok=True)

    tasks = [
        (_spec_to_plain(spec), value, trial, solver)
        for value in spec.sweep_values
        for trial in range(spec.trials)
        for solver in spec.solvers
    ]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_run_cell, tasks))
    else:
        results = [_run_cell(t) for t in tasks]

    order = {
        (value, trial, solver): i
        for i, (value, trial, solver) in enumerate(
            (v, t, s)
            for v in spec.sweep_values
            for t in range(spec.trials)
            for s in spec.solvers
        )
    }
    results.sort(key=lambda r: order[(r[0], r[1], r[2])])

    records_path = out_dir / "records.csv"
    summary_path = out_dir / "summary.csv"
    groups: dict[tuple, list[dict]] = {}
    with open(records_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS)
        for value, trial, solver, rec in results:
            writer.writerow(
                [
                    spec.sweep_param,
                    _format_value(value),
                    trial,
                    solver,
                    _format_value(rec["secrecy_bps_hz"]),
                    rec["iters_inner_total"],
                    rec["iters_outer"],
                    format(rec["wall_ms"], ".3f"),
                    format(rec["violation"], ".6e"),
                    _format_value(rec["converged"]),
                ]
            )
            groups.setdefault((value, solver), []).append(rec)
            if spec.save_traces:
                cell_dir = out_dir / f"{spec.sweep_param}={_format_value(value)}"
                cell_dir.mkdir(exist_ok=True)
                _write_trace(cell_dir / f"{solver}_{trial}.trace.csv", rec["trace"])

    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for value in spec.sweep_values:
            for solver in spec.solvers:
                recs = groups.get((value, solver), [])
                rates = np.array([r["secrecy_bps_hz"] for r in recs])
                # Sample mean and unbiased (ddof=1) sample standard deviation.
                mean = float(np.mean(rates)) if rates.size else float("nan")
                std = float(np.std(rates, ddof=1)) if rates.size > 1 else 0.0
                writer.writerow(
                    [
                        spec.sweep_param,
                        _format_value(value),
                        solver,
                        len(recs),
                        _format_value(mean),
                        _format_value(std),
                        format(float(np.mean([r["wall_ms"] for r in recs])), ".3f"),
                        format(float(np.mean([r["violation"] for r in recs])), ".6e"),
                        sum(1 for r in recs if r["converged"]),
                    ]
                )
    return records_path, summary_path


def _write_trace(path: Path, trace: SolverTrace) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for row in trace.rows():
            writer.writerow(
                [
                    row[0],
                    _format_value(row[1]),
                    format(row[2], ".6e"),
                    _format_value(row[3]),
                    format(row[4], ".6f"),
                ]
            )
