"""Command-line front-end.

Subcommands: ``run`` (one seeded trial), ``sweep`` (JSON-spec Monte-Carlo
sweep), ``oracle`` (exhaustive small-instance searches), ``gradcheck``
(finite-difference audit of the manifold solver's gradient).

Exit codes: 0 success, 2 bad configuration, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import epprgd, experiments, oracle
from .channel import SystemConfig, generate_channels
from .manifold import ManifoldPoint
from .trace import TRACE_COLUMNS

EXIT_OK = 0
EXIT_BAD_CONFIG = 2
EXIT_IO = 3


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    desk = SystemConfig.desk_scale()
    parser.add_argument("--m", type=int, default=desk.m, help="transmit antennas")
    parser.add_argument("--n-b", type=int, default=desk.n_b, help="Bob antennas")
    parser.add_argument("--n-e", type=int, default=desk.n_e, help="Eve antennas")
    parser.add_argument("--n-i", type=int, default=desk.n_i, help="IRS elements")
    parser.add_argument("--p-dbm", type=float, default=desk.p_dbm)
    parser.add_argument("--sigma-b-dbm", type=float, default=desk.sigma_b_dbm)
    parser.add_argument("--sigma-e-dbm", type=float, default=desk.sigma_e_dbm)
    parser.add_argument("--pos-alice", type=float, nargs=2, default=list(desk.pos_alice))
    parser.add_argument("--pos-irs", type=float, nargs=2, default=list(desk.pos_irs))
    parser.add_argument("--pos-bob", type=float, nargs=2, default=list(desk.pos_bob))
    parser.add_argument("--pos-eve", type=float, nargs=2, default=list(desk.pos_eve))
    parser.add_argument("--nu-ai", type=float, default=desk.nu_ai)
    parser.add_argument("--nu-ib", type=float, default=desk.nu_ib)
    parser.add_argument("--nu-ie", type=float, default=desk.nu_ie)
    parser.add_argument("--nu-ab", type=float, default=desk.nu_ab)
    parser.add_argument("--nu-ae", type=float, default=desk.nu_ae)
    parser.add_argument("--rician-factor", type=float, default=desk.rician_factor)
    parser.add_argument("--c0-db", type=float, default=desk.c0_db)
    parser.add_argument("--d0", type=float, default=desk.d0)
    parser.add_argument("--seed", type=int, default=0)


def _config_from_args(args: argparse.Namespace) -> SystemConfig:
    return SystemConfig(
        m=args.m,
        n_b=args.n_b,
        n_e=args.n_e,
        n_i=args.n_i,
        p_dbm=args.p_dbm,
        sigma_b_dbm=args.sigma_b_dbm,
        sigma_e_dbm=args.sigma_e_dbm,
        pos_alice=tuple(args.pos_alice),
        pos_irs=tuple(args.pos_irs),
        pos_bob=tuple(args.pos_bob),
        pos_eve=tuple(args.pos_eve),
        nu_ai=args.nu_ai,
        nu_ib=args.nu_ib,
        nu_ie=args.nu_ie,
        nu_ab=args.nu_ab,
        nu_ae=args.nu_ae,
        rician_factor=args.rician_factor,
        c0_db=args.c0_db,
        d0=args.d0,
        seed=args.seed,
    )


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    record = experiments.run_trial(
        config, args.solver, args.seed, delta_e=args.delta_e
    )
    trace = record.pop("trace")
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            writer.writerows(trace.rows())
    json.dump(record, sys.stdout, indent=2, default=float)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = experiments.ExperimentSpec.from_json(args.spec)
    if args.output:
        spec.output = args.output
    if args.workers:
        spec.workers = args.workers
    records, summary = experiments.run_sweep(spec)
    print(f"records: {records}")
    print(f"summary: {summary}")
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    channels = generate_channels(config, args.seed)
    if args.levels > 1 and config.n_i > 0:
        x0 = oracle.candidate_precoder(0, config.m)
        theta, _ = oracle.grid_search_phases(
            channels, x0, args.levels, mode=args.grid_mode
        )
    else:
        theta = np.ones(config.n_i, dtype=complex)
    x_best, rate = oracle.enumerate_precoders(channels, theta)
    out = {
        "m": config.m,
        "n_i": config.n_i,
        "seed": args.seed,
        "grid_levels": args.levels,
        "best_rate_bps_hz": rate,
        "best_precoder_real": list(np.real(x_best)),
        "best_precoder_imag": list(np.imag(x_best)),
    }
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_gradcheck(args: argparse.Namespace) -> int:
    config = SystemConfig.desk_scale(m=args.m, n_i=args.n_i, seed=args.seed)
    channels = generate_channels(config, args.seed)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.points):
        x = rng.standard_normal(config.m) + 1j * rng.standard_normal(config.m)
        x /= np.linalg.norm(x)
        theta = np.exp(2j * np.pi * rng.random(config.n_i))
        point = ManifoldPoint(x, theta)
        obj = epprgd.SmoothedObjective(channels, args.rho_r, args.u)

        def f(vec: np.ndarray) -> float:
            xb, tb = oracle.real_to_complex(vec, config.m, config.n_i)
            s = channels.h_ai @ xb
            ts = tb * s
            bx = channels.h_ib @ ts + channels.h_ab @ xb
            ex = channels.h_ie @ ts + channels.h_ae @ xb
            val = np.log(
                (1.0 + np.real(np.vdot(ex, ex))) / (1.0 + np.real(np.vdot(bx, bx)))
            )
            residuals = epprgd.penalty_terms(xb)
            soft = np.maximum(residuals, 0.0) + args.u * np.log1p(
                np.exp(-np.abs(residuals) / args.u)
            )
            return float(val + args.rho_r * np.sum(soft))

        fd = oracle.finite_difference(f, oracle.complex_to_real(x, theta), h=args.step)
        gx, gt = obj.euclidean_gradient(point)
        analytic = oracle.complex_to_real(gx, gt)
        rel = float(
            np.linalg.norm(fd - analytic) / max(np.linalg.norm(analytic), 1e-300)
        )
        worst = max(worst, rel)
    print(f"max relative gradient error over {args.points} points: {worst:.3e}")
    if worst > args.tol:
        print(f"FAIL: exceeds tolerance {args.tol:.1e}")
        return 1
    print(f"PASS: within tolerance {args.tol:.1e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irsec",
        description="Secrecy-rate maximization for one-bit IRS-assisted downlinks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one seeded trial and print the record")
    _add_config_flags(p_run)
    p_run.add_argument("--solver", choices=experiments.SOLVERS, default="wmmse_pdd")
    p_run.add_argument("--delta-e", type=float, default=0.0, help="Eve CSI NMSE")
    p_run.add_argument("--trace", help="write the per-iteration trace CSV here")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a sweep described by a JSON spec")
    p_sweep.add_argument("spec", help="path to the sweep spec JSON")
    p_sweep.add_argument("--output", help="override the spec's output directory")
    p_sweep.add_argument("--workers", type=int, help="override the worker count")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_oracle = sub.add_parser("oracle", help="exhaustive small-instance search")
    _add_config_flags(p_oracle)
    p_oracle.add_argument("--levels", type=int, default=1, help="phase grid levels")
    p_oracle.add_argument(
        "--grid-mode", choices=("auto", "joint", "coordinate"), default="auto"
    )
    p_oracle.set_defaults(func=_cmd_oracle)

    p_grad = sub.add_parser("gradcheck", help="finite-difference gradient audit")
    p_grad.add_argument("--m", type=int, default=6)
    p_grad.add_argument("--n-i", type=int, default=4)
    p_grad.add_argument("--points", type=int, default=20)
    p_grad.add_argument("--seed", type=int, default=0)
    p_grad.add_argument("--rho-r", type=float, default=1.0)
    p_grad.add_argument("--u", type=float, default=0.1)
    p_grad.add_argument("--step", type=float, default=1e-6)
    p_grad.add_argument("--tol", type=float, default=1e-5)
    p_grad.set_defaults(func=_cmd_gradcheck)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
