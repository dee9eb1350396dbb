"""Command-line entry points.

Subcommands::

    eas1d simulate CFG
    eas1d sweep CFG --axis key=v1,v2,...
    eas1d symbol CFG
    eas1d moc-params CFG --T t
    eas1d moc-check SNAPSHOT SPECFILE
    eas1d burgers CFG

Exit codes: 0 success, 2 configuration or input error, 3 run aborted
(vacuum or suspected blow-up), 4 internal numeric error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import moc
from .burgers import BURGERS_COLUMNS, burgers_run
from .config import RunConfig, load_config
from .diagnostics import theory_constants, write_csv
from .dynamics import build_kernel, build_symbol, initial_state, run, write_snapshot
from .errors import (ConfigError, DomainError, EASError, NumericError, PreconditionError,
                     RangeError)
from .symbol import verify_symbol_bounds

log = logging.getLogger("eas1d")

EXIT_OK, EXIT_CONFIG, EXIT_ABORTED, EXIT_NUMERIC = 0, 2, 3, 4
ABORT_REASONS = {"vacuum": EXIT_ABORTED, "gradient_cap": EXIT_ABORTED,
                 "dt_collapse": EXIT_ABORTED, "nan": EXIT_NUMERIC}
SWEEP_COLUMNS = ("index", "key", "value", "final_t", "reason", "min_rho",
                 "max_oscillation", "violations", "steps")


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output.dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output.dir {out} is not writable: {exc}", key="output.dir") from None
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output.dir {out} is not writable", key="output.dir")
    return out


# --- simulate ----------------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if cfg.run.mode == "burgers":
        return _burgers(cfg)
    out = _outdir(cfg)
    count = 0

    def on_snapshot(state):
        nonlocal count
        if cfg.output.snapshots:
            with open(out / f"snap_{count:05d}.bin", "wb") as fh:
                write_snapshot(fh, state.t, state.rho.values, state.G.values)
        count += 1

    traj = run(cfg, keep_snapshots=False, on_snapshot=on_snapshot)
    with open(out / "diagnostics.csv", "w") as fh:
        write_csv(traj.records, fh)
    print(f"reason = {traj.reason}")
    print(f"final_t = {traj.final.t!r}")
    print(f"steps = {traj.steps}")
    print(f"violations = {len(traj.violations)}")
    if traj.message:
        print(f"message = {traj.message}")
    return ABORT_REASONS.get(traj.reason, EXIT_OK)


# --- burgers -------------------------------------------------------------------------

def _burgers(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    traj = burgers_run(cfg, keep_snapshots=cfg.output.snapshots)
    for i, s in enumerate(traj.snapshots):
        with open(out / f"snap_{i:05d}.bin", "wb") as fh:
            write_snapshot(fh, s.t, s.u.values)
    with open(out / "diagnostics.csv", "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BURGERS_COLUMNS)
        for r in traj.records:
            w.writerow([repr(float(v)) for v in r.row()])
    print(f"reason = {traj.reason}")
    print(f"final_t = {traj.final.t!r}")
    print(f"steps = {traj.steps}")
    if traj.message:
        print(f"message = {traj.message}")
    return ABORT_REASONS.get(traj.reason, EXIT_OK)


def cmd_burgers(args) -> int:
    return _burgers(load_config(args.config).with_value("run.mode", "burgers"))


# --- sweep ---------------------------------------------------------------------------

def parse_axis(text: str):
    """``key=v1,v2,...`` into ``(key, [values])``; an empty list is allowed."""
    if "=" not in text:
        raise ConfigError(f"axis must look like key=v1,v2,..., got {text!r}")
    key, vals = (s.strip() for s in text.split("=", 1))
    values = [v.strip() for v in vals.split(",") if v.strip()]
    return key, values


def _check_axis_key(cfg: RunConfig, key: str):
    value = cfg.get(key)  # raises ConfigError for unknown keys
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"sweep axis {key} is not numeric", key=key)


def sweep_row(cfg: RunConfig, key: str, value: str, index: int) -> dict:
    """Run one sweep member; failures are recorded in the row, never raised."""
    row = {"index": index, "key": key, "value": value, "final_t": math.nan, "reason": "",
           "min_rho": math.nan, "max_oscillation": math.nan, "violations": 0, "steps": 0}
    try:
        c = cfg.with_value(key, value)
        traj = run(c, keep_snapshots=False)
    except Exception as exc:  # noqa: BLE001 - a failing member must not stop the sweep
        row["reason"] = f"error: {type(exc).__name__}: {exc}".replace("\n", " ")
        return row
    col = "max_abs_dxrho" if traj.consts.alpha <= 1.0 else "max_abs_dx2rho"
    row.update(
        final_t=traj.final.t, reason=traj.reason,
        min_rho=min(r.min_rho for r in traj.records),
        max_oscillation=max(getattr(r, col) for r in traj.records),
        violations=len(traj.violations), steps=traj.steps,
    )
    return row


def _sweep_task(args):
    return sweep_row(*args)


def worker_count(n_tasks: int, requested: int | None = None) -> int:
    if requested is None:
        env = os.environ.get("SIM_THREADS")
        if env:
            try:
                requested = int(env)
            except ValueError:
                raise ConfigError(f"SIM_THREADS must be an integer, got {env!r}") from None
        else:
            requested = os.cpu_count() or 1
    return max(1, min(requested, n_tasks))


def sweep(cfg: RunConfig, key: str, values, workers: int | None = None) -> list[dict]:
    """One row per value, in axis order regardless of completion order."""
    _check_axis_key(cfg, key)
    tasks = [(cfg, key, v, i) for i, v in enumerate(values)]
    if not tasks:
        return []
    n = worker_count(len(tasks), workers)
    if n == 1:
        return [_sweep_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_sweep_task, tasks))


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def write_sweep_csv(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in SWEEP_COLUMNS])


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    key, values = parse_axis(args.axis)
    _check_axis_key(cfg, key)
    rows = sweep(cfg, key, values, args.workers)
    path = Path(args.out) if args.out else _outdir(cfg) / "sweep_summary.csv"
    with open(path, "w") as fh:
        write_sweep_csv(rows, fh)
    print(f"rows = {len(rows)}")
    print(f"summary = {path}")
    return EXIT_OK


# --- symbol --------------------------------------------------------------------------

def cmd_symbol(args) -> int:
    cfg = load_config(args.config)
    pk = build_kernel(cfg)
    A = build_symbol(cfg, pk)
    half = A.N // 2
    zeta = 2.0 * np.pi * np.arange(half + 1)
    path = Path(args.out) if args.out else _outdir(cfg) / "symbol.csv"
    with open(path, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("zeta", "A"))
        for z, a in zip(zeta, A.rfft_values):
            w.writerow((repr(float(z)), repr(float(a))))
    rep = verify_symbol_bounds(A, pk.alpha, pk.a0, kernel=pk.base)
    print(f"csv = {path}")
    print(f"source = {A.source}")
    for name in ("C_lower", "C_upper", "lower_ok", "upper_ok", "worst_zeta_lower",
                 "worst_zeta_upper", "deriv_scaled_sup", "C_lower_analytic",
                 "C_upper_analytic", "analytic_ok", "passed"):
        print(f"{name} = {_value(getattr(rep, name))}")
    return EXIT_OK


def _value(v):
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


# --- moc -----------------------------------------------------------------------------

def cmd_moc_params(args) -> int:
    cfg = load_config(args.config)
    mode = args.rho_min_mode or cfg.moc.rho_min_mode
    pk = build_kernel(cfg)
    A = build_symbol(cfg, pk)
    state, _ = initial_state(cfg, A)
    consts = theory_constants(state.rho, state.G, pk)
    rho_min = None
    if mode == "empirical":
        traj = run(cfg.with_value("run.T", args.T), pk, A, keep_snapshots=False)
        rho_min = min(r.min_rho for r in traj.records)
    spec = moc.select_parameters(args.T, consts, pk, mode, rho_min)
    rho_min_T = consts.lower_envelope(args.T) if mode == "theoretical" else rho_min
    print(f"rho_min_mode = {mode}")
    print(f"rho_min_T = {rho_min_T!r}")
    print(f"M1 = {consts.M1!r}")
    print(f"delta = {spec.delta!r}")
    print(f"gamma = {spec.gamma!r}")
    print(f"log_lambda = {spec.log_lambda!r}")
    print(f"lambda = {spec.lam!r}")
    print(f"log_Xi = {spec.log_Xi()!r}")
    print(f"Xi = {spec.Xi!r}")
    for th in spec.ledger:
        print(f"threshold {th.quantity} {th.name} log_value = {th.log_value(spec.gamma)!r}"
              f" base = {th.base!r} coef = {th.coef!r}")
    if args.write_spec:
        Path(args.write_spec).write_text(moc.format_moc_spec(spec))
        print(f"spec = {args.write_spec}")
    return EXIT_OK


def cmd_moc_check(args) -> int:
    from .dynamics import read_snapshot

    try:
        with open(args.snapshot, "rb") as fh:
            t, arrays = read_snapshot(fh)
        spec = moc.parse_moc_spec(Path(args.specfile).read_text())
    except OSError as exc:
        raise PreconditionError(str(exc)) from None
    f = arrays[0]
    if args.field == "dxrho":
        k = np.fft.rfftfreq(len(f), 1.0 / len(f))
        c = 2j * np.pi * k * np.fft.rfft(f)
        c[-1] = 0.0
        f = np.fft.irfft(c, n=len(f))
    rep = moc.check_obeys(f, spec, refine=args.refine, t=t)
    print(f"t = {t!r}")
    print(f"obeys = {_value(rep.obeys)}")
    print(f"margin = {rep.margin!r}")
    x, y, diff, om = rep.worst_pair
    print(f"worst_x = {x!r}")
    print(f"worst_y = {y!r}")
    print(f"worst_diff = {diff!r}")
    print(f"worst_omega = {om!r}")
    return EXIT_OK


# --- entry point ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eas1d", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate one configuration")
    s.add_argument("config")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="run one simulation per value of a config key")
    s.add_argument("config")
    s.add_argument("--axis", required=True, help="key=v1,v2,...")
    s.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: SIM_THREADS or CPU count)")
    s.add_argument("--out", default=None, help="summary CSV (default: OUTDIR/sweep_summary.csv)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("symbol", help="tabulate the symbol and check its bounds")
    s.add_argument("config")
    s.add_argument("--out", default=None, help="CSV path (default: OUTDIR/symbol.csv)")
    s.set_defaults(func=cmd_symbol)

    s = sub.add_parser("moc-params", help="select modulus parameters for a horizon")
    s.add_argument("config")
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--rho-min-mode", choices=("theoretical", "empirical"), default=None)
    s.add_argument("--write-spec", default=None, help="save the spec for moc-check")
    s.set_defaults(func=cmd_moc_params)

    s = sub.add_parser("moc-check", help="check a snapshot against a modulus spec")
    s.add_argument("snapshot")
    s.add_argument("specfile")
    s.add_argument("--field", choices=("rho", "dxrho"), default="rho")
    s.add_argument("--refine", action="store_true", help="scan on a twice finer grid")
    s.set_defaults(func=cmd_moc_check)

    s = sub.add_parser("burgers", help="integrate the constant-density companion")
    s.add_argument("config")
    s.set_defaults(func=cmd_burgers)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ConfigError, PreconditionError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, RangeError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except EASError as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ABORTED


if __name__ == "__main__":
    sys.exit(main())
