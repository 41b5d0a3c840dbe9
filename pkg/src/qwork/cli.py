"""Command line front end: parameter sweeps to CSV.

    qwork <mode> --config run.cfg --out results.csv [--workers N]

Modes: closed-sweep (full evolution work moments vs ramp time), open-sweep
(master-equation work/heat vs ramp time or coupling), lz-analytic
(closed-form crossing model) and distribution (two-point work histogram).

Output is deterministic: a '#'-prefixed echo of the resolved configuration,
one header line, then one row per sweep point with floats at 12 significant
digits. No timestamps, no machine info; rerunning a config reproduces the
file byte for byte. Exit codes: 0 success, 1 bad usage or configuration,
2 a sweep point failed numerically.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .closed import first_law_closed, propagate, with_initial_state, work_moments
from .config import MODES, ConfigError, SweepConfig, config_echo, parse_config
from .cpb import ModelParams
from .linalg import IntegrationError
from .lz import InitialState, lz_parameters, work_distribution_ground, work_stats_analytic
from .opensys import BlochState, fast_relaxation_heat, integrate_open, weak_coupling_estimate

HEADERS = {
    "closed-sweep": (
        "T_ramp", "W_over_Ec", "W2_over_Ec2", "var_over_Ec2", "dE_over_Ec",
        "analytic_W_over_Ec", "analytic_var_over_Ec2", "P_LZ",
    ),
    "open-sweep": (
        "T_ramp_or_eps2", "W_over_Ec", "dE_over_Ec", "Q_over_Ec", "Q_over_W",
        "eq10_estimate", "eq11_estimate", "status",
    ),
    "lz-analytic": (
        "T_ramp", "delta", "P_LZ", "phi", "xi1", "W_over_Ec", "var_over_Ec2",
    ),
    "distribution": ("W_over_Ec", "probability"),
}


def _model_for(cfg: SweepConfig, axis_value: float) -> ModelParams:
    if cfg.sweep_axis == "eps_squared":
        return ModelParams(
            eps=math.sqrt(axis_value), t_ramp=cfg.t_ramp, kappa=cfg.kappa,
            r_env=cfg.r_env, beta=cfg.beta, e_c_kelvin=cfg.e_c_kelvin,
        )
    return ModelParams(
        eps=cfg.eps, t_ramp=axis_value, kappa=cfg.kappa,
        r_env=cfg.r_env, beta=cfg.beta, e_c_kelvin=cfg.e_c_kelvin,
    )


def _closed_point(cfg: SweepConfig, t_ramp: float) -> tuple[list, bool]:
    params = ModelParams(eps=cfg.eps, t_ramp=t_ramp)
    lz = lz_parameters(params)
    if cfg.mix_ground is not None:
        wg = cfg.mix_ground
        grid_g = propagate(params, InitialState(alpha=1.0),
                           n_steps=cfg.n_steps, dt_max=cfg.dt_max)
        grid_e = with_initial_state(grid_g, InitialState(alpha=0.0))
        mg, me = work_moments(grid_g), work_moments(grid_e)
        w1 = wg * mg.w1 + (1.0 - wg) * me.w1
        w2 = wg * mg.w2 + (1.0 - wg) * me.w2
        var = w2 - w1 * w1
        de = (wg * first_law_closed(grid_g).delta_e
              + (1.0 - wg) * first_law_closed(grid_e).delta_e)
        ag, ae = (work_stats_analytic(lz, InitialState(alpha=1.0)),
                  work_stats_analytic(lz, InitialState(alpha=0.0)))
        a1 = wg * ag.w1 + (1.0 - wg) * ae.w1
        a2 = wg * ag.w2 + (1.0 - wg) * ae.w2
        return [t_ramp, w1, w2, var, de, a1, a2 - a1 * a1, lz.p_lz], True
    init = InitialState(alpha=cfg.alpha, gamma=cfg.gamma)
    grid = propagate(params, init, n_steps=cfg.n_steps, dt_max=cfg.dt_max)
    m = work_moments(grid)
    ledger = first_law_closed(grid)
    ana = work_stats_analytic(lz, init)
    return [t_ramp, m.w1, m.w2, m.var, ledger.delta_e, ana.w1, ana.var, lz.p_lz], True


def _open_point(cfg: SweepConfig, axis_value: float) -> tuple[list, bool]:
    params = _model_for(cfg, axis_value)
    state0 = BlochState.thermal(params) if cfg.init_state == "thermal" else BlochState.ground()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # regime warnings go to the columns, not stderr
        eq10 = weak_coupling_estimate(params)
        if math.isfinite(params.beta) and params.kappa > 0.0 and params.r_env > 0.0:
            eq11 = fast_relaxation_heat(params, n_quad=cfg.n_quad).heat
        else:
            eq11 = math.nan
        try:
            res = integrate_open(params, state0, n_steps=cfg.n_steps, dt_max=cfg.dt_max)
        except IntegrationError as exc:
            nan = math.nan
            return [axis_value, nan, nan, nan, nan, eq10, eq11,
                    f"failed: {exc.__class__.__name__}"], False
    led = res.ledger
    ratio = led.heat / led.work if abs(led.work) > 1e-300 else math.nan
    return [axis_value, led.work, led.delta_e, led.heat, ratio, eq10, eq11, "ok"], True


def _lz_point(cfg: SweepConfig, t_ramp: float) -> tuple[list, bool]:
    params = ModelParams(eps=cfg.eps, t_ramp=t_ramp)
    lz = lz_parameters(params)
    stats = work_stats_analytic(lz, InitialState(alpha=cfg.alpha, gamma=cfg.gamma))
    return [t_ramp, lz.delta, lz.p_lz, lz.phi, lz.xi1, stats.w1, stats.var], True


def _guarded(point, cfg: SweepConfig, value: float, width: int) -> tuple[list, bool]:
    # a failed point becomes a nan row so the rest of the sweep still runs
    try:
        return point(cfg, value)
    except IntegrationError:
        return [value] + [math.nan] * (width - 1), False


def run_sweep(cfg: SweepConfig, workers: int = 1) -> tuple[list[list], int]:
    """Compute all rows for a configuration; returns (rows, n_failed)."""
    if cfg.mode == "distribution":
        params = ModelParams(eps=cfg.eps, t_ramp=cfg.t_ramp)
        dist = work_distribution_ground(lz_parameters(params))
        return [[w, p] for w, p in dist.atoms], 0

    values = np.linspace(cfg.sweep_min, cfg.sweep_max, cfg.sweep_count)
    point = {"closed-sweep": _closed_point, "open-sweep": _open_point,
             "lz-analytic": _lz_point}[cfg.mode]
    width = len(HEADERS[cfg.mode])
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda v: _guarded(point, cfg, float(v), width), values))
    else:
        results = [_guarded(point, cfg, float(v), width) for v in values]
    rows = [row for row, _ in results]
    failed = sum(1 for _, ok in results if not ok)
    return rows, failed


def _format_cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(v)
    return f"{float(v):.11e}"


def write_csv(path: str | os.PathLike, cfg: SweepConfig, rows: list[list]) -> None:
    lines = [f"# {line}" for line in config_echo(cfg)]
    lines.append(",".join(HEADERS[cfg.mode]))
    lines.extend(",".join(_format_cell(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; keep 2 for numerical failures
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def main(argv: list[str] | None = None) -> int:
    parser = _Parser(
        prog="qwork",
        description="Work and heat statistics of a charge-swept Cooper-pair box.",
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, help="key = value run file")
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--workers", type=int, default=None,
                        help="parallel sweep points; default all cores, "
                             "QWORK_WORKERS overrides")
    args = parser.parse_args(argv)

    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    env_workers = os.environ.get("QWORK_WORKERS")
    if env_workers is not None:
        try:
            workers = int(env_workers)
        except ValueError:
            print(f"qwork: error: QWORK_WORKERS={env_workers!r} is not an integer",
                  file=sys.stderr)
            return 1
    if workers < 1:
        print(f"qwork: error: workers must be >= 1, got {workers}", file=sys.stderr)
        return 1

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"qwork: error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(text, mode=args.mode)
    except ConfigError as exc:
        print(f"qwork: config error: {exc}", file=sys.stderr)
        return 1

    try:
        rows, failed = run_sweep(cfg, workers=workers)
    except (IntegrationError, ValueError) as exc:
        print(f"qwork: numerical failure: {exc}", file=sys.stderr)
        return 2

    write_csv(args.out, cfg, rows)
    if failed:
        print(f"qwork: {failed} sweep point(s) failed and were written as nan rows",
              file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
