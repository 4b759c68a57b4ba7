"""Command-line interface.

Subcommands: fit-surrogate, fit-trends, simulate, solve, scenario,
lema-sweep, report.  Every run directory receives strategies.csv,
panel.csv, heads.csv, report.json, and SVG charts; report.json embeds the
fully resolved configuration, weather, surrogate, scenario, seed, and
hyperparameters, so `irrigame report --from <report.json> --out DIR`
re-executes the run and reproduces its outputs byte for byte.

Exit codes: 0 success, 1 validation error, 2 solver non-convergence
(results are still written).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from .agronomy import (
    SurrogateModel,
    fit_surrogate_model,
    load_surrogate_csv,
    save_surrogate_csv,
    surrogate_from_rows,
    surrogate_to_rows,
)
from .config import (
    ConfigError,
    RunConfig,
    config_from_dict,
    config_to_dict,
    default_config_path,
    load_config,
)
from .econ import fit_exponential_trend
from .game import (
    EquilibriumReport,
    lema_limits,
    relax_to_equilibrium,
    verify_equilibrium,
)
from .io_files import (
    load_series_csv,
    load_strategies_csv,
    load_training_csv,
    load_weather_csv,
    weather_from_rows,
    weather_to_rows,
    write_results,
)
from .plots import render_plots
from .scenarios import ScenarioSpec, apply_scenario, scenario_by_name
from .sim import (
    JointStrategy,
    LemaConstraint,
    ScenarioInputs,
    SimulationResult,
    run_simulation,
)


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="PATH", help="run configuration JSON (default: shipped baseline)")
    shared.add_argument("--seed", type=int, metavar="U64", help="override the configured RNG seed")
    shared.add_argument("--eta", type=float, help="override relaxation step size")
    shared.add_argument("--epsilon", type=float, help="override convergence tolerance")
    shared.add_argument("--max-iters", type=int, dest="max_iters", help="override iteration cap")
    shared.add_argument("--out", metavar="DIR", default="out", help="output directory (default: ./out)")
    shared.add_argument("--discount", type=float, help="override yearly utility discount factor")
    shared.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = argparse.ArgumentParser(
        prog="irrigame",
        description="Nash-equilibrium irrigation strategies over a shared aquifer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-surrogate", parents=[shared], help="fit crop response surfaces from a training table")
    p.add_argument("--training", required=True, metavar="CSV")
    p.set_defaults(func=_cmd_fit_surrogate)

    p = sub.add_parser("fit-trends", parents=[shared], help="fit an exponential trend to a (year,value) series")
    p.add_argument("--series", required=True, metavar="CSV")
    p.add_argument("--label", default=None, help="name used for the emitted trend file")
    p.set_defaults(func=_cmd_fit_trends)

    p = sub.add_parser("simulate", parents=[shared], help="simulate a fixed strategy under the configured scenario")
    p.add_argument("--strategy", metavar="CSV", help="strategies.csv to simulate (default: even split)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("solve", parents=[shared], help="compute a Nash equilibrium for the configured scenario")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("scenario", parents=[shared], help="solve a named built-in scenario")
    p.add_argument("name")
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("lema-sweep", parents=[shared], help="sweep pumping-cap fractions against the baseline")
    p.add_argument("--fractions", default=None, help="comma-separated cap fractions (default: built-in sweep)")
    p.set_defaults(func=_cmd_lema_sweep)

    p = sub.add_parser("report", parents=[shared], help="re-execute a run from its report.json")
    p.add_argument("--from", dest="from_path", required=True, metavar="REPORT_JSON")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


# ---------------------------------------------------------------------------
# shared plumbing


def _resolved_config(args) -> RunConfig:
    cfg = load_config(args.config if args.config else default_config_path())
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.discount is not None:
        cfg = dataclasses.replace(cfg, discount=args.discount)
    relax = cfg.relaxation
    updates = {}
    if args.eta is not None:
        updates["eta"] = args.eta
    if args.epsilon is not None:
        updates["epsilon"] = args.epsilon
    if args.max_iters is not None:
        updates["max_iters"] = args.max_iters
    if updates:
        cfg = dataclasses.replace(cfg, relaxation=dataclasses.replace(relax, **updates))
    return cfg


def _load_model_files(cfg: RunConfig):
    weather = load_weather_csv(cfg.weather_csv)
    surrogate = load_surrogate_csv(cfg.surrogate_csv)
    return weather, surrogate


def _run_meta(command: str, cfg: RunConfig, weather, surrogate: SurrogateModel, spec: ScenarioSpec) -> dict:
    return {
        "command": command,
        "config": config_to_dict(cfg),
        "weather": weather_to_rows(weather),
        "surrogate": surrogate_to_rows(surrogate),
        "scenario": spec.to_dict(),
    }


def _strategy_rows(strategy: JointStrategy) -> list[list]:
    n, k, t_max = strategy.shares.shape
    return [
        [i + 1, c + 1, t + 1, float(strategy.shares[i, c, t])]
        for i in range(n)
        for c in range(k)
        for t in range(t_max)
    ]


def _strategy_from_rows(rows) -> JointStrategy:
    n = max(int(r[0]) for r in rows)
    k = max(int(r[1]) for r in rows)
    t_max = max(int(r[2]) for r in rows)
    shares = np.zeros((n, k, t_max))
    for i, c, t, v in rows:
        shares[int(i) - 1, int(c) - 1, int(t) - 1] = float(v)
    return JointStrategy(shares)


def _lema_to_dict(lema: LemaConstraint) -> dict:
    return {
        "windows": [list(w) for w in lema.windows],
        "limits_m3": [[float(v) for v in row] for row in lema.limits_m3],
    }


def _lema_from_dict(d: dict) -> LemaConstraint:
    return LemaConstraint(
        windows=tuple(tuple(int(y) for y in w) for w in d["windows"]),
        limits_m3=np.array(d["limits_m3"], dtype=float),
    )


def _even_strategy(inputs: ScenarioInputs) -> JointStrategy:
    shares = np.full((inputs.n_agents, inputs.n_crops, inputs.horizon), 0.5)
    return JointStrategy(shares)


def _print_summary(result: SimulationResult, report: EquilibriumReport | None, cert: EquilibriumReport | None) -> None:
    if report is not None:
        status = "converged" if report.converged else "NOT converged"
        print(
            f"solver {status}: {report.iterations} iterations, "
            f"residual {report.residual:.3g}, psi {report.psi:.6g}"
        )
    if cert is not None and cert.improvements_rel is not None:
        worst = float(np.max(cert.improvements_rel))
        print(f"certification: max unilateral improvement {worst:.3g} (relative)")
    for i, u in enumerate(result.utilities):
        print(f"agent {i + 1}: utility ${u:,.0f}")


def _solve_into(
    cfg: RunConfig,
    weather,
    surrogate: SurrogateModel,
    spec: ScenarioSpec,
    outdir: Path,
    quiet: bool,
    command: str,
    init: JointStrategy | None = None,
    lema: LemaConstraint | None = None,
) -> tuple[SimulationResult, EquilibriumReport, EquilibriumReport]:
    params = cfg.to_model_params(surrogate)
    inputs = apply_scenario(weather, params, dataclasses.replace(spec, lema_fractions=()))
    rcfg = cfg.relaxation.to_relaxation_config(cfg.seed)
    strategy, report = relax_to_equilibrium(init, inputs, lema, rcfg)
    cert = verify_equilibrium(strategy, inputs, lema, deviation_grid=0.05, cfg=rcfg)
    result = run_simulation(strategy, inputs)

    meta = _run_meta(command, cfg, weather, surrogate, spec)
    if lema is not None:
        meta["lema_limits"] = _lema_to_dict(lema)
    if init is not None:
        meta["init_strategy"] = _strategy_rows(init)
    write_results(result, report, outdir, certification=cert, extra=meta)
    render_plots(result, report, outdir)
    if not quiet:
        print(f"[{outdir}]")
        _print_summary(result, report, cert)
    return result, report, cert


def _run_sweep(
    cfg: RunConfig,
    weather,
    surrogate: SurrogateModel,
    spec: ScenarioSpec,
    fractions,
    outdir: Path,
    quiet: bool,
) -> int:
    base_result, base_report, _ = _solve_into(
        cfg, weather, surrogate, spec, outdir / "baseline", quiet, command="solve"
    )
    exit_code = 0 if base_report.converged else 2

    summary: list[tuple[float, float, bool, bool]] = []
    for fraction in fractions:
        limits = lema_limits(base_result, fraction)
        sub = outdir / f"lema-{fraction:.2f}"
        result, report, cert = _solve_into(
            cfg,
            weather,
            surrogate,
            spec,
            sub,
            quiet,
            command="solve",
            init=base_result.strategy,
            lema=limits,
        )
        feasible = bool(report.feasible) if report.feasible is not None else True
        summary.append((fraction, float(result.utilities.sum()), report.converged, feasible))
        if not report.converged:
            exit_code = 2

    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["fraction", "total_utility_usd", "converged", "feasible"])
        for fraction, total, converged, feasible in summary:
            w.writerow([f"{fraction:.2f}", f"{total:.17g}", converged, feasible])
    render_plots(
        base_result,
        base_report,
        outdir,
        lema_summary=[(f, u) for f, u, _, _ in summary],
    )
    sweep_meta = _run_meta("lema-sweep", cfg, weather, surrogate, spec)
    sweep_meta["fractions"] = [float(f) for f in fractions]
    payload = {
        "run": sweep_meta,
        "summary": [
            {"fraction": f, "total_utility_usd": u, "converged": c, "feasible": fe}
            for f, u, c, fe in summary
        ],
    }
    (outdir / "report.json").write_text(json.dumps(payload, indent=2) + "\n")
    if not quiet:
        print("sweep summary (fraction -> total utility):")
        for fraction, total, _, _ in summary:
            print(f"  {fraction:.2f} -> ${total:,.0f}")
    return exit_code


# ---------------------------------------------------------------------------
# subcommands


def _cmd_fit_surrogate(args) -> int:
    tables = load_training_csv(args.training)
    model = fit_surrogate_model(tables)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    out = outdir / "surrogate_fitted.csv"
    save_surrogate_csv(model, out)
    if not args.quiet:
        for crop in model.crops:
            rmse = ", ".join(f"{v:.4g}" for v in model.by_crop[crop].rmse)
            print(f"{crop}: per-channel RMSE [{rmse}]")
        print(f"wrote {out}")
    return 0


def _cmd_fit_trends(args) -> int:
    series = load_series_csv(args.series)
    v0, tau = fit_exponential_trend(series)
    label = args.label or Path(args.series).stem
    payload = {
        "label": label,
        "value_init": v0,
        "tau_years": None if math.isinf(tau) else tau,
        "yearly_rate": 0.0 if math.isinf(tau) else math.expm1(1.0 / tau),
    }
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    out = outdir / f"trend_{label}.json"
    out.write_text(json.dumps(payload, indent=2) + "\n")
    print(json.dumps(payload))
    return 0


def _cmd_simulate(args) -> int:
    cfg = _resolved_config(args)
    weather, surrogate = _load_model_files(cfg)
    spec = dataclasses.replace(cfg.scenario, lema_fractions=())
    params = cfg.to_model_params(surrogate)
    inputs = apply_scenario(weather, params, spec)
    strategy = load_strategies_csv(args.strategy) if args.strategy else _even_strategy(inputs)
    result = run_simulation(strategy, inputs)

    meta = _run_meta("simulate", cfg, weather, surrogate, spec)
    meta["strategy"] = _strategy_rows(strategy)
    outdir = Path(args.out)
    write_results(result, None, outdir, extra=meta)
    render_plots(result, None, outdir)
    if not args.quiet:
        _print_summary(result, None, None)
    return 0


def _cmd_solve(args) -> int:
    cfg = _resolved_config(args)
    weather, surrogate = _load_model_files(cfg)
    spec = cfg.scenario
    if spec.lema_fractions:
        return _run_sweep(cfg, weather, surrogate, spec, spec.lema_fractions, Path(args.out), args.quiet)
    _, report, _ = _solve_into(cfg, weather, surrogate, spec, Path(args.out), args.quiet, command="solve")
    return 0 if report.converged else 2


def _cmd_scenario(args) -> int:
    cfg = _resolved_config(args)
    weather, surrogate = _load_model_files(cfg)
    spec = scenario_by_name(args.name, cfg.horizon_years)
    cfg = dataclasses.replace(cfg, scenario=spec)
    if spec.lema_fractions:
        return _run_sweep(cfg, weather, surrogate, spec, spec.lema_fractions, Path(args.out), args.quiet)
    _, report, _ = _solve_into(cfg, weather, surrogate, spec, Path(args.out), args.quiet, command="scenario")
    return 0 if report.converged else 2


def _cmd_lema_sweep(args) -> int:
    cfg = _resolved_config(args)
    weather, surrogate = _load_model_files(cfg)
    if args.fractions:
        fractions = tuple(float(f) for f in args.fractions.split(","))
    else:
        fractions = scenario_by_name("lema_sweep", cfg.horizon_years).lema_fractions
    spec = dataclasses.replace(cfg.scenario, lema_fractions=fractions)
    return _run_sweep(cfg, weather, surrogate, spec, fractions, Path(args.out), args.quiet)


def _cmd_report(args) -> int:
    payload = json.loads(Path(args.from_path).read_text())
    meta = payload.get("run")
    if not meta:
        raise ValueError(f"{args.from_path}: no run metadata; cannot re-execute")
    cfg = config_from_dict(meta["config"])
    weather = weather_from_rows(meta["weather"])
    surrogate = surrogate_from_rows(meta["surrogate"])
    spec = ScenarioSpec.from_dict(meta["scenario"])
    outdir = Path(args.out)
    command = meta["command"]

    if command == "lema-sweep":
        return _run_sweep(cfg, weather, surrogate, spec, tuple(meta["fractions"]), outdir, args.quiet)
    if command == "simulate":
        params = cfg.to_model_params(surrogate)
        inputs = apply_scenario(weather, params, dataclasses.replace(spec, lema_fractions=()))
        strategy = _strategy_from_rows(meta["strategy"])
        result = run_simulation(strategy, inputs)
        write_results(result, None, outdir, extra=meta)
        render_plots(result, None, outdir)
        return 0
    if command in ("solve", "scenario"):
        lema = _lema_from_dict(meta["lema_limits"]) if "lema_limits" in meta else None
        init = _strategy_from_rows(meta["init_strategy"]) if "init_strategy" in meta else None
        _, report, _ = _solve_into(
            cfg, weather, surrogate, spec, outdir, args.quiet, command=command, init=init, lema=lema
        )
        return 0 if report.converged else 2
    raise ValueError(f"unknown command {command!r} in report metadata")


if __name__ == "__main__":
    sys.exit(main())
