"""Command-line front end.

Verbs: fit, analyze, simulate, optimize, compare. All accept --config
(INI or JSON scenario file) plus overrides; outputs land in --out-dir.

Exit codes: 0 success, 2 validation error, 3 numerical failure
(blow-up or non-convergence), 4 I/O error.
"""

from __future__ import annotations

import json
import math
import sys
from importlib import resources
from pathlib import Path

import click
import numpy as np

from . import calibrate, config as config_mod, equilibria, metrics, stability, svgplot
from .control import SweepResult, forward_backward_sweep
from .errors import BlowUpError, EradoptError, ParameterError, UnsupportedModelError
from .integrate import ControlSchedule, integrate_forward, trajectory_to_csv
from .params import LifeParams, ModelId, ModelSpec

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


class CliError(click.ClickException):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.exit_code = code


def _load_scenario(config_path, dt, epsilon, model=None):
    try:
        return config_mod.load_scenario(
            config_path, dt_override=dt, epsilon_override=epsilon, model_override=model
        )
    except ParameterError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from exc


def _out_dir(ctx) -> Path:
    out = Path(ctx.obj["out_dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {out}: {exc}", EXIT_IO) from exc
    return out


@click.group()
@click.option("--out-dir", default=".", show_default=True, help="Directory for output files.")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for randomized steps.")
@click.pass_context
def main(ctx, out_dir, seed):
    """Population-control analysis: fit, analyze, simulate, optimize, compare."""
    ctx.ensure_object(dict)
    ctx.obj["out_dir"] = out_dir
    ctx.obj["seed"] = seed


@main.command()
@click.argument("data_path")
@click.option("--guess", nargs=3, type=float, default=(0.004, 0.05, 300.0), show_default=True,
              help="Initial (beta, delta, K).")
@click.option("--out", default="fit_result.json", show_default=True, help="Result file name.")
@click.pass_context
def fit(ctx, data_path, guess, out):
    """Fit (beta, delta, K) to a CSV series (`t,count` or `t,f,m`).

    DATA_PATH may be `bundled` or `bundled-noisy` for the sample datasets.
    """
    if data_path in ("bundled", "bundled-noisy"):
        name = "mesocosm_synthetic.csv" if data_path == "bundled" else "mesocosm_synthetic_noisy.csv"
        data_path = str(resources.files("eradopt.data").joinpath(name))
    try:
        data = calibrate.ObservationSeries.from_csv(data_path)
    except ParameterError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from exc
    try:
        initial = LifeParams(beta=guess[0], delta=guess[1], cap_k=guess[2])
        result = calibrate.fit_life_params(data, initial)
    except ParameterError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc
    except EradoptError as exc:
        raise CliError(str(exc), EXIT_NUMERICAL) from exc
    path = _out_dir(ctx) / out
    result.to_json(path)
    p = result.params
    click.echo(f"fitted: beta={p.beta:.6g} delta={p.delta:.6g} cap_k={p.cap_k:.6g}")
    click.echo(f"sse={result.sse:.6g} evals={result.n_evals} source={result.source}")
    for w in result.warnings:
        click.echo(f"warning: {w}")
    click.echo(f"wrote {path}")


@main.command()
@click.option("--config", "config_path", default=None, help="Scenario file (INI or JSON).")
@click.option("--out", default="analysis.json", show_default=True)
@click.pass_context
def analyze(ctx, config_path, out):
    """Enumerate equilibria, classify stability, check global extinction."""
    scenario = _load_scenario(config_path, None, None)
    spec, params = scenario.spec, scenario.params
    try:
        report = equilibria.equilibria_report(spec, params)
    except EradoptError as exc:
        raise CliError(str(exc), EXIT_NUMERICAL) from exc
    doc = report.as_dict()
    if spec.model_id.is_two_dim:
        cond = stability.global_extinction_condition(spec, params)
        doc["global_extinction"] = cond.as_dict()
    else:
        doc["global_extinction"] = None

    path = _out_dir(ctx) / out
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")

    click.echo(f"model {spec.model_id.value}: {len(report.equilibria)} equilibria")
    for e in report.equilibria:
        f, m, s = e.state.as_tuple()
        click.echo(f"  ({f:.6g}, {m:.6g}, {s:.6g})  {e.classification.value}  [{e.provenance}]")
    for w in report.warnings:
        click.echo(f"warning: {w}")
    if doc["global_extinction"] is not None:
        g = doc["global_extinction"]
        verdict = "satisfied" if g["satisfied"] else "not satisfied"
        click.echo(
            f"global extinction condition: {verdict} "
            f"(beta*K={g['beta_k']:.6g} vs threshold {g['threshold']:.6g})"
        )
    click.echo(f"wrote {path}")


@main.command()
@click.option("--config", "config_path", default=None, help="Scenario file (INI or JSON).")
@click.option("--dt", type=float, default=None, help="Override the grid step (months).")
@click.option("--plot", is_flag=True, help="Also emit an SVG density plot.")
@click.option("--out", default="trajectory.csv", show_default=True)
@click.pass_context
def simulate(ctx, config_path, dt, plot, out):
    """Forward-integrate the model under its constant controls."""
    scenario = _load_scenario(config_path, dt, None)
    try:
        traj = integrate_forward(
            scenario.spec, scenario.params, scenario.init, scenario.grid
        )
    except BlowUpError as exc:
        raise CliError(f"simulation diverged: {exc}", EXIT_NUMERICAL) from exc
    except EradoptError as exc:
        raise CliError(str(exc), EXIT_NUMERICAL) from exc
    outdir = _out_dir(ctx)
    path = outdir / out
    schedule = ControlSchedule.constant(scenario.grid, scenario.spec)
    trajectory_to_csv(traj, path, schedule)
    final = traj.final_state()
    click.echo(
        f"simulated {scenario.spec.model_id.value} to t={scenario.grid.t_end:g}: "
        f"final (f, m, s) = ({final.f:.6g}, {final.m:.6g}, {final.s:.6g})"
    )
    click.echo(f"wrote {path}")
    if plot:
        svg = path.with_suffix(".svg")
        series = {"female": traj.f, "male": traj.m}
        if scenario.spec.model_id.is_tyc:
            series["supermale"] = traj.s
        svgplot.line_plot(
            svg, traj.grid.times(), series,
            title=f"{scenario.spec.model_id.value} densities", ylabel="density",
        )
        click.echo(f"wrote {svg}")


def _run_sweep(scenario) -> SweepResult:
    return forward_backward_sweep(
        scenario.spec, scenario.params, scenario.init, scenario.grid, scenario.sweep
    )


@main.command()
@click.option("--config", "config_path", default=None, help="Scenario file (INI or JSON).")
@click.option("--dt", type=float, default=None, help="Override the grid step (months).")
@click.option("--plot", is_flag=True, help="Also emit SVG density/control plots.")
@click.option("--out-prefix", default="optimal", show_default=True)
@click.pass_context
def optimize(ctx, config_path, dt, plot, out_prefix):
    """Solve the optimal-control problem by forward-backward sweeps."""
    scenario = _load_scenario(config_path, dt, None)
    try:
        result = _run_sweep(scenario)
    except BlowUpError as exc:
        raise CliError(f"sweep diverged: {exc}", EXIT_NUMERICAL) from exc
    outdir = _out_dir(ctx)
    jpath = outdir / f"{out_prefix}.json"
    cpath = outdir / f"{out_prefix}.csv"
    result.to_json(jpath)
    result.to_csv(cpath)
    click.echo(
        f"{scenario.spec.model_id.value}: J={result.objective:.6g} "
        f"cost_excluding_controls={result.cost_excluding_controls:.6g} "
        f"iterations={result.iterations} converged={result.converged}"
    )
    click.echo(f"wrote {jpath}")
    click.echo(f"wrote {cpath}")
    if plot:
        svg = outdir / f"{out_prefix}.svg"
        series = {"female": result.states.f, "male": result.states.m}
        for name, vals in zip(result.schedule.names, result.schedule.values):
            series[name] = vals
        svgplot.line_plot(
            svg, result.states.grid.times(), series,
            title=f"{scenario.spec.model_id.value} optimal run", ylabel="density / control",
        )
        click.echo(f"wrote {svg}")
    if not result.converged:
        click.echo(
            f"non-convergence: residual={result.residual:.3g} after "
            f"{result.iterations} iterations", err=True,
        )
        sys.exit(EXIT_NUMERICAL)


def _parse_models(text: str) -> list[ModelId]:
    chosen: list[ModelId] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part and part[0].isdigit():
            a, b = part.split("-", 1)
            for k in range(int(a), int(b) + 1):
                chosen.append(ModelId.parse(str(k)))
        else:
            chosen.append(ModelId.parse(part))
    if not chosen:
        raise ParameterError("no models selected")
    return chosen


@main.command()
@click.option("--config", "config_path", default=None, help="Scenario file (INI or JSON).")
@click.option("--models", default=None, help="Comma list / ranges, e.g. 'tyc0,fhms1' or '1-6'.")
@click.option("--all-models", is_flag=True, help="Compare all seven models.")
@click.option("--dt", type=float, default=None, help="Override the grid step (months).")
@click.option("--epsilon", type=float, default=None, help="Eradication threshold.")
@click.option("--out-prefix", default="comparison", show_default=True)
@click.pass_context
def compare(ctx, config_path, models, all_models, dt, epsilon, out_prefix):
    """Run sweeps for several models and tabulate the comparison."""
    if all_models:
        chosen = list(ModelId)
    elif models:
        try:
            chosen = _parse_models(models)
        except (ParameterError, ValueError) as exc:
            raise CliError(f"--models: {exc}", EXIT_VALIDATION) from exc
    else:
        raise CliError("give --models or --all-models", EXIT_VALIDATION)

    results = []
    failures = []
    for mid in chosen:
        scenario = _load_scenario(config_path, dt, epsilon, model=mid.value)
        try:
            results.append(_run_sweep(scenario))
        except EradoptError as exc:
            failures.append((mid, str(exc)))
            click.echo(f"{mid.value}: failed ({exc})", err=True)
    if not results:
        raise CliError("every scenario failed", EXIT_NUMERICAL)
    eps = epsilon if epsilon is not None else _load_scenario(config_path, dt, epsilon).epsilon
    comparison = metrics.compare_strategies(results, eps)
    outdir = _out_dir(ctx)
    jpath = outdir / f"{out_prefix}.json"
    tpath = outdir / f"{out_prefix}.txt"
    cpath = outdir / f"{out_prefix}.csv"
    doc = comparison.as_dict()
    doc["partial_results"] = bool(failures)
    doc["failures"] = [{"model_id": m.value, "error": e} for m, e in failures]
    with open(jpath, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    table = metrics.render_table(comparison)
    with open(tpath, "w") as fh:
        fh.write(table + "\n")
    comparison.to_csv(cpath)
    click.echo(table)
    click.echo(f"wrote {jpath}")
    click.echo(f"wrote {tpath}")
    click.echo(f"wrote {cpath}")
    if failures:
        sys.exit(EXIT_NUMERICAL)


if __name__ == "__main__":
    main()
