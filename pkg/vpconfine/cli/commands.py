"""Command-line entry points: solve, sweep, scale, trace, verify and design."""

import functools
import logging
import os

import click
import numpy as np

from vpconfine import __version__, create_app
from vpconfine.characteristics.interpolation import PotentialInterpolator
from vpconfine.characteristics.tracer import trace as trace_orbit
from vpconfine.cli.output import (
    node_header,
    node_rows,
    write_csv,
    write_history,
    write_json,
)
from vpconfine.cli.schemas import load_config
from vpconfine.cli.verification import run_verification
from vpconfine.equilibrium.design import design_confined, prescribe_charges
from vpconfine.equilibrium.family import sweep_lambda
from vpconfine.equilibrium.monotone import monotone_solve
from vpconfine.equilibrium.scaling import scale_solution
from vpconfine.errors import (
    ConfigurationError,
    ConsistencyError,
    DomainError,
    NumericalError,
)
from vpconfine.models import Direction

logger = logging.getLogger(__name__)

EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _out_dir(run_config, out):
    path = out or run_config.output
    os.makedirs(path, exist_ok=True)
    return path


def handle_errors(command):
    """Map solver exceptions to the documented exit codes."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return command(*args, **kwargs)
        except ConfigurationError as exc:
            for message in exc.errors:
                click.echo(message, err=True)
            ctx.exit(EXIT_CONFIG)
        except DomainError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_CONFIG)
        except (NumericalError, ConsistencyError) as exc:
            out = ctx.meta.get("vpconfine.out") or ctx.obj.config["OUTPUT_DIR"]
            path = write_history(os.path.join(out, "residual_history.csv"), exc.history)
            click.echo(f"error: {exc}", err=True)
            click.echo(f"residual history: {path}", err=True)
            ctx.exit(EXIT_NUMERICAL)

    return wrapper


def _prepare(ctx, config_path, out):
    run_config = load_config(config_path, ctx.obj.config)
    ctx.meta["vpconfine.out"] = _out_dir(run_config, out)
    return run_config, ctx.meta["vpconfine.out"]


def parse_lambdas(spec):
    """'a:b:step' -> inclusive list; 'x,y,z' -> explicit values."""
    if ":" in spec:
        try:
            start, stop, step = (float(part) for part in spec.split(":"))
        except ValueError as exc:
            raise ConfigurationError(f"--lambdas: cannot parse '{spec}'.") from exc
        if not step > 0 or stop < start:
            raise ConfigurationError("--lambdas: need start <= stop and step > 0.")
        count = int(round((stop - start) / step)) + 1
        values = [start + k * step for k in range(count)]
        values[-1] = min(values[-1], stop)
        return values
    try:
        return [float(part) for part in spec.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"--lambdas: cannot parse '{spec}'.") from exc


def parse_vector(spec, name):
    try:
        return np.array([float(part) for part in spec.split(",")])
    except ValueError as exc:
        raise ConfigurationError(f"--{name}: expected comma-separated numbers.") from exc


def write_solution(out, solution, run_config):
    phi_path = write_csv(os.path.join(out, "phi.csv"), node_header(solution.grid, "phi"),
                         node_rows(solution.potential))
    for label, density in solution.densities.items():
        write_csv(os.path.join(out, f"rho_{label}.csv"),
                  node_header(solution.grid, "rho"), node_rows(density))
    summary = solution.to_dict()
    summary["config"] = run_config.source
    summary["config_hash"] = run_config.config_hash
    summary["version"] = __version__
    summary["history"] = [record.to_dict() for record in solution.history]
    write_json(os.path.join(out, "summary.json"), summary)
    return phi_path


config_option = click.option("--config", "config_path", required=True,
                             type=click.Path(dir_okay=False), help="RunConfig JSON file.")
out_option = click.option("--out", default=None, help="Output directory.")


@click.group()
@click.option("--env", "config_name", default=None,
              help="Settings profile (development, production, testing).")
@click.version_option(__version__, prog_name="vpconfine")
@click.pass_context
def cli(ctx, config_name):
    """Confined stationary Vlasov-Poisson equilibria."""
    try:
        ctx.obj = create_app(config_name)
    except KeyError as exc:
        raise click.BadParameter(str(exc), param_hint="--env") from exc


@cli.command()
@config_option
@out_option
@click.option("--direction", type=click.Choice([d.value for d in Direction]),
              default=Direction.MAXIMAL.value, show_default=True)
@click.pass_context
@handle_errors
def solve(ctx, config_path, out, direction):
    """Monotone solve; writes phi.csv, rho_<species>.csv and summary.json."""
    run_config, out = _prepare(ctx, config_path, out)
    solution = monotone_solve(run_config.problem, direction)
    write_solution(out, solution, run_config)
    click.echo(f"converged in {solution.iterations} steps; results in {out}")


@cli.command()
@config_option
@out_option
@click.option("--lambdas", default="0:1:0.1", show_default=True,
              help="Range a:b:step or comma-separated values in [0, 1].")
@click.pass_context
@handle_errors
def sweep(ctx, config_path, out, lambdas):
    """Charge-ratio family sweep; writes sweep.csv."""
    run_config, out = _prepare(ctx, config_path, out)
    rows = sweep_lambda(run_config.problem, parse_lambdas(lambdas))
    path = write_csv(
        os.path.join(out, "sweep.csv"),
        ["lambda", "Q_plus", "Q_minus", "max_abs_phi"],
        [(row["lambda"], row["Q_plus"], row["Q_minus"], row["max_abs_phi"]) for row in rows],
    )
    click.echo(f"{len(rows)} sweep rows written to {path}")


@cli.command()
@config_option
@out_option
@click.option("--lambda", "lam", type=float, required=True, help="Field scaling factor > 0.")
@click.pass_context
@handle_errors
def scale(ctx, config_path, out, lam):
    """Scaling law check; writes scale_report.json."""
    run_config, out = _prepare(ctx, config_path, out)
    base = monotone_solve(run_config.problem)
    result = scale_solution(base, lam)
    path = write_json(os.path.join(out, "scale_report.json"), result.report)
    click.echo(f"scale report written to {path}")


@cli.command()
@config_option
@out_option
@click.option("--species", "label", default=None, help="Species label (default: first).")
@click.option("--x0", required=True, help="Start position, comma separated.")
@click.option("--v0", required=True, help="Start velocity, comma separated.")
@click.option("--tmax", type=float, default=10.0, show_default=True)
@click.option("--dt", type=float, default=1e-3, show_default=True)
@click.option("--analytic", is_flag=True, help="Trace with phi = 0 instead of a solved potential.")
@click.pass_context
@handle_errors
def trace(ctx, config_path, out, label, x0, v0, tmax, dt, analytic):
    """Characteristic orbit; writes trace.csv."""
    run_config, out = _prepare(ctx, config_path, out)
    problem = run_config.problem
    sp = problem.species_by_label(label) if label else problem.species[0]
    potential = None
    if not analytic:
        potential = PotentialInterpolator(monotone_solve(problem).potential, problem.boundary)
    result = trace_orbit(problem.geometry, problem.field, sp, potential,
                         parse_vector(x0, "x0"), parse_vector(v0, "v0"), tmax, dt)
    header = ["t", *result.coordinates, "E", "I", "E_drift", "I_drift"]
    e_drift = np.abs(result.energy - result.energy[0]) / (abs(result.energy[0]) + 1.0)
    i_drift = np.abs(result.integral - result.integral[0]) / (abs(result.integral[0]) + 1.0)
    rows = (
        (t, *state, e, i, de, di)
        for t, state, e, i, de, di in zip(result.times, result.states, result.energy,
                                          result.integral, e_drift, i_drift)
    )
    path = write_csv(os.path.join(out, "trace.csv"), header, rows)
    click.echo(f"trace ({result.exit_event}) written to {path}")


@cli.command()
@config_option
@out_option
@click.pass_context
@handle_errors
def verify(ctx, config_path, out):
    """Run every verification check; writes verify.json, exit 1 on failure."""
    run_config, out = _prepare(ctx, config_path, out)
    report = run_verification(run_config.problem)
    report["config_hash"] = run_config.config_hash
    path = write_json(os.path.join(out, "verify.json"), report)
    status = "passed" if report["passed"] else "FAILED"
    click.echo(f"verification {status}; report in {path}")
    if not report["passed"]:
        ctx.exit(EXIT_VERIFY_FAILED)


@cli.command()
@config_option
@out_option
@click.option("--ratio", type=float, default=2.0, show_default=True,
              help="Target charge ratio Q+/|Q-|.")
@click.option("--delta", type=float, default=None,
              help="Support radius around the magnetic axis.")
@click.option("--charges", default=None, help="Prescribed charges 'Q+,Q-'.")
@click.pass_context
@handle_errors
def design(ctx, config_path, out, ratio, delta, charges):
    """Confined toroidal design; writes design_report.json."""
    run_config, out = _prepare(ctx, config_path, out)
    if charges:
        q_plus, q_minus = parse_vector(charges, "charges")
        result = prescribe_charges(run_config.problem, q_plus, q_minus, delta=delta)
    else:
        result = design_confined(run_config.problem, delta=delta, ratio=ratio)
    write_solution(out, result.solution, run_config)
    path = write_json(os.path.join(out, "design_report.json"), result.report)
    click.echo(f"design report written to {path}")


def run(argv=None):
    """Invoke the CLI and return its exit code."""
    try:
        code = cli.main(args=argv, prog_name="vpconfine", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return code if isinstance(code, int) else 0
