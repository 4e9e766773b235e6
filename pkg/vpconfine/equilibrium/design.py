"""Confined toroidal equilibria with prescribed support and charges."""

import logging
import math
from dataclasses import dataclass, replace

from vpconfine.density.rho import barrier_velocity_radius, spatial_radius
from vpconfine.equilibrium.barriers import constant_barriers
from vpconfine.equilibrium.family import charged_pair, family_problem, family_solve
from vpconfine.equilibrium.monotone import grid_for
from vpconfine.equilibrium.scaling import scale_solution
from vpconfine.errors import ConfigurationError, NumericalError

logger = logging.getLogger(__name__)

# E0 is chosen this fraction below the largest admissible value
ENERGY_MARGIN = 0.9
RATIO_TOL = 1e-4
MAX_BRACKET_STEPS = 60


@dataclass(frozen=True)
class DesignResult:
    problem: object
    solution: object
    lam: float
    report: dict


def _check_template(problem):
    errors = []
    if problem.geometry.kind != "toroidal":
        errors.append("confinement design needs a toroidal geometry.")
    if problem.family is None:
        errors.append("confinement design needs a family block.")
    if errors:
        raise ConfigurationError(errors)


def default_delta(problem):
    """Half the distance from the magnetic axis to the cross-section boundary."""
    r0, z0 = problem.field.center()
    distance = problem.geometry.boundary_distance(r0, z0)
    if not distance > 0:
        raise ConfigurationError("the magnetic axis must lie inside the cross-section.")
    return 0.5 * distance


def design_cutoff(problem, delta):
    """Base cutoff with E0, I0 small enough that S0 <= delta for both species.

    I0 = b delta^2 / 4 uses half of the admissible spread; the velocity radius
    then has to satisfy R0 <= b |q| delta^2 / (4 c m (delta + r0)).
    """
    field = problem.field
    plus, minus = charged_pair(problem)
    b, c, r0 = field.b, field.c_light, abs(field.r0)
    spread = plus.charge / plus.mass + abs(minus.charge) / minus.mass
    energies = []
    for sp in (plus, minus):
        q = abs(sp.charge)
        radius = b * q * delta ** 2 / (4.0 * c * sp.mass * (delta + r0))
        energies.append(radius ** 2 * sp.mass / (2.0 * q * spread))
    E0 = ENERGY_MARGIN * min(energies)
    I0 = 0.25 * b * delta ** 2
    base = problem.family
    return replace(base, E0=E0, I0=I0, wE=E0 * base.wE / base.E0,
                   wI=I0 * base.wI / base.I0)


def _ratio_gap(solution, plus, minus, ratio):
    return solution.charges[plus.label] - ratio * abs(solution.charges[minus.label])


def _achieved_ratio(solution, plus, minus):
    negative = abs(solution.charges[minus.label])
    return solution.charges[plus.label] / negative if negative > 0 else math.inf


def _bracket(problem, plus, minus, ratio, grid):
    """Illinois regula falsi for Q+(lambda) = ratio |Q-(lambda)| on [0, 1]."""
    lo, hi = 0.0, 1.0
    sol_lo = family_solve(problem, lo, grid=grid)
    sol_hi = family_solve(problem, hi, grid=grid)
    f_lo = _ratio_gap(sol_lo, plus, minus, ratio)
    f_hi = _ratio_gap(sol_hi, plus, minus, ratio)
    if not (f_lo < 0 < f_hi):
        raise NumericalError(f"charge ratio {ratio} is not bracketed on [0, 1].")
    side = 0
    best = None
    for step in range(1, MAX_BRACKET_STEPS + 1):
        lam = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
        solution = family_solve(problem, lam, grid=grid)
        f_mid = _ratio_gap(solution, plus, minus, ratio)
        achieved = _achieved_ratio(solution, plus, minus)
        best = (lam, solution)
        logger.debug(f"regula falsi step {step}: lambda={lam:.12f} ratio={achieved:.9f}")
        if abs(achieved - ratio) <= RATIO_TOL * ratio:
            return best
        if f_mid < 0:
            lo, f_lo = lam, f_mid
            if side == -1:
                f_hi *= 0.5
            side = -1
        else:
            hi, f_hi = lam, f_mid
            if side == 1:
                f_lo *= 0.5
            side = 1
        if hi - lo < 1e-14:
            logger.warning(f"lambda bracket collapsed at {lam}; ratio {achieved}")
            return best
    raise NumericalError(
        f"charge ratio {ratio} not reached in {MAX_BRACKET_STEPS} regula falsi steps."
    )


def design_confined(template, *, delta=None, ratio=2.0, grid=None):
    """Family equilibrium supported within delta of the magnetic axis with Q+/|Q-| = ratio."""
    _check_template(template)
    if not ratio > 0:
        raise ConfigurationError(f"charge ratio must be positive, got {ratio}.")
    delta = default_delta(template) if delta is None else float(delta)
    if not delta > 0:
        raise ConfigurationError(f"support radius delta must be positive, got {delta}.")
    plus, minus = charged_pair(template)
    problem = replace(template, family=design_cutoff(template, delta))
    grid = grid or grid_for(problem)
    lam, solution = _bracket(problem, plus, minus, ratio, grid)

    report = {
        "delta": delta,
        "center": list(problem.field.center()),
        "E0": problem.family.E0,
        "I0": problem.family.I0,
        "lambda": lam,
        "target_ratio": ratio,
        "achieved_ratio": _achieved_ratio(solution, plus, minus),
        "charges": dict(solution.charges),
        "species": {},
        "grid_spacing": grid.spacing,
    }
    barriers = constant_barriers(family_problem(problem, lam), grid)
    support_ok = True
    for sp in solution.problem.species:
        R0 = barrier_velocity_radius(sp, barriers)
        S0 = spatial_radius(sp, problem.field, R0, geometry=problem.geometry)
        measured = solution.radii[sp.label].measured_support
        within = S0 <= delta * (1.0 + 1e-12) and measured <= S0 + grid.spacing
        support_ok = support_ok and within
        report["species"][sp.label] = {"R0": R0, "S0": S0, "measured_support": measured,
                                       "within_target": within}
    report["support_ok"] = support_ok
    logger.info(f"designed lambda={lam:.9f} with ratio {report['achieved_ratio']:.9f}")
    return DesignResult(problem=problem, solution=solution, lam=lam, report=report)


def prescribe_charges(template, q_plus, q_minus, *, delta=None, grid=None):
    """Design for the ratio q_plus/|q_minus|, then rescale b so that Q+ = q_plus."""
    if not (q_plus > 0 > q_minus):
        raise ConfigurationError("prescribed charges need Q+ > 0 > Q-.")
    design = design_confined(template, delta=delta, ratio=q_plus / abs(q_minus), grid=grid)
    plus, _ = charged_pair(template)
    lam_b = math.sqrt(q_plus / design.solution.charges[plus.label])
    scaled = scale_solution(design.solution, lam_b)
    report = dict(design.report)
    report["field_scale"] = lam_b
    report["prescribed"] = {"Q_plus": q_plus, "Q_minus": q_minus}
    report["scaled_charges"] = dict(scaled.solution.charges)
    report["scaling"] = scaled.report
    return DesignResult(problem=scaled.problem, solution=scaled.solution, lam=design.lam,
                        report=report)
