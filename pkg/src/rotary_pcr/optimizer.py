"""Protocol design search: shortest protocol that still reaches a yield floor.

A design is a rotation rate, a split of the revolution between the three
sectors and the two hold durations.  Designs are ranked by the objective

    total_time                                   if yield >= y_min
    PENALTY * (1 + shortfall)                    otherwise
    3 * PENALTY                                  if the design cannot run

where ``shortfall = 1 - log(yield) / log(y_min)`` lies in [0, 1].
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, RotaryPCRError
from .protocol import TraceGeometry, total_time
from .scenario import Scenario
from .simulation import simulate

PENALTY = 1.0e6
FEASIBILITY_RTOL = 1e-9


@dataclass(frozen=True, order=True)
class DesignPoint:
    rotation_rate: float
    f1: float
    f2: float
    initial_hold: float = 120.0
    final_hold: float = 240.0

    @property
    def f3(self):
        return 1.0 - self.f1 - self.f2

    @property
    def fractions(self):
        return (self.f1, self.f2, self.f3)

    @classmethod
    def from_schedule(cls, schedule):
        return cls(schedule.rotation_rate, schedule.trace.f1, schedule.trace.f2,
                   schedule.initial_hold, schedule.final_hold)


@dataclass(frozen=True)
class EvaluationRecord:
    design: DesignPoint
    total_time: float
    yield_: float
    feasible: bool
    y_min: float
    reason: str = ""
    final_temps: tuple = ()
    efficiencies: tuple = ()

    @property
    def runnable(self):
        return not self.reason

    @property
    def objective(self):
        if not self.runnable:
            return 3.0 * PENALTY
        if self.feasible:
            return self.total_time
        if self.y_min <= 1.0:
            return PENALTY
        shortfall = 1.0 - math.log(max(self.yield_, 1.0)) / math.log(self.y_min)
        return PENALTY * (1.0 + min(max(shortfall, 0.0), 1.0))


def is_feasible(yield_, y_min):
    return yield_ >= y_min * (1.0 - FEASIBILITY_RTOL)


def _check_design(design: DesignPoint, settings):
    if not settings.rate_min <= design.rotation_rate <= settings.rate_max:
        return (f"rate {design.rotation_rate:g} rpm outside "
                f"[{settings.rate_min:g}, {settings.rate_max:g}]")
    if min(design.fractions) <= 0:
        return f"fractions {design.fractions} leave the simplex"
    for hold in (design.initial_hold, design.final_hold):
        if not settings.hold_min <= hold <= settings.hold_max:
            return f"hold {hold:g} s outside [{settings.hold_min:g}, {settings.hold_max:g}]"
    return ""


def apply_design(scenario: Scenario, design: DesignPoint):
    sch = scenario.schedule
    trace = TraceGeometry(design.f1, design.f2, sch.trace.gap)
    schedule = replace(sch, rotation_rate=design.rotation_rate, trace=trace,
                       initial_hold=design.initial_hold, final_hold=design.final_hold)
    return replace(scenario, schedule=schedule)


def evaluate(design: DesignPoint, scenario: Scenario):
    """Simulate ``design`` and score it; failures become infeasible records."""
    y_min = scenario.optimizer.y_min
    reason = _check_design(design, scenario.optimizer)
    if reason:
        return EvaluationRecord(design, math.nan, 1.0, False, y_min, reason)
    try:
        sc = apply_design(scenario, design)
        result = simulate(sc, track_energy=False)
    except (RotaryPCRError, ArithmeticError, ValueError) as exc:
        return EvaluationRecord(design, math.nan, 1.0, False, y_min, str(exc) or type(exc).__name__)
    final = (*result.plates[-1], result.chamber[-1], result.sample[-1])
    return EvaluationRecord(
        design=design,
        total_time=total_time(sc.schedule),
        yield_=result.fold,
        feasible=is_feasible(result.fold, y_min),
        y_min=y_min,
        final_temps=tuple(float(x) for x in final),
        efficiencies=tuple(o.e_effective for o in result.outcomes),
    )


def lattice_fractions(divisions):
    """All ``(k1, k2, k3) / divisions`` with every ``k >= 1``."""
    out = []
    for k1 in range(1, divisions - 1):
        for k2 in range(1, divisions - k1):
            out.append((k1 / divisions, k2 / divisions))
    return out


def default_grid(settings):
    return [
        DesignPoint(rate, f1, f2, ih, fh)
        for rate, (f1, f2), ih, fh in itertools.product(
            settings.rates, lattice_fractions(settings.lattice),
            settings.initial_holds, settings.final_holds,
        )
    ]


@dataclass
class GridResult:
    best: EvaluationRecord | None
    records: list

    @property
    def feasible(self):
        return self.best is not None


def _rank(record):
    return (record.total_time, -record.yield_, record.design)


def _evaluate_star(args):
    return evaluate(*args)


def grid_search(scenario: Scenario, grid=None, workers=None):
    """Evaluate every grid point; best = fastest feasible design.

    Ties go to higher yield, then to the lexicographically smaller design.
    Records come back in grid order whatever the worker count.
    """
    grid = list(grid) if grid is not None else default_grid(scenario.optimizer)
    workers = workers or scenario.optimizer.workers
    if workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_evaluate_star, [(d, scenario) for d in grid]))
    else:
        records = [evaluate(d, scenario) for d in grid]
    feasible = [r for r in records if r.feasible]
    best = min(feasible, key=_rank) if feasible else None
    return GridResult(best, records)


class _BudgetSpent(Exception):
    pass


def refine(scenario: Scenario, start: DesignPoint, max_evals=None, fix_fractions=None,
           history=None):
    """Nelder-Mead polish of ``start`` over rate and the two free fractions.

    Holds stay at the start's values.  The best record ever evaluated is
    returned, so the result is never worse than ``start``.  Pass a list as
    ``history`` to collect every evaluation.
    """
    settings = scenario.optimizer
    max_evals = settings.max_evals if max_evals is None else max_evals
    fix = settings.fix_fractions if fix_fractions is None else fix_fractions

    first = evaluate(start, scenario)
    if not first.feasible:
        raise DomainError(f"refine needs a feasible start; {start} is not")
    seen = {}
    best = [first]
    log = history if history is not None else []
    log.append(first)

    def design_of(x):
        if fix:
            return replace(start, rotation_rate=float(x[0]))
        return replace(start, rotation_rate=float(x[0]), f1=float(x[1]), f2=float(x[2]))

    def objective(x):
        d = design_of(x)
        if d in seen:
            return seen[d].objective
        if len(seen) >= max_evals:
            raise _BudgetSpent
        rec = evaluate(d, scenario)
        seen[d] = rec
        log.append(rec)
        if rec.objective < best[0].objective:
            best[0] = rec
        return rec.objective

    if max_evals > 1:
        x0 = np.array([start.rotation_rate] if fix else [start.rotation_rate, start.f1, start.f2])
        simplex = [x0]
        for i in range(x0.size):
            x = x0.copy()
            x[i] += 0.05 * x0[i] if i == 0 else 0.02
            simplex.append(x)
        bounds = [(settings.rate_min, settings.rate_max)]
        if not fix:
            bounds += [(1e-6, 1.0), (1e-6, 1.0)]
        seen[start] = first
        try:
            minimize(objective, x0, method="Nelder-Mead", bounds=bounds,
                     options={"initial_simplex": np.array(simplex), "xatol": 1e-6,
                              "fatol": 1e-6, "maxfev": 10 * max_evals})
        except _BudgetSpent:
            pass
    return best[0]
