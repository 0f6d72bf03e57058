"""Closed-loop simulation of the platform running a protocol.

Three PID loops regulate the plates every control period; between
updates the plant is integrated with RK4 at ``scenario.dt`` under
zero-order-hold power.  At the start of each integration step the
chamber is bound to the sector under its centre.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import ZONE_LABELS
from .kinetics import CycleOutcome, trajectory_yield, yield_to_mass
from .pid import PIDLoop, autotune_defaults, pid_step
from .protocol import GAP, breakpoints, locate, total_time
from .scenario import IDEAL, WARM, Scenario
from .thermal import (
    CHAMBER,
    SAMPLE,
    LinearModel,
    PlantConfig,
    Propagator,
    bind_chamber,
    build_platform_network,
    build_zone_network,
    plate_id,
    steady_state,
)

SETTLE_BAND = 0.5  # K


@dataclass
class SimulationResult:
    times: np.ndarray
    powers: np.ndarray      # (n, 3) W
    plates: np.ndarray      # (n, 3) degC
    chamber: np.ndarray
    sample: np.ndarray
    zones: np.ndarray       # Zone codes, GAP for dead arcs
    total_time: float
    outcomes: list[CycleOutcome] = field(default_factory=list)
    fold: float | None = None
    mass: dict | None = None
    energy: dict | None = None
    settle: dict | None = None
    gains: tuple | None = None
    coupling: str = "thermal"

    @property
    def zone_labels(self):
        return [("gap" if z == GAP else str(ZONE_LABELS[z])) for z in self.zones]


@functools.lru_cache(maxsize=32)
def tuned_gains(plant: PlantConfig):
    return tuple(autotune_defaults(build_zone_network(plant, z)) for z in range(3))


def scenario_gains(scenario: Scenario):
    return scenario.control.gains or tuned_gains(scenario.plant)


def steady_powers(scenario: Scenario):
    """Heater power that holds each plate at its setpoint, W."""
    ta = scenario.plant.ambient
    return np.array([
        g * (sp - ta) for g, sp in zip(scenario.plant.zone_losses(), scenario.control.setpoints)
    ])


def simulate(scenario: Scenario, duration=None, track_energy=True):
    """Run the protocol (or the first ``duration`` seconds of it).

    Past the end of the protocol the chamber stays on the extension plate.
    """
    if scenario.coupling == IDEAL:
        return _simulate_ideal(scenario, duration)

    sch = scenario.schedule
    t_total = total_time(sch)
    horizon = t_total if duration is None else float(duration)
    dt = scenario.dt
    per_period = scenario.steps_per_period
    per_sample = scenario.steps_per_sample
    n_rec = max(int(math.ceil(horizon / scenario.stride - 1e-9)), 0)
    n_steps = n_rec * per_sample

    step_times = np.arange(n_steps) * dt
    _, step_zones = locate(sch, np.minimum(step_times, t_total))

    plant = scenario.plant
    base = build_platform_network(plant, zone=0)
    models = {}
    fused = {}
    for code in (0, 1, 2, GAP):
        net = bind_chamber(base, None if code == GAP else code, plant)
        model = LinearModel(net)
        prop = Propagator(model, dt)
        n = len(model.ids)
        F = np.zeros((n + 1, n + 4))
        F[:n, :n] = prop.M
        F[:n, n:n + 3] = prop.D
        F[:n, n + 3] = prop.e
        F[n, :n] = prop.loss_T
        F[n, n:n + 3] = prop.loss_p
        F[n, n + 3] = prop.loss_0
        models[code] = model
        fused[code] = F
    model = models[0]
    n = len(model.ids)
    plate_idx = [model.index[plate_id(z)] for z in range(3)]
    cham_idx, samp_idx = model.index[CHAMBER], model.index[SAMPLE]

    gains = scenario_gains(scenario)
    p_ss = steady_powers(scenario)
    ctrl = scenario.control
    if scenario.preheat == WARM:
        warm = steady_state(base, p_ss)
        warm[CHAMBER] = warm[SAMPLE] = plant.ambient
        T0 = np.array([warm[i] for i in model.ids])
    else:
        T0 = model.state(base)
    loops = []
    for z in range(3):
        integral = 0.0
        if scenario.preheat == WARM and gains[z].ki > 0:
            integral = p_ss[z] / gains[z].ki
        loops.append(PIDLoop(
            gains[z], ctrl.setpoints[z], u_max=ctrl.u_max_factor * p_ss[z],
            sample_period=ctrl.period, integral=integral,
            prev_error=0.0 if scenario.preheat == WARM else None,
        ))

    rec_T = np.empty((n_rec + 1, n))
    rec_p = np.empty((n_rec + 1, 3))
    # augmented vector: [temperatures, powers, 1]
    v = np.empty(n + 4)
    v[:n] = T0
    v[n:n + 3] = 0.0
    v[n + 3] = 1.0
    loss = 0.0
    energy_in = 0.0
    for k in range(n_steps):
        if k % per_period == 0:
            for z in range(3):
                v[n + z], loops[z] = pid_step(loops[z], v[plate_idx[z]])
        if k % per_sample == 0:
            r = k // per_sample
            rec_T[r] = v[:n]
            rec_p[r] = v[n:n + 3]
        out = fused[step_zones[k]] @ v
        if track_energy:
            loss += out[n]
            energy_in += dt * (v[n] + v[n + 1] + v[n + 2])
        v[:n] = out[:n]
    rec_T[n_rec] = v[:n]
    rec_p[n_rec] = v[n:n + 3]

    times = np.arange(n_rec + 1) * scenario.stride
    _, zones = locate(sch, np.minimum(times, t_total))
    result = SimulationResult(
        times=times,
        powers=rec_p,
        plates=rec_T[:, plate_idx],
        chamber=rec_T[:, cham_idx],
        sample=rec_T[:, samp_idx],
        zones=zones,
        total_time=t_total,
        gains=gains,
        coupling=scenario.coupling,
    )
    if track_energy:
        stored = float(model.capacity @ (v[:n] - T0))
        result.energy = {
            "stored_J": stored,
            "input_J": energy_in,
            "loss_J": loss,
            "residual_J": stored - (energy_in - loss),
        }
    result.settle = settle_diagnostics(result, ctrl.setpoints)
    if horizon >= t_total - 1e-9:
        _attach_yield(result, scenario, times, result.sample)
    return result


def _simulate_ideal(scenario: Scenario, duration=None):
    """Sample temperature jumps to the occupied sector's setpoint."""
    sch = scenario.schedule
    t_total = total_time(sch)
    horizon = t_total if duration is None else float(duration)
    sp = np.asarray(scenario.control.setpoints, dtype=float)
    ta = scenario.plant.ambient

    def temps_for(zone_codes):
        return np.where(zone_codes == GAP, ta, sp[np.clip(zone_codes, 0, 2)])

    n_rec = max(int(math.ceil(horizon / scenario.stride - 1e-9)), 0)
    times = np.arange(n_rec + 1) * scenario.stride
    _, zones = locate(sch, np.minimum(times, t_total))
    sample = temps_for(zones)
    result = SimulationResult(
        times=times,
        powers=np.tile(steady_powers(scenario), (times.size, 1)),
        plates=np.tile(sp, (times.size, 1)),
        chamber=sample.copy(),
        sample=sample,
        zones=zones,
        total_time=t_total,
        coupling=IDEAL,
    )
    if horizon >= t_total - 1e-9:
        # exact piecewise-constant trajectory on sector boundaries
        bp = breakpoints(sch)
        _, bz = locate(sch, bp)
        _attach_yield(result, scenario, bp, temps_for(bz))
    return result


def _attach_yield(result, scenario, times, sample):
    outcomes, fold = trajectory_yield(
        times, sample, scenario.schedule, scenario.efficiency, scenario.control.setpoints
    )
    result.outcomes = outcomes
    result.fold = fold
    result.mass = yield_to_mass(fold, scenario.reaction)


def settle_diagnostics(result: SimulationResult, setpoints, band=SETTLE_BAND):
    """Per zone: settle time into ``band`` and worst error afterwards."""
    out = {}
    for z in range(3):
        err = result.plates[:, z] - setpoints[z]
        outside = np.nonzero(np.abs(err) > band)[0]
        if outside.size == 0:
            settle_t = 0.0
        elif outside[-1] == err.size - 1:
            settle_t = math.inf
        else:
            settle_t = float(result.times[outside[-1] + 1])
        after = err[result.times >= settle_t] if math.isfinite(settle_t) else err[-1:]
        out[ZONE_LABELS[z]] = {
            "settle_time_s": settle_t,
            "max_abs_error_after_settle_K": float(np.max(np.abs(after))),
            "overshoot_K": float(max(np.max(err), 0.0)),
        }
    return out
