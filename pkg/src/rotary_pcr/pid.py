"""Discrete PID regulation of heater power.

One loop per zone reads the thermocouple (the plate temperature) once per
sample period and holds the commanded power until the next update.  The
derivative acts on the error through a plain first difference; the plant
is smooth enough that no derivative filter is needed.

Anti-windup is conditional integration: the integral is frozen whenever
the output is saturated in the direction the error pushes it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, SignalError, SingularSystemError, TuningError
from .thermal import INTERNAL, LinearModel, Propagator, ThermalNetwork, steady_state


@dataclass(frozen=True)
class PIDGains:
    kp: float  # W/K
    ki: float  # W/(K s)
    kd: float  # W s/K

    def __post_init__(self):
        if min(self.kp, self.ki, self.kd) < 0 or not all(
            math.isfinite(g) for g in (self.kp, self.ki, self.kd)
        ):
            raise ConfigurationError(f"PID gains must be finite and >= 0, got {self}")


@dataclass(frozen=True)
class PIDLoop:
    gains: PIDGains
    setpoint: float
    u_max: float
    u_min: float = 0.0
    sample_period: float = 0.1
    integral: float = 0.0
    prev_error: float | None = None

    def __post_init__(self):
        if not self.sample_period > 0:
            raise ConfigurationError("sample period must be > 0")
        if not 0 <= self.u_min <= self.u_max:
            raise ConfigurationError(
                f"need 0 <= u_min <= u_max, got [{self.u_min}, {self.u_max}]"
            )


def pid_step(loop: PIDLoop, measured: float):
    """One controller update; returns ``(power, new_loop)``."""
    if not math.isfinite(measured):
        raise SignalError(f"non-finite measurement {measured!r}")
    g = loop.gains
    ts = loop.sample_period
    e = loop.setpoint - measured
    d = 0.0 if loop.prev_error is None else (e - loop.prev_error) / ts

    integral = loop.integral + e * ts
    u = g.kp * e + g.ki * integral + g.kd * d
    if (u > loop.u_max and e > 0) or (u < loop.u_min and e < 0):
        integral = loop.integral
        u = g.kp * e + g.ki * integral + g.kd * d
    u = min(max(u, loop.u_min), loop.u_max)
    return u, replace(loop, integral=integral, prev_error=e)


def step_response(network: ThermalNetwork, sensor: str, step_power=1.0,
                  dt=None, horizon=None):
    """Open-loop sensor response to a power step on the first source.

    Starts from the unpowered steady state.  Returns ``(times, rise)``
    where ``rise`` is the sensor temperature minus its initial value.
    """
    model = LinearModel(network)
    dt = dt or min(0.01, model.stability_limit())
    base = steady_state(network, np.zeros(len(network.sources)))
    T0 = np.array([base[i] for i in model.ids])
    powers = np.zeros(len(network.sources))
    powers[0] = step_power
    if horizon is None:
        loss = model.loss_weights.sum()
        horizon = 8.0 * model.capacity.sum() / loss
    prop = Propagator(model, dt)
    chunk = max(1, int(round(horizon / dt / 4000)))
    n_out = int(math.ceil(horizon / (dt * chunk)))
    # exact RK4 map for `chunk` steps
    n = len(T0)
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = prop.M
    aug[:n, n] = prop.D @ powers + prop.e
    aug[n, n] = 1.0
    jump = np.linalg.matrix_power(aug, chunk)
    k = model.index[sensor]
    out = np.empty(n_out + 1)
    x = np.append(T0, 1.0)
    out[0] = x[k]
    for i in range(n_out):
        x = jump @ x
        out[i + 1] = x[k]
    times = np.arange(n_out + 1) * dt * chunk
    return times, out - out[0]


def fit_fopdt(times, rise):
    """First-order-plus-dead-time fit by the two-point (28.3 %, 63.2 %) method.

    Returns ``(gain_rise, tau, dead_time)`` with the gain expressed as the
    final rise of the response.
    """
    final = float(rise[-1])
    t28 = float(np.interp(0.283 * final, rise, times))
    t63 = float(np.interp(0.632 * final, rise, times))
    tau = 1.5 * (t63 - t28)
    theta = max(t63 - tau, 0.0)
    return final, tau, theta


def autotune_defaults(zone_plant: ThermalNetwork, sensor: str | None = None,
                      closed_loop_ratio=0.1):
    """PID gains for one zone from an open-loop step test.

    The step response is reduced to a first-order-plus-dead-time model
    ``K exp(-theta s) / (tau s + 1)`` and tuned with the IMC-PID rule::

        kp = (tau + theta/2) / (K (lam + theta/2))
        Ti = tau + theta/2,   Td = tau theta / (2 tau + theta)
        ki = kp / Ti,         kd = kp Td

    with closed-loop time constant ``lam = max(closed_loop_ratio * tau, theta)``.
    ``sensor`` defaults to the largest internal node other than the heated one.
    """
    if not zone_plant.sources:
        raise TuningError("plant has no heat source to actuate")
    heated = zone_plant.sources[0].node
    if sensor is None:
        candidates = [
            n for n in zone_plant.nodes if n.kind == INTERNAL and n.id != heated
        ] or [zone_plant.node(heated)]
        sensor = max(candidates, key=lambda n: n.heat_capacity).id
    try:
        steady_state(zone_plant, np.zeros(len(zone_plant.sources)))
    except SingularSystemError as exc:
        raise TuningError(f"plant has no loss path: {exc}") from exc

    times, rise = step_response(zone_plant, sensor)
    K, tau, theta = fit_fopdt(times, rise)
    if not (K > 0 and tau > 0):
        raise TuningError("step response does not rise; sensor is not driven by the heater")
    lam = max(closed_loop_ratio * tau, theta)
    kp = (tau + theta / 2) / (K * (lam + theta / 2))
    ti = tau + theta / 2
    td = tau * theta / (2 * tau + theta)
    return PIDGains(kp=kp, ki=kp / ti, kd=kp * td)
