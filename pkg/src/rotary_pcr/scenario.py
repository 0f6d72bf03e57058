"""Scenario: everything one simulation or optimization run needs."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigurationError
from .kinetics import EfficiencyModel, ReactionSpec, nominal_yield
from .pid import PIDGains
from .protocol import ProtocolSchedule
from .thermal import PlantConfig

THERMAL = "thermal"
IDEAL = "ideal"  # sample equilibrates instantly with the occupied sector

COLD = "ambient"
WARM = "steady"


@dataclass(frozen=True)
class ControlConfig:
    setpoints: tuple[float, float, float] = (95.0, 55.0, 72.0)
    period: float = 0.1
    gains: tuple[PIDGains, PIDGains, PIDGains] | None = None  # None: autotune
    u_max_factor: float = 2.0

    def __post_init__(self):
        if len(self.setpoints) != 3:
            raise ConfigurationError("need three setpoints")
        if not self.period > 0:
            raise ConfigurationError("control period must be > 0")
        if not self.u_max_factor >= 1:
            raise ConfigurationError("u_max_factor must be >= 1")
        if self.gains is not None and len(self.gains) != 3:
            raise ConfigurationError("need one gain set per zone")


@dataclass(frozen=True)
class OptimizerSettings:
    y_min: float = 1.0e6
    rate_min: float = 0.1
    rate_max: float = 10.0
    hold_min: float = 0.0
    hold_max: float = 600.0
    rates: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 4.0)
    lattice: int = 12
    initial_holds: tuple[float, ...] = (120.0,)
    final_holds: tuple[float, ...] = (240.0,)
    max_evals: int = 500
    fix_fractions: bool = False
    workers: int = 1

    def __post_init__(self):
        if not 0 < self.rate_min <= self.rate_max:
            raise ConfigurationError("need 0 < rate_min <= rate_max")
        if not 0 <= self.hold_min <= self.hold_max:
            raise ConfigurationError("need 0 <= hold_min <= hold_max")
        if self.lattice < 3:
            raise ConfigurationError("fraction lattice needs at least 3 divisions")
        if self.max_evals < 1:
            raise ConfigurationError("max_evals must be >= 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")


@dataclass(frozen=True)
class Scenario:
    plant: PlantConfig = field(default_factory=PlantConfig)
    control: ControlConfig = ControlConfig()
    schedule: ProtocolSchedule = ProtocolSchedule()
    efficiency: EfficiencyModel = EfficiencyModel()
    reaction: ReactionSpec = ReactionSpec()
    optimizer: OptimizerSettings = OptimizerSettings()
    coupling: str = THERMAL
    preheat: str = WARM
    dt: float = 0.01
    stride: float = 0.1

    def __post_init__(self):
        if self.coupling not in (THERMAL, IDEAL):
            raise ConfigurationError(f"unknown coupling mode {self.coupling!r}")
        if self.preheat not in (COLD, WARM):
            raise ConfigurationError(f"unknown preheat mode {self.preheat!r}")
        if not self.dt > 0:
            raise ConfigurationError("dt must be > 0")
        _check_multiple(self.control.period, self.dt, "control period", "dt")
        _check_multiple(self.stride, self.dt, "sampling stride", "dt")
        _check_multiple(self.control.period, self.stride, "control period", "sampling stride")
        for sp in self.control.setpoints:
            if not sp > self.plant.ambient:
                raise ConfigurationError(f"setpoint {sp} must exceed ambient {self.plant.ambient}")

    @property
    def steps_per_period(self):
        return round(self.control.period / self.dt)

    @property
    def steps_per_sample(self):
        return round(self.stride / self.dt)

    def nominal_target(self):
        return nominal_yield(self.schedule.cycles, self.efficiency.e_nominal)


def _check_multiple(big, small, big_name, small_name):
    ratio = big / small
    if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
        raise ConfigurationError(f"{small_name} ({small}) must divide {big_name} ({big})")
