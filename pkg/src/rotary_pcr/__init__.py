"""Digital twin of a rotary three-zone PCR platform.

Thermal plant, PID regulation, rotary protocol timing, amplification
yield, etched-chamber geometry and protocol optimization.
"""

from .errors import (
    CalibrationError,
    ConfigurationError,
    CoverageError,
    DomainError,
    GeometryError,
    RotaryPCRError,
    SelfTerminatedEtchError,
    SignalError,
    SingularSystemError,
    StepSizeError,
    TuningError,
)
from .geometry import EtchSpec, bottom_dims, cavity_volume, chip_heat_capacity
from .kinetics import (
    EfficiencyModel,
    ReactionSpec,
    ideal_yield,
    nominal_yield,
    trajectory_yield,
    yield_to_mass,
)
from .optimizer import DesignPoint, evaluate, grid_search, refine
from .pid import PIDGains, PIDLoop, autotune_defaults, pid_step
from .protocol import (
    ProtocolSchedule,
    TraceGeometry,
    Zone,
    cycle_boundaries,
    residence_times,
    total_time,
    zone_at,
)
from .scenario import ControlConfig, OptimizerSettings, Scenario
from .simulation import SimulationResult, simulate
from .thermal import (
    PlantConfig,
    ThermalNetwork,
    build_platform_network,
    calibrate_zone,
    steady_state,
    step,
)

__version__ = "0.1.0"
