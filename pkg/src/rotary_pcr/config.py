"""Scenario configuration files.

Configs are INI-style: ``[section]`` headers and ``key = value`` lines.
Numbers are parsed as exact decimals, lists are comma separated, and any
key left out takes the default listed in :data:`SCHEMA`.  The defaults
reproduce the reference run: 2 min denaturation hold, 30 revolutions at
1 rpm over a 1:1:2 trace, 4 min final hold.  Unknown sections or keys are
errors.
"""

from __future__ import annotations

import configparser
import io
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

from .errors import ConfigurationError
from .geometry import DESIGN_VOLUME_UL, EtchSpec, chip_heat_capacity
from .kinetics import EfficiencyModel, ReactionSpec
from .pid import PIDGains
from .protocol import ProtocolSchedule, TraceGeometry
from .scenario import ControlConfig, OptimizerSettings, Scenario
from .thermal import PlantConfig, sample_heat_capacity

NUM, INT, BOOL, STR, NUMS = "num", "int", "bool", "str", "nums"

# section -> key -> (kind, default text, extra)
SCHEMA = {
    "plant": {
        "ambient": (NUM, "25", None),
        "plate_length_mm": (NUM, "30", None),
        "plate_width_mm": (NUM, "20", None),
        "plate_thickness_mm": (NUM, "2", None),
        "calibration_powers": (NUMS, "4.51, 1.35, 3.74", 3),
        "calibration_temps": (NUMS, "95, 55, 72", 3),
        "loss_conductances": (NUMS, "auto", 3),
        "heater_capacity": (NUM, "0.05", None),
        "heater_plate_conductance": (NUM, "0.4", None),
        "contact_conductance": (NUM, "0.04", None),
        "sample_conductance": (NUM, "0.03", None),
        "gap_conductance": (NUM, "0.0003", None),
        "inter_plate_conductance": (NUM, "0", None),
        "oil_mass_ratio": (NUM, "1", None),
        "chamber_capacity": (NUM, "auto", None),
        "coupling": (STR, "thermal", ("thermal", "ideal")),
        "preheat": (STR, "steady", ("steady", "ambient")),
        "dt": (NUM, "0.01", None),
    },
    "control": {
        "setpoints": (NUMS, "95, 55, 72", 3),
        "period": (NUM, "0.1", None),
        "autotune": (BOOL, "true", None),
        "kp": (NUMS, "auto", 3),
        "ki": (NUMS, "auto", 3),
        "kd": (NUMS, "auto", 3),
        "u_max_factor": (NUM, "2", None),
    },
    "protocol": {
        "initial_hold": (NUM, "120", None),
        "cycles": (INT, "30", None),
        "rotation_rate": (NUM, "1", None),
        "trace_ratio": (NUMS, "1, 1, 2", 3),
        "gap_fraction": (NUM, "0", None),
        "final_hold": (NUM, "240", None),
        "motion": (STR, "continuous", ("continuous", "stepped")),
        "radius_mm": (NUM, "10", None),
    },
    "kinetics": {
        "e_nominal": (NUM, "0.85", None),
        "band_half_width": (NUM, "2", None),
        "required_times": (NUMS, "15, 15, 30", 3),
        "template_mass_ng": (NUM, "1", None),
        "template_length_bp": (NUM, "4641652", None),
        "amplicon_length_bp": (NUM, "100", None),
        "sample_volume_ul": (NUM, "1", None),
        "recovered_volume_ul": (NUM, "0.8", None),
        "forward_primer": (STR, "5'-GGA TTA GAT ACC CTG GTA GT-3'", None),
        "reverse_primer": (STR, "5'-CTT GCG RYC GTA CTC CCCA-5'", None),
    },
    "geometry": {
        "top_length_mm": (NUM, "5.4", None),
        "top_width_mm": (NUM, "2.4", None),
        "depth_um": (NUM, "300", None),
        "wafer_thickness_um": (NUM, "525", None),
        "chip_length_mm": (NUM, "5.8", None),
        "chip_width_mm": (NUM, "2.8", None),
        "sidewall_angle_deg": (NUM, "54.74", None),
        "design_volume_ul": (NUM, str(DESIGN_VOLUME_UL), None),
    },
    "optimizer": {
        "y_min": (NUM, "1e6", None),
        "rate_min": (NUM, "0.1", None),
        "rate_max": (NUM, "10", None),
        "hold_min": (NUM, "0", None),
        "hold_max": (NUM, "600", None),
        "rates": (NUMS, "0.25, 0.5, 1, 2, 4", None),
        "lattice": (INT, "12", None),
        "initial_holds": (NUMS, "120", None),
        "final_holds": (NUMS, "240", None),
        "max_evals": (INT, "500", None),
        "fix_fractions": (BOOL, "false", None),
        "workers": (INT, "1", None),
    },
    "output": {
        "stride": (NUM, "0.1", None),
    },
}

AUTO = "auto"
_KEY_LINE = re.compile(r"^\s*([^=:\s\[][^=:]*?)\s*[=:]")
_SECTION_LINE = re.compile(r"^\s*\[([^\]]+)\]")


def _decimal(text, where):
    try:
        value = Decimal(text.strip())
    except InvalidOperation:
        raise ConfigurationError(f"{where}: {text!r} is not a number") from None
    if not value.is_finite():
        raise ConfigurationError(f"{where}: {text!r} is not finite")
    return value


def _parse(kind, text, extra, where):
    text = text.strip()
    if kind == NUM:
        return None if text == AUTO else _decimal(text, where)
    if kind == INT:
        value = _decimal(text, where)
        if value != value.to_integral_value():
            raise ConfigurationError(f"{where}: {text!r} is not an integer")
        return int(value)
    if kind == BOOL:
        low = text.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigurationError(f"{where}: {text!r} is not a boolean")
    if kind == NUMS:
        if text == AUTO:
            return None
        values = tuple(_decimal(part, where) for part in text.split(",") if part.strip())
        if extra is not None and len(values) != extra:
            raise ConfigurationError(f"{where}: expected {extra} values, got {len(values)}")
        if not values:
            raise ConfigurationError(f"{where}: empty list")
        return values
    if extra is not None and text not in extra:
        raise ConfigurationError(f"{where}: {text!r} is not one of {', '.join(extra)}")
    return text


def _canonical(kind, value):
    if value is None:
        return AUTO
    if kind == NUM:
        return _fmt_decimal(value)
    if kind == NUMS:
        return ", ".join(_fmt_decimal(v) for v in value)
    if kind == BOOL:
        return "true" if value else "false"
    return str(value)


def _fmt_decimal(d):
    text = format(d, "f") if abs(d.adjusted()) < 12 else str(d)
    if "." in text and "e" not in text.lower():
        text = text.rstrip("0").rstrip(".")
    return text or "0"


@dataclass
class ScenarioConfig:
    """Parsed configuration: one value per schema key, plus source lines."""

    values: dict
    lines: dict = field(default_factory=dict)

    def __getitem__(self, key):
        section, name = key.split(".", 1)
        return self.values[section][name]

    def line_of(self, key):
        return self.lines.get(tuple(key.split(".", 1)))

    def error(self, key, message):
        return ConfigurationError(f"{key}: {message}", line=self.line_of(key))

    def dump(self):
        """Effective configuration as INI text, in schema order."""
        parser = configparser.ConfigParser(interpolation=None)
        for section, keys in SCHEMA.items():
            parser[section] = {
                name: _canonical(kind, self.values[section][name])
                for name, (kind, _, _) in keys.items()
            }
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    # -- typed views ---------------------------------------------------

    def _f(self, key):
        value = self[key]
        return None if value is None else float(value)

    def _fs(self, key):
        value = self[key]
        return None if value is None else tuple(float(v) for v in value)

    def etch_spec(self):
        try:
            return EtchSpec(
                top_length_mm=self._f("geometry.top_length_mm"),
                top_width_mm=self._f("geometry.top_width_mm"),
                depth_um=self._f("geometry.depth_um"),
                wafer_thickness_um=self._f("geometry.wafer_thickness_um"),
                chip_length_mm=self._f("geometry.chip_length_mm"),
                chip_width_mm=self._f("geometry.chip_width_mm"),
                sidewall_angle_deg=self._f("geometry.sidewall_angle_deg"),
            )
        except ConfigurationError as exc:
            raise self.error("geometry.depth_um", str(exc)) from None

    def reaction(self):
        return ReactionSpec(
            template_mass_ng=self._f("kinetics.template_mass_ng"),
            amplicon_length_bp=self._f("kinetics.amplicon_length_bp"),
            sample_volume_ul=self._f("kinetics.sample_volume_ul"),
            recovered_volume_ul=self._f("kinetics.recovered_volume_ul"),
            template_length_bp=self._f("kinetics.template_length_bp"),
        )

    def plant(self):
        chamber = self._f("plant.chamber_capacity")
        if chamber is None:
            chamber = chip_heat_capacity(self.etch_spec())
        sample = sample_heat_capacity(
            self._f("kinetics.sample_volume_ul"), self._f("plant.oil_mass_ratio")
        )
        return PlantConfig(
            ambient=self._f("plant.ambient"),
            plate_length_mm=self._f("plant.plate_length_mm"),
            plate_width_mm=self._f("plant.plate_width_mm"),
            plate_thickness_mm=self._f("plant.plate_thickness_mm"),
            calibration_powers=self._fs("plant.calibration_powers"),
            calibration_temps=self._fs("plant.calibration_temps"),
            loss_conductances=self._fs("plant.loss_conductances"),
            heater_capacity=self._f("plant.heater_capacity"),
            heater_plate_conductance=self._f("plant.heater_plate_conductance"),
            contact_conductance=self._f("plant.contact_conductance"),
            sample_conductance=self._f("plant.sample_conductance"),
            gap_conductance=self._f("plant.gap_conductance"),
            inter_plate_conductance=self._f("plant.inter_plate_conductance"),
            chamber_capacity=chamber,
            sample_capacity=sample,
        ).validate()

    def control(self):
        gains = None
        if not self["control.autotune"]:
            kp, ki, kd = (self._fs(f"control.{k}") for k in ("kp", "ki", "kd"))
            if None in (kp, ki, kd):
                raise self.error("control.autotune", "autotune is off but kp/ki/kd are not set")
            gains = tuple(PIDGains(*g) for g in zip(kp, ki, kd))
        return ControlConfig(
            setpoints=self._fs("control.setpoints"),
            period=self._f("control.period"),
            gains=gains,
            u_max_factor=self._f("control.u_max_factor"),
        )

    def schedule(self):
        trace = TraceGeometry.from_ratio(
            self._fs("protocol.trace_ratio"), gap=self._f("protocol.gap_fraction")
        )
        return ProtocolSchedule(
            initial_hold=self._f("protocol.initial_hold"),
            cycles=self["protocol.cycles"],
            rotation_rate=self._f("protocol.rotation_rate"),
            trace=trace,
            final_hold=self._f("protocol.final_hold"),
            motion=self["protocol.motion"],
        )

    def efficiency(self):
        return EfficiencyModel(
            e_nominal=self._f("kinetics.e_nominal"),
            band_half_width=self._f("kinetics.band_half_width"),
            required_times=self._fs("kinetics.required_times"),
        )

    def optimizer(self):
        return OptimizerSettings(
            y_min=self._f("optimizer.y_min"),
            rate_min=self._f("optimizer.rate_min"),
            rate_max=self._f("optimizer.rate_max"),
            hold_min=self._f("optimizer.hold_min"),
            hold_max=self._f("optimizer.hold_max"),
            rates=self._fs("optimizer.rates"),
            lattice=self["optimizer.lattice"],
            initial_holds=self._fs("optimizer.initial_holds"),
            final_holds=self._fs("optimizer.final_holds"),
            max_evals=self["optimizer.max_evals"],
            fix_fractions=self["optimizer.fix_fractions"],
            workers=self["optimizer.workers"],
        )

    def _check_timing(self):
        dt, period, stride = self["plant.dt"], self["control.period"], self["output.stride"]
        for key, value in (("plant.dt", dt), ("control.period", period), ("output.stride", stride)):
            if value is None or value <= 0:
                raise self.error(key, "must be > 0")
        if stride % dt != 0:
            raise self.error("output.stride", f"stride {stride} is not a multiple of dt {dt}")
        if period % stride != 0:
            raise self.error("output.stride", f"stride {stride} does not divide the control period {period}")

    def scenario(self):
        """Build the :class:`Scenario`; errors carry the offending line."""
        self._check_timing()
        sections = (
            ("plant", self.plant), ("control", self.control), ("protocol", self.schedule),
            ("kinetics", self.efficiency), ("kinetics", self.reaction),
            ("optimizer", self.optimizer),
        )
        parts = {}
        for section, build in sections:
            try:
                parts[build.__name__] = build()
            except ConfigurationError as exc:
                if exc.line is not None:
                    raise
                raise ConfigurationError(
                    f"[{section}] {exc}", line=self._first_line(section)
                ) from None
        try:
            return Scenario(
                plant=parts["plant"], control=parts["control"], schedule=parts["schedule"],
                efficiency=parts["efficiency"], reaction=parts["reaction"],
                optimizer=parts["optimizer"], coupling=self["plant.coupling"],
                preheat=self["plant.preheat"], dt=self._f("plant.dt"),
                stride=self._f("output.stride"),
            )
        except ConfigurationError as exc:
            raise ConfigurationError(str(exc), line=self._first_line("control")) from None

    def _first_line(self, section):
        lines = [ln for (sec, _), ln in self.lines.items() if sec == section]
        return min(lines) if lines else None


def _key_lines(text):
    found = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        m = _SECTION_LINE.match(line)
        if m:
            section = m.group(1).strip()
            found.setdefault((section, None), lineno)
            continue
        m = _KEY_LINE.match(line)
        if m and section is not None:
            found[(section, m.group(1).strip().lower())] = lineno
    return found


def parse_config(text="", overrides=()):
    """Parse config text plus ``section.key=value`` overrides."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        raise ConfigurationError(exc.message.splitlines()[0], line=line) from None
    lines = _key_lines(text)

    raw = {section: {k: spec[1] for k, spec in keys.items()} for section, keys in SCHEMA.items()}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"unknown section [{section}]", line=lines.get((section, None)))
        for key, value in parser[section].items():
            if key not in SCHEMA[section]:
                raise ConfigurationError(
                    f"unknown key {key!r} in [{section}]", line=lines.get((section, key))
                )
            raw[section][key] = value

    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigurationError(f"override {item!r} is not of the form section.key=value")
        path, value = item.split("=", 1)
        section, key = path.strip().split(".", 1)
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigurationError(f"override names unknown key {path.strip()!r}")
        raw[section][key] = value
        lines.pop((section, key), None)

    values = {}
    for section, keys in SCHEMA.items():
        values[section] = {}
        for key, (kind, _, extra) in keys.items():
            where = f"{section}.{key}"
            try:
                values[section][key] = _parse(kind, raw[section][key], extra, where)
            except ConfigurationError as exc:
                raise ConfigurationError(str(exc), line=lines.get((section, key))) from None
    return ScenarioConfig(values, {k: v for k, v in lines.items() if k[1] is not None})


def load_config(path=None, overrides=()):
    text = ""
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return parse_config(text, overrides)
