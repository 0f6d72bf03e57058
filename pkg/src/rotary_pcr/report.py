"""CSV and text outputs.

CSV files have a header row, a fixed column order, ``.`` as the decimal
separator and ``\\n`` line endings, so identical runs give identical bytes.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

from .constants import ZONE_LABELS
from .geometry import geometry_report
from .kinetics import ideal_yield, nominal_yield
from .protocol import cycle_boundaries, residence_times, total_time

TIMESERIES_COLUMNS = (
    "time_s",
    "power_95_W", "power_55_W", "power_72_W",
    "plate_95_C", "plate_55_C", "plate_72_C",
    "chamber_C", "sample_C", "zone",
)

CYCLE_COLUMNS = (
    "cycle", "start_s", "end_s",
    "in_band_95_s", "in_band_55_s", "in_band_72_s",
    "completion_95", "completion_55", "completion_72",
    "e_effective",
)

RECORD_COLUMNS = (
    "rotation_rate_rpm", "f1", "f2", "f3", "initial_hold_s", "final_hold_s",
    "total_time_s", "yield_fold", "feasible",
)


def _num(x, digits=6):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{float(x):.{digits}f}"


def _sci(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{float(x):.9e}"


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_timeseries(result, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(TIMESERIES_COLUMNS)
        labels = result.zone_labels
        for i, t in enumerate(result.times):
            w.writerow([
                _num(t, 3),
                *(_num(p) for p in result.powers[i]),
                *(_num(T) for T in result.plates[i]),
                _num(result.chamber[i]),
                _num(result.sample[i]),
                labels[i],
            ])


def write_cycles(result, schedule, path):
    bounds = cycle_boundaries(schedule)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(CYCLE_COLUMNS)
        for (k, start, end), out in zip(bounds, result.outcomes):
            w.writerow([
                k + 1, _num(start, 3), _num(end, 3),
                *(_num(x, 3) for x in out.time_in_band),
                *(_num(c) for c in out.completion),
                _num(out.e_effective, 9),
            ])


def write_records(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(RECORD_COLUMNS)
        for r in records:
            d = r.design
            w.writerow([
                _num(d.rotation_rate, 9), _num(d.f1, 9), _num(d.f2, 9), _num(d.f3, 9),
                _num(d.initial_hold, 3), _num(d.final_hold, 3),
                _num(r.total_time, 6), _sci(r.yield_), "1" if r.feasible else "0",
            ])


def simulation_summary(result, scenario, etch_spec=None):
    sch = scenario.schedule
    res = residence_times(sch.rotation_rate, sch.trace, sch.motion)
    t_total = total_time(sch)
    lines = [
        "Rotary PCR platform simulation",
        "==============================",
        f"coupling mode          : {scenario.coupling}",
        f"preheat                : {scenario.preheat}",
        f"total time             : {t_total:g} s ({t_total / 60:g} min)",
        f"  initial hold         : {sch.initial_hold:g} s at 95 C",
        f"  rotation             : {sch.cycles} cycles x {sch.period:g} s at {sch.rotation_rate:g} rpm",
        f"  final hold           : {sch.final_hold:g} s at 72 C",
        "residence per cycle    : " + " / ".join(f"{r:g}" for r in res) + " s (95 / 55 / 72 C)",
        f"trace fractions        : " + " / ".join(f"{f:.6g}" for f in sch.trace.fractions),
        "",
    ]
    if result.fold is not None:
        e = scenario.efficiency
        n = sch.cycles
        lines += [
            f"fold-amplification     : {result.fold:.6e}",
            f"  nominal (1+e)^n      : {nominal_yield(n, e.e_nominal):.6e}  (e = {e.e_nominal:g})",
            f"  ideal 2^n            : {ideal_yield(n):.6e}",
            f"product mass           : {result.mass['product_mass_ng']:.6g} ng "
            f"({result.mass['recovered_mass_ng']:.6g} ng in the recovered volume)",
        ]
        if result.outcomes:
            effs = [o.e_effective for o in result.outcomes]
            lines.append(
                f"per-cycle efficiency   : min {min(effs):.4f}, mean {sum(effs) / len(effs):.4f}, max {max(effs):.4f}"
            )
        lines.append("")
    if result.settle:
        lines.append("plate regulation (+/-0.5 K band)")
        for label, diag in result.settle.items():
            lines.append(
                f"  {label} C plate: settled at {diag['settle_time_s']:g} s, "
                f"max |error| after {diag['max_abs_error_after_settle_K']:.3f} K, "
                f"overshoot {diag['overshoot_K']:.3f} K"
            )
        lines.append("")
    if result.energy:
        en = result.energy
        rel = abs(en["residual_J"]) / max(en["input_J"], 1e-300)
        lines += [
            f"energy in / lost / stored : {en['input_J']:.6f} / {en['loss_J']:.6f} / {en['stored_J']:.6f} J",
            f"energy balance residual   : {rel:.3e} (relative)",
            "",
        ]
    if result.gains:
        for label, g in zip(ZONE_LABELS, result.gains):
            lines.append(f"PID {label} C: kp={g.kp:.6g} W/K, ki={g.ki:.6g} W/(K s), kd={g.kd:.6g} W s/K")
        lines.append("")
    lines += correspondence_block(result, scenario, etch_spec)
    return "\n".join(lines) + "\n"


def correspondence_block(result, scenario, etch_spec=None):
    sch = scenario.schedule
    res = residence_times(sch.rotation_rate, sch.trace, sch.motion)
    lines = [
        "Reference correspondence",
        "------------------------",
        "reported by the reference experiment (inputs or checks):",
        f"  total reaction time 36 min        -> simulated {total_time(sch) / 60:g} min",
        "  residence 15 / 15 / 30 s          -> simulated " + " / ".join(f"{r:g}" for r in res) + " s",
        f"  30 cycles at 1 rpm                -> {sch.cycles} cycles at {sch.rotation_rate:g} rpm",
        "  heater power 4.51 / 1.35 / 3.74 W at 95 / 55 / 72 C -> calibrates plate loss conductances",
        "  efficiency e ~ 0.8-0.9            -> e_nominal "
        f"{scenario.efficiency.e_nominal:g}",
    ]
    if etch_spec is not None:
        geo = geometry_report(etch_spec)
        lines.append(
            f"  chamber volume 4.5 ul             -> {geo['cavity_volume_ul']:.3f} ul from the stated "
            "dimensions (DISCREPANCY, not reconciled)"
            if not geo["design_volume_consistent"]
            else f"  chamber volume 4.5 ul             -> {geo['cavity_volume_ul']:.3f} ul"
        )
    lines += [
        "model-derived (no reported counterpart):",
        "  plate transients, PID gains, sample lag, per-cycle completions, fold-amplification",
    ]
    return lines


def geometry_text(spec, design_volume_ul=None):
    geo = geometry_report(spec, design_volume_ul) if design_volume_ul else geometry_report(spec)
    lines = [
        "KOH-etched chamber geometry",
        "===========================",
        f"mask opening (top)   : {geo['top_mm'][0]:.4f} x {geo['top_mm'][1]:.4f} mm",
        f"cavity floor         : {geo['bottom_mm'][0]:.4f} x {geo['bottom_mm'][1]:.4f} mm",
        f"depth                : {geo['depth_um']:g} um at {geo['sidewall_angle_deg']:g} deg sidewalls",
        f"cavity volume        : {geo['cavity_volume_ul']:.4f} ul",
        f"  frustum estimate   : {geo['frustum_estimate_ul']:.4f} ul (similar-section formula)",
        f"chip heat capacity   : {geo['chip_heat_capacity_J_per_K']:.6f} J/K",
        f"design volume        : {geo['design_volume_ul']:g} ul",
    ]
    if geo["design_volume_consistent"]:
        lines.append("design check         : consistent within 1 %")
    else:
        lines.append(
            f"design check         : DISCREPANCY - computed volume differs from the design volume "
            f"by {geo['design_volume_mismatch'] * 100:+.1f} %; the stated dimensions do not "
            "reproduce it and the two are reported side by side"
        )
    return "\n".join(lines) + "\n"


def write_text(text, path):
    Path(path).write_text(text, encoding="utf-8")
