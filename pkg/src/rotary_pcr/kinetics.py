"""Amplification yield: closed-form laws and the trajectory-based model.

A perfect reaction doubles the amplicon each cycle.  With per-cycle
efficiency ``e`` the fold-amplification after ``n`` cycles is
``(1 + e)**n``.

The trajectory model scales the nominal efficiency of every cycle by how
completely each step was carried out.  For step ``i`` the completion is
the time the sample spent within ``band_half_width`` of the step's
setpoint while over that sector, divided by the time the step needs,
clamped to [0, 1].  The realized efficiency is ``e_nominal * c1 * c2 * c3``.

The default required times equal the 15/15/30 s residence of the
reference protocol, so that protocol is *exactly* sufficient: any thermal
lag shows up as lost yield.  Time spent in band during the initial hold
counts toward the first cycle's denaturation, and the final hold toward
the last cycle's extension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import constants
from .constants import ZONE_LABELS
from .errors import ConfigurationError, CoverageError, DomainError
from .protocol import TIME_EPS, ProtocolSchedule, locate, total_time


@dataclass(frozen=True)
class EfficiencyModel:
    e_nominal: float = 0.85
    band_half_width: float = 2.0  # K
    required_times: tuple[float, float, float] = (15.0, 15.0, 30.0)

    def __post_init__(self):
        if not 0 <= self.e_nominal <= 1:
            raise ConfigurationError(f"e_nominal must lie in [0, 1], got {self.e_nominal}")
        if not self.band_half_width > 0:
            raise ConfigurationError("band_half_width must be > 0")
        if len(self.required_times) != 3 or min(self.required_times) <= 0:
            raise ConfigurationError(
                f"need three positive required times, got {self.required_times}"
            )


@dataclass(frozen=True)
class ReactionSpec:
    """Reaction mix and volumes.

    ``template_length_bp`` is the length of the template molecule the
    template mass refers to (a whole genome for genomic DNA).
    """

    template_mass_ng: float = 1.0
    amplicon_length_bp: float = 100.0
    sample_volume_ul: float = 1.0
    recovered_volume_ul: float = 0.8
    template_length_bp: float = constants.ECOLI_K12_GENOME_BP

    def __post_init__(self):
        for name in ("template_mass_ng", "amplicon_length_bp", "sample_volume_ul",
                     "recovered_volume_ul", "template_length_bp"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be > 0")
        if self.recovered_volume_ul > self.sample_volume_ul:
            raise ConfigurationError("recovered volume exceeds the sample volume")


@dataclass(frozen=True)
class CycleOutcome:
    index: int
    time_in_band: tuple[float, float, float]
    completion: tuple[float, float, float]
    e_effective: float


def ideal_yield(n):
    """``2**n``: exact integer up to 62 cycles, float beyond."""
    if int(n) != n or n < 0:
        raise DomainError(f"cycle count must be a non-negative integer, got {n}")
    n = int(n)
    return 2**n if n <= 62 else math.ldexp(1.0, n)


def nominal_yield(n, e):
    if int(n) != n or n < 0:
        raise DomainError(f"cycle count must be a non-negative integer, got {n}")
    if not 0 <= e <= 1:
        raise DomainError(f"efficiency must lie in [0, 1], got {e}")
    return (1.0 + e) ** int(n)


def trajectory_yield(times, sample_temps, schedule: ProtocolSchedule,
                     model: EfficiencyModel | None = None, setpoints=ZONE_LABELS):
    """Per-cycle outcomes and total fold-amplification of a trajectory.

    ``times`` must start at 0 and reach ``total_time(schedule)``; each
    sample holds its temperature until the next one (the last sample has
    zero weight).  Uniform sampling is the normal case, but any increasing
    grid works, e.g. one aligned with sector boundaries.
    """
    model = model or EfficiencyModel()
    t = np.asarray(times, dtype=float)
    T = np.asarray(sample_temps, dtype=float)
    if t.shape != T.shape or t.ndim != 1 or t.size == 0:
        raise CoverageError("times and temperatures must be equal-length 1-D series")
    end = total_time(schedule)
    if t[0] > TIME_EPS or t[-1] < end - TIME_EPS:
        raise CoverageError(
            f"series spans [{t[0]}, {t[-1]}] s but the protocol needs [0, {end}] s"
        )
    if np.any(np.diff(t) <= 0):
        raise CoverageError("sample times must be strictly increasing")

    inside = t <= end + TIME_EPS
    t, T = t[inside], T[inside]
    dur = np.diff(np.minimum(np.append(t, end), end))
    dur = np.clip(dur, 0.0, None)

    n = schedule.cycles
    if n == 0:
        return [], 1.0

    cycle, zone = locate(schedule, t)
    sp = np.asarray(setpoints, dtype=float)
    valid = zone >= 0
    in_band = np.zeros(t.shape, dtype=bool)
    in_band[valid] = np.abs(T[valid] - sp[zone[valid]]) <= model.band_half_width
    # holds feed the adjacent cycle
    owner = np.clip(cycle, 0, n - 1)
    w = np.where(in_band, dur, 0.0)
    slot = owner * 3 + np.where(valid, zone, 0)
    tib = np.bincount(slot, weights=w, minlength=3 * n).reshape(n, 3)

    req = np.asarray(model.required_times, dtype=float)
    outcomes = []
    total = 1.0
    for k in range(n):
        comp = tuple(float(min(max(x / r, 0.0), 1.0)) for x, r in zip(tib[k], req))
        e_eff = model.e_nominal * comp[0] * comp[1] * comp[2]
        outcomes.append(CycleOutcome(k, tuple(float(x) for x in tib[k]), comp, e_eff))
        total *= 1.0 + e_eff
    return outcomes, total


def yield_to_mass(fold, spec: ReactionSpec | None = None):
    """Amplicon product mass for a fold-amplification.

    The template mass is converted to template copies with 650 g/mol per
    base pair; each copy carries one amplicon target.
    """
    spec = spec or ReactionSpec()
    if not fold >= 1:
        raise DomainError(f"fold-amplification must be >= 1, got {fold}")
    g_per_bp = constants.DSDNA_G_PER_MOL_PER_BP
    template_copies = (
        spec.template_mass_ng * 1e-9 / (spec.template_length_bp * g_per_bp) * constants.AVOGADRO
    )
    amplicon_ng = spec.amplicon_length_bp * g_per_bp / constants.AVOGADRO * 1e9
    copies = template_copies * float(fold)
    mass = copies * amplicon_ng
    return {
        "template_copies": template_copies,
        "product_copies": copies,
        "product_mass_ng": mass,
        "recovered_mass_ng": mass * spec.recovered_volume_ul / spec.sample_volume_ul,
    }
