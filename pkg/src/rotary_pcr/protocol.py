"""Rotary transit of the chamber and the protocol timeline.

The protocol is an initial hold on the denaturation plate, ``cycles``
revolutions of the chamber through the 95 -> 55 -> 72 degC sectors, and a
final hold on the extension plate.  Time intervals are half-open: at a
boundary instant the later segment wins.  Boundary comparisons tolerate
``TIME_EPS`` so sampled times such as ``k * dt`` land on the intended side.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .constants import ZONE_LABELS
from .errors import ConfigurationError, DomainError

TIME_EPS = 1e-9  # s

CONTINUOUS = "continuous"
STEPPED = "stepped"

GAP = -1  # zone code for a dead arc bound to no heater


class Zone(enum.IntEnum):
    DENATURATION = 0
    ANNEALING = 1
    EXTENSION = 2

    @property
    def label(self):
        """Nominal temperature of the sector, degC."""
        return ZONE_LABELS[self.value]


@dataclass(frozen=True)
class TraceGeometry:
    """Share of one revolution spent over each heater sector.

    Only ``f1`` and ``f2`` are stored; ``f3`` is the remainder so the three
    always sum to one.  ``gap`` is an optional share of dead arc, split
    evenly after each sector.
    """

    f1: float = 0.25
    f2: float = 0.25
    gap: float = 0.0

    def __post_init__(self):
        if not (self.f1 > 0 and self.f2 > 0 and self.f3 > 0):
            raise ConfigurationError(
                f"trace fractions must all be > 0, got {self.fractions}"
            )
        if not 0 <= self.gap < 1:
            raise ConfigurationError(f"gap fraction must lie in [0, 1), got {self.gap}")

    @property
    def f3(self):
        return 1.0 - self.f1 - self.f2

    @property
    def fractions(self):
        return (self.f1, self.f2, self.f3)

    @classmethod
    def from_ratio(cls, ratio, gap=0.0):
        """Build from arc lengths such as ``(1, 1, 2)``."""
        l1, l2, l3 = (float(x) for x in ratio)
        if min(l1, l2, l3) <= 0:
            raise ConfigurationError(f"trace ratio entries must be > 0, got {ratio}")
        total = l1 + l2 + l3
        return cls(l1 / total, l2 / total, gap)


@dataclass(frozen=True)
class ProtocolSchedule:
    initial_hold: float = 120.0
    cycles: int = 30
    rotation_rate: float = 1.0  # rpm
    trace: TraceGeometry = TraceGeometry()
    final_hold: float = 240.0
    motion: str = CONTINUOUS

    def __post_init__(self):
        if int(self.cycles) != self.cycles or self.cycles < 0:
            raise ConfigurationError(f"cycles must be a non-negative integer, got {self.cycles}")
        if not self.rotation_rate > 0:
            raise ConfigurationError(f"rotation rate must be > 0 rpm, got {self.rotation_rate}")
        if not (self.initial_hold >= 0 and self.final_hold >= 0):
            raise ConfigurationError("hold durations must be >= 0")
        if self.motion not in (CONTINUOUS, STEPPED):
            raise ConfigurationError(f"unknown motion mode {self.motion!r}")

    @property
    def period(self):
        """Duration of one revolution, s."""
        return 60.0 / self.rotation_rate

    @property
    def rotation_start(self):
        return float(self.initial_hold)

    @property
    def rotation_end(self):
        return self.initial_hold + self.cycles * self.period

    def arcs(self):
        """Sequence of ``(zone, duration)`` covering one revolution."""
        P = self.period
        if self.motion == STEPPED:
            return [(Zone(i), f * P) for i, f in enumerate(self.trace.fractions)]
        g = self.trace.gap
        out = []
        for i, f in enumerate(self.trace.fractions):
            out.append((Zone(i), (1.0 - g) * f * P))
            if g > 0:
                out.append((GAP, g * P / 3.0))
        return out


def residence_times(rate, trace: TraceGeometry, motion=CONTINUOUS):
    """Seconds per revolution spent over the 95, 55 and 72 degC sectors."""
    if not rate > 0:
        raise DomainError(f"rotation rate must be > 0, got {rate}")
    period = 60.0 / rate
    scale = 1.0 - trace.gap if motion == CONTINUOUS else 1.0
    return tuple(period * scale * f for f in trace.fractions)


def total_time(schedule: ProtocolSchedule):
    return schedule.initial_hold + schedule.cycles * schedule.period + schedule.final_hold


def cycle_boundaries(schedule: ProtocolSchedule):
    """``[(k, start, end), ...]`` for each revolution, contiguous."""
    t0, P = schedule.rotation_start, schedule.period
    return [(k, t0 + k * P, t0 + (k + 1) * P) for k in range(schedule.cycles)]


def locate(schedule: ProtocolSchedule, times):
    """Cycle index and zone code for each time.

    Cycle index is -1 inside the initial hold and ``cycles`` inside the
    final hold.  Zone codes are :class:`Zone` values or :data:`GAP`.
    """
    t = np.asarray(times, dtype=float)
    total = total_time(schedule)
    if np.any(t < -TIME_EPS) or np.any(t > total + TIME_EPS):
        raise DomainError(f"time outside the protocol window [0, {total}] s")
    t0, t1, P = schedule.rotation_start, schedule.rotation_end, schedule.period

    cycle = np.full(t.shape, -1, dtype=np.int64)
    zone = np.full(t.shape, int(Zone.DENATURATION), dtype=np.int64)

    final = t >= t1 - TIME_EPS
    cycle[final] = schedule.cycles
    zone[final] = int(Zone.EXTENSION)

    rot = (t >= t0 - TIME_EPS) & ~final
    if np.any(rot):
        u = t[rot] - t0
        k = np.floor((u + TIME_EPS) / P).astype(np.int64)
        k = np.clip(k, 0, max(schedule.cycles - 1, 0))
        tau = u - k * P
        ends = np.cumsum([d for _, d in schedule.arcs()])
        codes = np.array([int(z) for z, _ in schedule.arcs()])
        j = np.searchsorted(ends - TIME_EPS, tau, side="right")
        j = np.clip(j, 0, len(codes) - 1)
        cycle[rot] = k
        zone[rot] = codes[j]
    return cycle, zone


def zone_at(schedule: ProtocolSchedule, t):
    """Sector under the chamber at time ``t``; ``None`` over a dead arc."""
    _, zone = locate(schedule, [t])
    code = int(zone[0])
    return None if code == GAP else Zone(code)


def breakpoints(schedule: ProtocolSchedule):
    """Every instant where the occupied sector may change, plus both ends."""
    pts = [0.0, schedule.rotation_start]
    for _, start, _ in cycle_boundaries(schedule):
        acc = start
        for _, d in schedule.arcs():
            pts.append(acc)
            acc += d
    pts += [schedule.rotation_end, total_time(schedule)]
    pts = np.unique(np.asarray(pts, dtype=float))
    keep = np.concatenate(([True], np.diff(pts) > TIME_EPS))
    return pts[keep]
