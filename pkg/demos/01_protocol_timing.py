"""Where the 36 minutes go.

The chamber sits on the 95 C plate for the initial hold, then rotates
through three sectors whose arc lengths are in the ratio 1:1:2.  At one
revolution per minute that gives 15 / 15 / 30 s per cycle.  The platform
then parks the chamber on the 72 C plate for the final extension.
"""

from rotary_pcr.protocol import (
    ProtocolSchedule,
    TraceGeometry,
    cycle_boundaries,
    residence_times,
    total_time,
    zone_at,
)

schedule = ProtocolSchedule(trace=TraceGeometry.from_ratio((1, 1, 2)))
print("residence per cycle:", residence_times(schedule.rotation_rate, schedule.trace), "s")
print("total time:", total_time(schedule), "s =", total_time(schedule) / 60, "min")

first = cycle_boundaries(schedule)[0]
print(f"cycle 1 runs from {first[1]:g} s to {first[2]:g} s")
for t in (0.0, 120.0, 134.9, 135.0, 150.0, 179.9, 1920.0):
    print(f"  t = {t:7.1f} s -> {zone_at(schedule, t).label} C sector")

# spinning faster shortens the run but also every arc
for rate in (0.5, 2.0, 4.0):
    fast = ProtocolSchedule(rotation_rate=rate)
    res = residence_times(rate, fast.trace)
    print(f"{rate:>4} rpm: {total_time(fast):6.0f} s total, arcs "
          + " / ".join(f"{r:g}" for r in res) + " s")
