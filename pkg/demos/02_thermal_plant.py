"""Calibrating the plates and watching the loops hold them.

Each heated copper plate loses heat to the room through one lumped
conductance.  The steady heater powers measured at 95, 55 and 72 C fix
those conductances.  The PID loops are tuned automatically from an
open-loop step test, then the whole platform is run from a cold start.
"""

from rotary_pcr.scenario import COLD, Scenario
from rotary_pcr.simulation import simulate
from rotary_pcr.thermal import PlantConfig, build_platform_network, calibrate_zone, plate_id, steady_state

powers = (4.51, 1.35, 3.74)
temps = (95.0, 55.0, 72.0)
losses = [calibrate_zone(p, t, 25.0) for p, t in zip(powers, temps)]
for p, t, g in zip(powers, temps, losses):
    print(f"{p:.2f} W holds {t:g} C  ->  loss conductance {g:.5f} W/K")

plant = PlantConfig()
ss = steady_state(build_platform_network(plant), powers)
print("steady plates:", [round(ss[plate_id(z)], 6) for z in range(3)])
print(f"plate heat capacity: {plant.plate_capacity():.3f} J/K "
      f"(time constant at 95 C ~ {plant.plate_capacity() / losses[0] / 60:.0f} min)")

run = simulate(Scenario(preheat=COLD), duration=600.0)
for z, g in enumerate(run.gains):
    print(f"zone {temps[z]:g} C gains: kp={g.kp:.3f} ki={g.ki:.4f} kd={g.kd:.4f}")
for label, d in run.settle.items():
    print(f"{label} C plate: settled at {d['settle_time_s']:.0f} s, "
          f"overshoot {d['overshoot_K']:.2f} K, then within {d['max_abs_error_after_settle_K']:.3f} K")
