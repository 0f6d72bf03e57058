"""Finding the shortest protocol that still amplifies enough.

With instant equilibration the 1/4, 1/4, 1/2 split at 1 rpm gives every
step exactly the time it needs, so 1 rpm is the fastest rotation that
keeps the full nominal yield.  The grid search and the Nelder-Mead
refinement both find it.  Relaxing the yield floor lets the search trade
yield for time.
"""

from rotary_pcr.kinetics import nominal_yield
from rotary_pcr.optimizer import DesignPoint, grid_search, refine
from rotary_pcr.scenario import IDEAL, OptimizerSettings, Scenario

full = Scenario(coupling=IDEAL,
                optimizer=OptimizerSettings(y_min=nominal_yield(30, 0.85), fix_fractions=True))
best = refine(full, DesignPoint(0.5, 0.25, 0.25))
print(f"full-yield floor: {best.design.rotation_rate:.4f} rpm, {best.total_time:.0f} s")

relaxed = Scenario(coupling=IDEAL, optimizer=OptimizerSettings(y_min=1e6, max_evals=80))
grid = grid_search(relaxed)
print(f"grid ({len(grid.records)} designs) best: {grid.best.design.rotation_rate:g} rpm, "
      "fractions " + "/".join(f"{f:.3f}" for f in grid.best.design.fractions)
      + f", {grid.best.total_time:.0f} s, yield {grid.best.yield_:.3e}")
polished = refine(relaxed, grid.best.design)
print(f"refined: {polished.design.rotation_rate:.3f} rpm, fractions "
      + "/".join(f"{f:.3f}" for f in polished.design.fractions)
      + f", {polished.total_time:.0f} s, yield {polished.yield_:.3e}")
