"""How much product does a run make?

A perfect cycle doubles the amplicon.  Real cycles copy a fraction ``e``
of the templates, so the yield after ``n`` cycles is ``(1 + e)**n``.
In the simulator every cycle's efficiency is further scaled by how much
of each step the sample actually spent near its target temperature.
"""

from rotary_pcr.kinetics import ideal_yield, nominal_yield, yield_to_mass
from rotary_pcr.scenario import IDEAL, Scenario
from rotary_pcr.simulation import simulate

print("2^30 =", ideal_yield(30))
for e in (0.8, 0.85, 0.9):
    print(f"e = {e}: (1+e)^30 = {nominal_yield(30, e):.4e}")

ideal = simulate(Scenario(coupling=IDEAL))
print(f"instant equilibration: {ideal.fold:.6e} (matches the closed form)")

thermal = simulate(Scenario())
worst = min(thermal.outcomes, key=lambda o: o.e_effective)
print(f"thermal plant: {thermal.fold:.4e}; weakest cycle {worst.index + 1} "
      f"completes {', '.join(f'{c:.2f}' for c in worst.completion)} of its steps")

mass = yield_to_mass(thermal.fold)
print(f"1 ng of genomic template holds {mass['template_copies']:.3g} target copies")
print(f"product: {mass['product_mass_ng']:.3g} ng, "
      f"{mass['recovered_mass_ng']:.3g} ng in the recovered volume")
