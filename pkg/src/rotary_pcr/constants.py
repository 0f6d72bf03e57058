"""Material and physical constants.

Handbook values (CRC Handbook of Chemistry and Physics, room temperature).
They are fixed for every scenario on purpose.
"""

COPPER_DENSITY = 8960.0          # kg/m^3
COPPER_SPECIFIC_HEAT = 385.0     # J/(kg K)

SILICON_DENSITY = 2330.0         # kg/m^3
SILICON_SPECIFIC_HEAT = 700.0    # J/(kg K)

WATER_DENSITY = 1000.0           # kg/m^3
WATER_SPECIFIC_HEAT = 4184.0     # J/(kg K)

MINERAL_OIL_SPECIFIC_HEAT = 1670.0  # J/(kg K), light paraffin oil

# {111}/{100} plane angle exposed by KOH on <100> silicon
KOH_SIDEWALL_ANGLE_DEG = 54.74

AVOGADRO = 6.02214076e23         # 1/mol
DSDNA_G_PER_MOL_PER_BP = 650.0   # average mass of one base pair

# E. coli K-12 MG1655 chromosome length
ECOLI_K12_GENOME_BP = 4_641_652

# nominal zone temperatures, in trace order (denaturation, annealing, extension)
ZONE_LABELS = (95, 55, 72)
