"""Shared physical constants and unit conversion factors.

Internal canonical units throughout the package: MW and MWh for power and energy
(electricity and hydrogen alike, hydrogen on a lower-heating-value basis), MMBtu
for fuel, metric tonnes for CO2 and for hydrogen mass, US dollars for cost.
"""

HOURS_PER_YEAR = 8760

# 1 MWh = 3.412 MMBtu (the usual rounding used in planning sheets)
MMBTU_PER_MWH = 3.412

# Hydrogen lower heating value: 120 MJ/kg -> kWh/kg -> MWh/tonne
H2_LHV_MJ_PER_KG = 120.0
MJ_PER_KWH = 3.6
H2_KWH_PER_KG = H2_LHV_MJ_PER_KG / MJ_PER_KWH          # 33.333... kWh/kg
H2_MWH_PER_TONNE = H2_KWH_PER_KG                        # 33.333... MWh/t

KW_PER_MW = 1000.0
KWH_PER_MWH = 1000.0

MONTHS = tuple(range(1, 13))

# Calendar used when a dataset spans a real (non-leap) year.
DAYS_IN_MONTH = {1: 31, 2: 28, 3: 31, 4: 30, 5: 31, 6: 30,
                 7: 31, 8: 31, 9: 30, 10: 31, 11: 30, 12: 31}


def mwh_h2_from_tonnes(tonnes: float) -> float:
    return tonnes * H2_MWH_PER_TONNE


def tonnes_h2_from_mwh(mwh: float) -> float:
    return mwh / H2_MWH_PER_TONNE
