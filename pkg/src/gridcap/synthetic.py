"""Deterministic synthetic systems for demos and integration tests.

Nothing here is calibrated to a real grid; the point is a small dataset whose
optimum responds the way a planning model should (carbon caps pull in clean
capacity, hydrogen demand pulls in electrolyzers and caverns, removing the
grid makes things more expensive). All series come from smooth seasonal and
diurnal shapes plus seeded noise, so repeated builds are byte-identical.
"""

from __future__ import annotations

import math

import numpy as np
import pandas as pd

from .system_data import CostRecord, Project, SystemDataset, TransportLink, Zone
from .units import DAYS_IN_MONTH, MONTHS


def _calendar() -> list[tuple[int, int]]:
    return [(m, d) for m in MONTHS for d in range(1, DAYS_IN_MONTH[m] + 1)]


def demand_table(zone_bases: dict[str, float], seed: int = 7) -> pd.DataFrame:
    """Full-year hourly demand: seasonal + diurnal shape with seeded noise."""
    rng = np.random.default_rng(seed)
    rows = []
    for zone in sorted(zone_bases):
        base = zone_bases[zone]
        for month, day in _calendar():
            season = 1.0 + 0.18 * math.cos(2 * math.pi * (month - 1) / 12)
            daily = 1.0 + 0.08 * math.sin(2 * math.pi * day / 31) \
                + rng.normal(0.0, 0.02)
            for hour in range(24):
                diurnal = 1.0 + 0.22 * math.sin(math.pi * (hour - 5) / 14) \
                    if 5 <= hour <= 19 else 0.92
                value = base * season * daily * diurnal
                rows.append({"zone": zone, "month": month, "day": day,
                             "hour": hour, "demand_mw": round(max(value, 0.0), 3)})
    return pd.DataFrame(rows)


def cf_table(profiles: dict[str, str], seed: int = 11) -> pd.DataFrame:
    """Hourly capacity factors; profiles maps project id to wind / solar."""
    rng = np.random.default_rng(seed)
    rows = []
    for pid in sorted(profiles):
        shape = profiles[pid]
        if shape not in ("wind", "solar"):
            raise ValueError(f"unknown profile shape {shape!r} for {pid!r}")
        for month, day in _calendar():
            if shape == "wind":
                season = 0.38 + 0.14 * math.cos(2 * math.pi * (month - 1) / 12)
                day_level = season * (1.0 + 0.45 * math.sin(2 * math.pi * day / 9.3)) \
                    + rng.normal(0.0, 0.05)
            else:
                season = 0.62 + 0.28 * math.cos(2 * math.pi * (month - 7) / 12)
                day_level = season * (1.0 - abs(rng.normal(0.0, 0.18)))
            for hour in range(24):
                if shape == "wind":
                    cf = day_level * (1.0 + 0.12 * math.cos(math.pi * hour / 12))
                else:
                    sun = math.sin(math.pi * (hour - 6) / 12) if 6 <= hour <= 18 else 0.0
                    cf = day_level * max(sun, 0.0)
                rows.append({"project": pid, "month": month, "day": day,
                             "hour": hour, "cf": round(min(max(cf, 0.0), 1.0), 5)})
    return pd.DataFrame(rows)


def standard_costs() -> list[CostRecord]:
    # capital in $/kW, $/kWh, or $/tph by basis; fixed O&M per the same unit-year
    return [
        CostRecord("onshore_wind", "power_kw", capital=800, fixed_om=30,
                   variable_om=0.0, lifetime_years=25),
        CostRecord("utility_pv", "power_kw", capital=550, fixed_om=10,
                   variable_om=0.0, lifetime_years=25),
        CostRecord("gas_ccgt", "power_kw", capital=850, fixed_om=20,
                   variable_om=1.5, lifetime_years=25),
        CostRecord("nuclear", "power_kw", capital=6000, fixed_om=120,
                   variable_om=2.0, lifetime_years=40),
        CostRecord("battery", "power_kw", capital=150, fixed_om=5,
                   variable_om=0.2, lifetime_years=15),
        CostRecord("battery", "energy_kwh", capital=111, fixed_om=2,
                   variable_om=0.0, lifetime_years=15),
        CostRecord("electrolyzer", "power_kw", capital=283, fixed_om=14.15,
                   variable_om=0.1, lifetime_years=15),
        CostRecord("h2_turbine", "power_kw", capital=700, fixed_om=14,
                   variable_om=1.0, lifetime_years=25),
        CostRecord("h2_fuel_cell", "power_kw", capital=1200, fixed_om=24,
                   variable_om=0.5, lifetime_years=15),
        CostRecord("smr", "power_kw", capital=600, fixed_om=25,
                   variable_om=0.5, lifetime_years=25),
        CostRecord("underground_h2", "energy_kwh", capital=1.6, fixed_om=0.03,
                   variable_om=0.0, lifetime_years=40),
        CostRecord("tank_h2", "energy_kwh", capital=10.0, fixed_om=0.2,
                   variable_om=0.0, lifetime_years=25),
        CostRecord("ccs_retrofit", "capture_tph", capital=1.0e6, fixed_om=3.0e4,
                   variable_om=2.0, lifetime_years=25),
        CostRecord("dac", "capture_tph", capital=3.0e6, fixed_om=1.2e5,
                   variable_om=8.0, lifetime_years=25),
        CostRecord("co2_storage_onshore", "capture_tph", capital=1.0e5,
                   fixed_om=2000, variable_om=0.0, lifetime_years=30),
        CostRecord("co2_storage_offshore", "capture_tph", capital=2.2e5,
                   fixed_om=4400, variable_om=0.0, lifetime_years=30),
    ]


def two_zone_system(name: str = "twozone", *, h2: bool = True, ccs: bool = True,
                    blue: bool = True, hydro: bool = True,
                    coast_mw: float = 6000.0, inland_mw: float = 4000.0,
                    seed: int = 7) -> SystemDataset:
    """A coast/inland toy covering every chain the model knows.

    Coast has the wind and the salt caverns, inland has the solar, the legacy
    gas fleet, and the onshore CO2 reservoir; three corridors (AC line, H2
    pipeline, CO2 pipeline) connect them.
    """
    zones = {
        "coast": Zone(id="coast", name="Coast", underground_h2_allowed=True,
                      co2_storage_kind="offshore",
                      co2_storage_capacity_tonnes=5e8),
        "inland": Zone(id="inland", name="Inland", underground_h2_allowed=False,
                       co2_storage_kind="onshore",
                       co2_storage_capacity_tonnes=2e9),
    }
    projects = [
        Project(id="coast_wind", zone="coast", kind="vre_gen", tech="onshore_wind"),
        Project(id="inland_pv", zone="inland", kind="vre_gen", tech="utility_pv"),
        Project(id="coast_gas", zone="coast", kind="thermal_gen", tech="gas_ccgt",
                efficiency=0.55, fuel="gas", min_gen_fraction=0.0,
                ramp_fraction_per_hour=0.8),
        Project(id="inland_gas", zone="inland", kind="thermal_gen", tech="gas_ccgt",
                efficiency=0.55, fuel="gas", existing_capacity=1500.0,
                ramp_fraction_per_hour=0.8),
        Project(id="inland_nuclear", zone="inland", kind="nuclear", tech="nuclear",
                efficiency=0.33, min_gen_fraction=0.8,
                ramp_fraction_per_hour=0.25, max_capacity=8000.0),
        Project(id="coast_battery", zone="coast", kind="battery", tech="battery",
                charge_efficiency=0.95, discharge_efficiency=0.95),
        Project(id="inland_battery", zone="inland", kind="battery", tech="battery",
                charge_efficiency=0.95, discharge_efficiency=0.95),
    ]
    if hydro:
        projects.append(Project(
            id="inland_hydro", zone="inland", kind="hydro", tech="hydro",
            candidate=False, existing_capacity=500.0))
    if h2:
        projects += [
            Project(id="coast_ely", zone="coast", kind="p2g", tech="electrolyzer",
                    efficiency=0.7),
            Project(id="inland_ely", zone="inland", kind="p2g", tech="electrolyzer",
                    efficiency=0.7),
            Project(id="coast_cavern", zone="coast", kind="h2_storage_underground",
                    tech="underground_h2", charge_efficiency=0.99,
                    discharge_efficiency=0.99),
            Project(id="inland_tank", zone="inland", kind="h2_storage_tank",
                    tech="tank_h2", charge_efficiency=0.98,
                    discharge_efficiency=0.98),
            Project(id="coast_h2turbine", zone="coast", kind="g2p_turbine",
                    tech="h2_turbine", efficiency=0.45),
            Project(id="inland_h2fc", zone="inland", kind="g2p_fuel_cell",
                    tech="h2_fuel_cell", efficiency=0.5),
        ]
    if blue:
        projects.append(Project(
            id="inland_smr", zone="inland", kind="smr", tech="smr",
            efficiency=0.7, fuel="gas"))
    if ccs:
        projects += [
            Project(id="inland_gas_ccs", zone="inland", kind="ccs_retrofit",
                    tech="ccs_retrofit", parent_project="inland_gas",
                    capture_rate=0.85, electricity_per_tonne=0.25),
            Project(id="inland_dac", zone="inland", kind="dac", tech="dac",
                    electricity_per_tonne=1.6),
        ]
        if blue:
            projects.append(Project(
                id="inland_smr_ccs", zone="inland", kind="ccs_retrofit",
                tech="ccs_retrofit", parent_project="inland_smr",
                capture_rate=0.85, electricity_per_tonne=0.25))
    links = [
        TransportLink(id="ac_coast_inland", commodity="electricity",
                      from_zone="coast", to_zone="inland", length_km=600,
                      loss_rate_per_1000km=0.053, capital_per_unit_km=340,
                      lifetime_years=40, existing_capacity=800.0),
        TransportLink(id="h2p_coast_inland", commodity="hydrogen",
                      from_zone="coast", to_zone="inland", length_km=600,
                      loss_rate_per_1000km=0.013, capital_per_unit_km=226,
                      lifetime_years=40),
        TransportLink(id="co2p_inland_coast", commodity="co2",
                      from_zone="inland", to_zone="coast", length_km=600,
                      loss_rate_per_1000km=0.005, capital_per_unit_km=120,
                      lifetime_years=40),
    ]
    if not h2:
        links = [l for l in links if l.commodity != "hydrogen"]
    if not ccs:
        links = [l for l in links if l.commodity != "co2"]

    ds = SystemDataset(
        name=name,
        zones=zones,
        links={l.id: l for l in links},
        projects={p.id: p for p in projects},
        costs={(c.tech, c.basis): c for c in standard_costs()},
        fuel_prices={("gas", None): 3.5, ("gas", "coast"): 4.0},
        emission_factors={"gas": 0.0531},
        h2_shares={"coast": 0.55, "inland": 0.45} if h2 else {},
        demand=demand_table({"coast": coast_mw, "inland": inland_mw}, seed=seed),
        capacity_factors=cf_table(
            {"coast_wind": "wind", "inland_pv": "solar"}, seed=seed + 4),
    )
    if hydro:
        ds.hydro_month_cf = {
            ("inland_hydro", m): round(0.25 + 0.15 * math.sin(2 * math.pi * (m - 3) / 12), 4)
            for m in range(1, 13)}
    ds.validate()
    return ds


def micro_system(name: str = "micro", *, h2: bool = False,
                 base_mw: float = 1000.0, seed: int = 3) -> SystemDataset:
    """One zone, wind + gas + battery (optionally a full H2 loop). Fast to solve."""
    projects = [
        Project(id="z_wind", zone="z", kind="vre_gen", tech="onshore_wind"),
        Project(id="z_gas", zone="z", kind="thermal_gen", tech="gas_ccgt",
                efficiency=0.55, fuel="gas"),
        Project(id="z_battery", zone="z", kind="battery", tech="battery",
                charge_efficiency=0.95, discharge_efficiency=0.95),
    ]
    if h2:
        projects += [
            Project(id="z_ely", zone="z", kind="p2g", tech="electrolyzer",
                    efficiency=0.7),
            Project(id="z_cavern", zone="z", kind="h2_storage_underground",
                    tech="underground_h2", charge_efficiency=0.99,
                    discharge_efficiency=0.99),
            Project(id="z_h2turbine", zone="z", kind="g2p_turbine",
                    tech="h2_turbine", efficiency=0.45),
        ]
    ds = SystemDataset(
        name=name,
        zones={"z": Zone(id="z", name="Zone", underground_h2_allowed=True)},
        projects={p.id: p for p in projects},
        costs={(c.tech, c.basis): c for c in standard_costs()},
        fuel_prices={("gas", None): 3.5},
        emission_factors={"gas": 0.0531},
        h2_shares={"z": 1.0} if h2 else {},
        demand=demand_table({"z": base_mw}, seed=seed),
        capacity_factors=cf_table({"z_wind": "wind"}, seed=seed + 4),
    )
    ds.validate()
    return ds
