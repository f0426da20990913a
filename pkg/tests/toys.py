"""Hand-built miniature systems with analytically tractable optima.

Toy cost sheets use pure fixed O&M (zero capital) wherever a hand calculation
wants round numbers: a power-basis record with fixed_om F costs exactly
F * 1000 dollars per MW-year, with no recovery-factor arithmetic. Series are
passed explicitly so each test controls demand and capacity factors
per timepoint.
"""

from gridcap.scenario_engine import ScenarioConfig, run_scenario
from gridcap.system_data import (
    CostRecord, Project, SeriesTable, SystemDataset, Zone,
)
from gridcap.temporal import (
    Horizon, Period, TemporalStructure, Timepoint, timepoint_weight,
)

PERIOD = Period("2050", 0.08, 2020)


def flat_temporal(n=4, hours=1.0, month=6):
    """One representative day of n timepoints covering the year uniformly."""
    h = Horizon(f"m{month:02d}med", month, "median")
    w = timepoint_weight(n, hours)
    tps = [Timepoint(f"t{i}", h.id, i, hours, w) for i in range(n)]
    return TemporalStructure(PERIOD, [h], tps)


def seasonal_temporal(per_season=2, hours=1.0):
    """Two seasons (January and July), one horizon each.

    Timepoint construction order w0..wN s0..sN matches calendar order, so
    demand lists passed to series_for line up season by season.
    """
    hw = Horizon("m01med", 1, "median")
    hs = Horizon("m07med", 7, "median")
    w = timepoint_weight(2 * per_season, hours)
    tps = [Timepoint(f"w{i}", hw.id, i, hours, w) for i in range(per_season)]
    tps += [Timepoint(f"s{i}", hs.id, i, hours, w) for i in range(per_season)]
    return TemporalStructure(PERIOD, [hw, hs], tps)


def series_for(temporal, demand, cf=None, zones=("z",)):
    """Build a SeriesTable from per-timepoint lists.

    demand: either one list (single zone) or {zone: list}; cf maps project id
    to a per-timepoint list. Lists follow temporal.timepoints order.
    """
    if not isinstance(demand, dict):
        demand = {zones[0]: demand}
    s = SeriesTable()
    tps = temporal.timepoints
    for zone, vals in demand.items():
        for tp, d in zip(tps, vals, strict=True):
            s.demand[(zone, tp.id)] = float(d)
    for pid, vals in (cf or {}).items():
        for tp, v in zip(tps, vals, strict=True):
            s.capacity_factor[(pid, tp.id)] = float(v)
    return s


def fom_cost(tech, fom, basis="power_kw", vom=0.0):
    return CostRecord(tech, basis, capital=0.0, fixed_om=fom, variable_om=vom)


def wind_gas_dataset(*, wind_fom=50.0, gas_fom=30.0, gas_vom=2.0,
                     gas_price=3.0, gas_ef=0.0531, gas_eff=0.5,
                     gas_min_gen=0.0, name="wg", zone=None):
    """One zone, a wind candidate and a gas candidate."""
    z = zone or Zone("z")
    projects = {
        "wind": Project("wind", z.id, "vre_gen", tech="wind"),
        "gas": Project("gas", z.id, "thermal_gen", tech="gas", fuel="gas",
                       efficiency=gas_eff, min_gen_fraction=gas_min_gen),
    }
    costs = {
        ("wind", "power_kw"): fom_cost("wind", wind_fom),
        ("gas", "power_kw"): fom_cost("gas", gas_fom, vom=gas_vom),
    }
    return SystemDataset(name=name, zones={z.id: z}, projects=projects,
                         costs=costs, fuel_prices={("gas", None): gas_price},
                         emission_factors={"gas": gas_ef})


def add_h2_chain(ds, *, zone="z", ely_fom=20.0, ely_eff=0.7,
                 cavern_fom=0.05, turbine_fom=25.0, turbine_eff=0.45):
    """Attach electrolyzer, underground storage, and an H2 turbine in place."""
    ds.projects["ely"] = Project("ely", zone, "p2g", tech="ely",
                                 efficiency=ely_eff)
    ds.projects["cavern"] = Project("cavern", zone, "h2_storage_underground",
                                    tech="cavern")
    ds.projects["h2t"] = Project("h2t", zone, "g2p_turbine", tech="h2t",
                                 efficiency=turbine_eff)
    ds.costs[("ely", "power_kw")] = fom_cost("ely", ely_fom)
    ds.costs[("cavern", "energy_kwh")] = fom_cost("cavern", cavern_fom,
                                                  basis="energy_kwh")
    ds.costs[("h2t", "power_kw")] = fom_cost("h2t", turbine_fom)
    return ds


def config(name="toy", **kw):
    kw.setdefault("reserve_margin", None)
    return ScenarioConfig(name=name, **kw)


def solve_toy(ds, temporal, series, cfg=None, **run_kw):
    return run_scenario(ds, cfg or config(), temporal, series=series, **run_kw)
