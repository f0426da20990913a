"""Levelized-cost accounting and report emission.

Three hydrogen cost perspectives, all in $/MWh-H2 (LHV) with $/kg companions:

- direct: annualized production + storage capacity cost plus electricity
  purchased at a given price, divided by hydrogen delivered. Applied to the
  whole fleet this is the integrated producer's view; applied to a dedicated
  (decoupled) fleet it prices off-grid-accounted hydrogen.
- system delta: total system cost with exogenous hydrogen demand minus the
  cost of the same system without it, divided by that demand. Captures every
  interaction, including reshaped power-sector investment.
- fossil benchmark: an existing reformer at a given capacity factor and fuel
  price, no capital (sunk), for the replacement-cost comparison.

On a system with constant returns to scale and a dedicated fleet the direct
and system-delta views coincide; sector coupling makes the delta view cheaper.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional

from .errors import ValidationError
from .units import H2_MWH_PER_TONNE, HOURS_PER_YEAR, MMBTU_PER_MWH


def usd_per_kg(usd_per_mwh: float) -> float:
    """$/MWh-H2 (LHV) to $/kg."""
    return usd_per_mwh * H2_MWH_PER_TONNE / 1000.0


_H2_UNIT_MWH = {
    "mwh": 1.0,
    "twh": 1e6,
    "kg": H2_MWH_PER_TONNE / 1000.0,
    "tonne": H2_MWH_PER_TONNE,
    "mt": H2_MWH_PER_TONNE * 1e6,
}


def convert_h2(value: float, src: str, dst: str) -> float:
    """Hydrogen quantity conversion at LHV (120 MJ/kg, 33.33 kWh/kg)."""
    try:
        return value * _H2_UNIT_MWH[src.lower()] / _H2_UNIT_MWH[dst.lower()]
    except KeyError as exc:
        raise ValidationError(
            f"unsupported hydrogen unit {exc.args[0]!r}; "
            f"known: {sorted(_H2_UNIT_MWH)}") from None


def lcoe(total_cost_usd: float, demand_mwh: float) -> float:
    if demand_mwh <= 0:
        raise ValidationError(f"demand must be positive, got {demand_mwh}")
    return total_cost_usd / demand_mwh


def lcoh_conventional(capacity_cost_usd: float, lcoe_usd_per_mwh: float,
                      ed_mwh: float, hd_mwh: float, efficiency: float,
                      mode: str = "eq1") -> float:
    """Producer-view hydrogen cost with electricity implied by efficiency.

    eq1 spreads the capacity cost and electricity purchases over all hydrogen
    (reconversion ED plus exogenous HD); eq2 is the same expression restricted
    to the exogenous demand alone. With ED = 0 the two coincide exactly.
    """
    if not (0 < efficiency <= 1):
        raise ValidationError(f"efficiency not in (0,1]: {efficiency}")
    if mode == "eq1":
        h2 = ed_mwh + hd_mwh
    elif mode == "eq2":
        h2 = hd_mwh
    else:
        raise ValidationError(f"mode must be eq1 or eq2, got {mode!r}")
    if h2 <= 0:
        raise ValidationError(f"{mode}: hydrogen quantity must be positive, got {h2}")
    return (capacity_cost_usd + lcoe_usd_per_mwh * h2 / efficiency) / h2


def lcoh_direct(capacity_cost_usd: float, electricity_price_usd_per_mwh: float,
                electricity_mwh: float, h2_mwh: float) -> float:
    """Capacity cost plus metered electricity purchases over hydrogen delivered."""
    if h2_mwh <= 0:
        raise ValidationError(f"hydrogen output must be positive, got {h2_mwh}")
    return (capacity_cost_usd
            + electricity_price_usd_per_mwh * electricity_mwh) / h2_mwh


def lcoh_system_delta(cost_with_usd: float, cost_without_usd: float,
                      hd_mwh: float) -> float:
    """Marginal system cost of serving exogenous hydrogen demand."""
    if hd_mwh <= 0:
        raise ValidationError(f"hydrogen demand must be positive, got {hd_mwh}")
    return (cost_with_usd - cost_without_usd) / hd_mwh


def gray_h2_cost(fixed_om_usd_per_kw_yr: float, fuel_usd_per_mmbtu: float,
                 efficiency: float, capacity_factor: float = 1.0) -> float:
    """$/MWh-H2 from an existing (sunk-capital) reformer."""
    if not (0 < capacity_factor <= 1):
        raise ValidationError(f"capacity factor not in (0,1]: {capacity_factor}")
    if not (0 < efficiency <= 1):
        raise ValidationError(f"efficiency not in (0,1]: {efficiency}")
    fixed = fixed_om_usd_per_kw_yr * 1000.0 / (HOURS_PER_YEAR * capacity_factor)
    return fixed + fuel_usd_per_mmbtu * MMBTU_PER_MWH / efficiency


def _activity_sum(result, metric: str, segment: Optional[str] = None,
                  kinds: Optional[tuple] = None) -> float:
    total = 0.0
    for row in result.data["activity"]:
        if row["metric"] != metric:
            continue
        if segment is not None and row["segment"] != segment:
            continue
        if kinds is not None and row["kind"] not in kinds:
            continue
        total += row["annual"]
    return total


def lcoh_summary(result, base=None) -> dict:
    """All applicable hydrogen cost views for one solved scenario.

    `base` is the same system solved without the exogenous hydrogen demand;
    the system-delta view needs it. The dedicated view exists only when the
    scenario actually carries a dedicated fleet. Views that do not apply come
    back as None rather than a guess.
    """
    h = result.data["hydrogen"]
    served = h["ed_mwh"] + h["hd_mwh"]
    out = {
        "ed_mwh": h["ed_mwh"],
        "hd_mwh": h["hd_mwh"],
        "integrated_usd_per_mwh": None,
        "dedicated_usd_per_mwh": None,
        "system_delta_usd_per_mwh": None,
    }
    price = result.data["lcoe_usd_per_mwh"]
    if base is not None:
        price = base.data["lcoe_usd_per_mwh"]
    if served > 0 and price is not None:
        cap_cost = (h["p2g_capacity_cost_usd"] + h["h2_storage_capacity_cost_usd"]
                    - h["hta_capacity_cost_usd"])
        elec = _activity_sum(result, "elec_input_mwh", segment="grid")
        grid_h2 = (_activity_sum(result, "h2_output_mwh", segment="grid",
                                 kinds=("p2g",)))
        if grid_h2 > 0:
            out["integrated_usd_per_mwh"] = lcoh_direct(
                cap_cost, price, elec, grid_h2)
    if h["hta_capacity_cost_usd"] > 0 and h["hd_mwh"] > 0 and price is not None:
        elec = _activity_sum(result, "elec_input_mwh", segment="hta")
        out["dedicated_usd_per_mwh"] = lcoh_direct(
            h["hta_capacity_cost_usd"], price, elec, h["hd_mwh"])
    if base is not None and h["hd_mwh"] > 0:
        out["system_delta_usd_per_mwh"] = lcoh_system_delta(
            result.objective, base.objective, h["hd_mwh"])
    for key in list(out):
        if key.endswith("_usd_per_mwh") and out[key] is not None:
            out[key.replace("_usd_per_mwh", "_usd_per_kg")] = usd_per_kg(out[key])
    return out


# ---------------------------------------------------------------- reporting

def _write_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def emit_report(result, out_dir, base=None) -> list[str]:
    """Write report.json plus flat CSV views; returns the filenames written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    result.to_json(out / "report.json")
    written.append("report.json")

    rows = [("scenario", result.data["scenario"]),
            ("dataset", result.data["dataset"]),
            ("status", result.status),
            ("objective_usd", result.objective)]
    if result.ok:
        for cat, usd in result.cost_categories.items():
            rows.append((f"cost_{cat}_usd", usd))
        rows += [
            ("lcoe_usd_per_mwh", result.data["lcoe_usd_per_mwh"]),
            ("levelized_total_energy_usd_per_mwh",
             result.data["levelized_total_energy"]["usd_per_mwh"]),
            ("levelized_total_energy_denominator",
             result.data["levelized_total_energy"]["denominator"]),
            ("electricity_demand_mwh", result.data["demand"]["electricity_mwh"]),
            ("peak_demand_mw", result.data["demand"]["peak_mw"]),
            ("emissions_tonnes", result.data["emissions"]["total_tonnes"]),
            ("h2_reconversion_mwh", result.data["hydrogen"]["ed_mwh"]),
            ("h2_exogenous_mwh", result.data["hydrogen"]["hd_mwh"]),
        ]
        for key, value in sorted(lcoh_summary(result, base).items()):
            if key.startswith(("integrated", "dedicated", "system_delta")):
                rows.append((f"lcoh_{key}", value))
        if result.data["unserved"] is not None:
            rows.append(("unserved_electricity_pct",
                         result.data["unserved"]["electricity_pct"]))
            rows.append(("unserved_h2_pct", result.data["unserved"]["h2_pct"]))
    _write_csv(out / "report.csv",
               [{"metric": k, "value": v} for k, v in rows],
               ["metric", "value"])
    written.append("report.csv")

    if result.ok:
        _write_csv(out / "capacity.csv", result.data["capacity"],
                   ["project", "zone", "kind", "tech", "segment", "unit",
                    "existing", "new", "total",
                    "energy_existing", "energy_new", "energy_total"])
        written.append("capacity.csv")
        _write_csv(out / "energy.csv", result.data["activity"],
                   ["project", "zone", "kind", "tech", "segment", "metric",
                    "annual"])
        written.append("energy.csv")
        trade = {row["link"]: dict(row) for row in result.data["trade"]}
        for row in result.data["links"]:
            trade[row["link"]].update(row)
        _write_csv(out / "trade.csv", [trade[k] for k in sorted(trade)],
                   ["link", "commodity", "from_zone", "to_zone",
                    "existing", "new", "total", "gross_flow", "losses"])
        written.append("trade.csv")
    return written


_KIND_COLUMNS = ("vre_gen", "thermal_gen", "nuclear", "hydro", "battery",
                 "p2g", "g2p_turbine", "g2p_fuel_cell", "smr",
                 "h2_storage_underground", "h2_storage_tank",
                 "ccs_retrofit", "dac")


_COMPARE_NUMERIC = ("objective_usd", "lcoe_usd_per_mwh", "emissions_tonnes",
                    "ed_mwh", "hd_mwh",
                    "cost_investment", "cost_fixed_om", "cost_variable_om",
                    "cost_fuel", "cost_unserved_penalty")


def compare_results(results: list, out_path=None) -> list[dict]:
    """One row per scenario: headline numbers, cost categories, new capacity.

    Comparing exactly two optimal results also appends a per-column delta row
    (second minus first) and a percent-change row.
    """
    rows = []
    for res in results:
        row = {"scenario": res.data["scenario"], "status": res.status,
               "objective_usd": res.objective}
        if res.ok:
            row["lcoe_usd_per_mwh"] = res.data["lcoe_usd_per_mwh"]
            row["emissions_tonnes"] = res.data["emissions"]["total_tonnes"]
            row["ed_mwh"] = res.data["hydrogen"]["ed_mwh"]
            row["hd_mwh"] = res.data["hydrogen"]["hd_mwh"]
            for cat, usd in res.cost_categories.items():
                row[f"cost_{cat}"] = usd
            by_kind: dict[str, float] = {}
            for cap in res.data["capacity"]:
                by_kind[cap["kind"]] = by_kind.get(cap["kind"], 0.0) + cap["new"]
            for kind in _KIND_COLUMNS:
                row[f"new_{kind}"] = by_kind.get(kind, 0.0)
        rows.append(row)
    if len(results) == 2 and all(r.ok for r in results):
        fields = _COMPARE_NUMERIC + tuple(f"new_{k}" for k in _KIND_COLUMNS)
        delta = {"scenario": "delta", "status": ""}
        pct = {"scenario": "pct_change", "status": ""}
        for key in fields:
            a, b = rows[0].get(key), rows[1].get(key)
            if a is None or b is None:
                continue
            delta[key] = b - a
            pct[key] = 100.0 * (b - a) / a if a else None
        rows += [delta, pct]
    if out_path is not None:
        columns = ["scenario", "status"] + list(_COMPARE_NUMERIC) + \
                  [f"new_{k}" for k in _KIND_COLUMNS]
        _write_csv(Path(out_path), rows, columns)
    return rows
