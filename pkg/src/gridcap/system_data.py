"""Dataset types, CSV loading/saving, validation, and cost arithmetic.

A SystemDataset bundles zones, transport links, projects, cost records, fuel
prices, emission factors, hourly series, and sector demand shares. Everything
is validated on construction with messages that point at the offending file,
row, and field. Loading then re-saving a dataset preserves every numeric field
exactly (cost records keep their sheet units and are converted where used, not
where parsed).

Internal units: MW, MWh (hydrogen counted at lower heating value), MMBtu,
tonnes, dollars. Cost sheets use the conventional $/kW, $/kWh, and $ per
tonne-per-hour bases; the `basis` column says which applies.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np
import pandas as pd

from .errors import ValidationError
from .temporal import TemporalStructure
from .units import MMBTU_PER_MWH

COMMODITIES = ("electricity", "hydrogen", "co2")

GENERATOR_KINDS = ("thermal_gen", "vre_gen", "hydro", "nuclear")
ELEC_STORAGE_KINDS = ("battery", "pumped_hydro")
H2_STORAGE_KINDS = ("h2_storage_tank", "h2_storage_underground")
STORAGE_KINDS = ELEC_STORAGE_KINDS + H2_STORAGE_KINDS
P2G_KINDS = ("p2g",)
G2P_KINDS = ("g2p_fuel_cell", "g2p_turbine")
FOSSIL_H2_KINDS = ("smr", "gasification")
CAPTURE_KINDS = ("ccs_retrofit", "dac")
PROJECT_KINDS = (GENERATOR_KINDS + STORAGE_KINDS + P2G_KINDS + G2P_KINDS
                 + FOSSIL_H2_KINDS + CAPTURE_KINDS)

# Kinds whose fuel column drives a burn rate (MMBtu per MWh of output / of H2)
FUEL_BURNING_KINDS = ("thermal_gen", "nuclear", "smr", "gasification")
# Kinds that can host a CCS retrofit
CCS_HOST_KINDS = ("thermal_gen", "smr", "gasification")

DEFAULT_CAPACITY_CREDIT = {
    "thermal_gen": 1.0, "nuclear": 1.0, "hydro": 1.0,
    "g2p_fuel_cell": 1.0, "g2p_turbine": 1.0,
}

COST_BASES = ("power_kw", "energy_kwh", "capture_tph")
_BASIS_GROUP = {"power_kw": "power", "energy_kwh": "energy", "capture_tph": "capture"}
_BASIS_SCALE = {"power_kw": 1000.0, "energy_kwh": 1000.0, "capture_tph": 1.0}

CO2_SITE_KINDS = ("onshore", "offshore")

_ID_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


def _check_id(value: str, what: str) -> str:
    if not isinstance(value, str) or not _ID_RE.match(value):
        raise ValidationError(
            f"{what}: identifier {value!r} must match [A-Za-z0-9_.-]+")
    return value


def capital_recovery_factor(discount_rate: float, lifetime_years: float) -> float:
    """Annual payment per dollar of capital; 1/lifetime at zero discount."""
    if lifetime_years <= 0:
        raise ValidationError(f"lifetime must be positive, got {lifetime_years}")
    if discount_rate < 0:
        raise ValidationError(f"discount rate must be >= 0, got {discount_rate}")
    if discount_rate == 0:
        return 1.0 / lifetime_years
    # expm1/log1p keep tiny rates from collapsing (1+r)^n - 1 to zero
    qm1 = math.expm1(lifetime_years * math.log1p(discount_rate))
    return discount_rate + discount_rate / qm1


def annualize_capital(capital: float, lifetime_years: Optional[float],
                      discount_rate: float) -> float:
    """Capital -> equivalent annual payment. Zero capital needs no lifetime."""
    if capital < 0:
        raise ValidationError(f"capital must be >= 0, got {capital}")
    if capital == 0:
        return 0.0
    if lifetime_years is None or lifetime_years <= 0:
        raise ValidationError(
            f"nonzero capital {capital} needs a positive lifetime, got {lifetime_years}")
    return capital * capital_recovery_factor(discount_rate, lifetime_years)


def derive_link_loss(loss_rate_per_1000km: float, length_km: float) -> float:
    """Fractional loss over a corridor; rejects losses reaching 100%."""
    if loss_rate_per_1000km < 0 or length_km < 0:
        raise ValidationError("loss rate and length must be >= 0")
    frac = loss_rate_per_1000km * length_km / 1000.0
    if frac >= 1.0:
        raise ValidationError(
            f"loss fraction {frac:.4f} >= 1 over {length_km} km "
            f"at {loss_rate_per_1000km}/1000km")
    return frac


@dataclass(frozen=True)
class Zone:
    id: str
    name: str = ""
    underground_h2_allowed: bool = False
    co2_storage_kind: str = "none"          # none | onshore | offshore
    co2_storage_capacity_tonnes: Optional[float] = None  # None = unbounded

    def __post_init__(self):
        _check_id(self.id, "zone")
        if self.co2_storage_kind not in ("none",) + CO2_SITE_KINDS:
            raise ValidationError(
                f"zone {self.id!r}: co2_storage_kind {self.co2_storage_kind!r} "
                f"not in none/onshore/offshore")
        cap = self.co2_storage_capacity_tonnes
        if cap is not None and cap < 0:
            raise ValidationError(f"zone {self.id!r}: co2 storage capacity must be >= 0")


@dataclass(frozen=True)
class TransportLink:
    id: str
    commodity: str
    from_zone: str
    to_zone: str
    length_km: float
    existing_capacity: float = 0.0    # MW, or tonnes/hour for co2
    expandable: bool = True
    loss_rate_per_1000km: float = 0.0
    capital_per_unit_km: float = 0.0  # $ per MW-km (or per tph-km)
    lifetime_years: Optional[float] = None

    def __post_init__(self):
        _check_id(self.id, "link")
        if self.commodity not in COMMODITIES:
            raise ValidationError(
                f"link {self.id!r}: commodity {self.commodity!r} not in {COMMODITIES}")
        if self.from_zone == self.to_zone:
            raise ValidationError(f"link {self.id!r}: from_zone equals to_zone")
        if self.length_km < 0 or self.existing_capacity < 0 or self.capital_per_unit_km < 0:
            raise ValidationError(f"link {self.id!r}: negative length/capacity/capital")
        derive_link_loss(self.loss_rate_per_1000km, self.length_km)

    @property
    def loss_fraction(self) -> float:
        return derive_link_loss(self.loss_rate_per_1000km, self.length_km)

    def annualized_capital_per_unit(self, discount_rate: float) -> float:
        total = self.capital_per_unit_km * self.length_km
        return annualize_capital(total, self.lifetime_years, discount_rate)


@dataclass(frozen=True)
class Project:
    """One asset (existing, candidate, or both) of a given kind in a zone.

    Capacity denomination by kind: generators, P2G (electric input), and G2P
    (electric output) in MW; H2 storage in MWh of energy; capture kinds in
    tonnes/hour. `tech` is the cost-sheet label (defaults to kind).
    """

    id: str
    zone: str
    kind: str
    tech: str = ""
    candidate: bool = True
    existing_capacity: float = 0.0
    existing_energy_mwh: Optional[float] = None
    max_capacity: Optional[float] = None
    efficiency: float = 1.0
    charge_efficiency: float = 1.0
    discharge_efficiency: float = 1.0
    storage_duration_h: Optional[float] = None
    power_capacity: Optional[float] = None   # fixed MW bound for H2 storage flows
    min_gen_fraction: float = 0.0
    ramp_fraction_per_hour: float = 1.0
    fuel: Optional[str] = None
    capacity_credit: Optional[float] = None
    capture_rate: Optional[float] = None           # ccs_retrofit: fraction of flue CO2
    electricity_per_tonne: Optional[float] = None  # MWh per tonne captured
    parent_project: Optional[str] = None

    def __post_init__(self):
        _check_id(self.id, "project")
        if self.kind not in PROJECT_KINDS:
            raise ValidationError(
                f"project {self.id!r}: kind {self.kind!r} not in {PROJECT_KINDS}")
        if not self.tech:
            object.__setattr__(self, "tech", self.kind)
        if self.existing_capacity < 0:
            raise ValidationError(f"project {self.id!r}: existing capacity must be >= 0")
        if self.max_capacity is not None and self.max_capacity < self.existing_capacity:
            raise ValidationError(
                f"project {self.id!r}: max_capacity {self.max_capacity} below "
                f"existing {self.existing_capacity}")
        for nm in ("efficiency", "charge_efficiency", "discharge_efficiency"):
            v = getattr(self, nm)
            if not (0 < v <= 1.0):
                raise ValidationError(
                    f"project {self.id!r}: {nm} must be in (0, 1], got {v}")
        if not (0 <= self.min_gen_fraction <= 1):
            raise ValidationError(f"project {self.id!r}: min_gen_fraction not in [0,1]")
        if self.ramp_fraction_per_hour <= 0:
            raise ValidationError(f"project {self.id!r}: ramp fraction must be > 0")
        if self.kind == "ccs_retrofit":
            if not self.parent_project:
                raise ValidationError(f"project {self.id!r}: ccs_retrofit needs parent_project")
            if self.capture_rate is None or not (0 < self.capture_rate <= 1):
                raise ValidationError(
                    f"project {self.id!r}: ccs_retrofit needs capture_rate in (0,1]")
        if self.kind in CAPTURE_KINDS and self.electricity_per_tonne is None:
            raise ValidationError(
                f"project {self.id!r}: {self.kind} needs electricity_per_tonne")
        if self.capacity_credit is not None and not (0 <= self.capacity_credit <= 1):
            raise ValidationError(f"project {self.id!r}: capacity_credit not in [0,1]")

    @property
    def is_storage(self) -> bool:
        return self.kind in STORAGE_KINDS

    @property
    def is_h2_storage(self) -> bool:
        return self.kind in H2_STORAGE_KINDS

    @property
    def burns_fuel(self) -> bool:
        return self.kind in FUEL_BURNING_KINDS and self.fuel is not None

    @property
    def heat_rate_mmbtu_per_mwh(self) -> float:
        """Fuel input per unit of output (electric MWh, or MWh-H2 for reformers)."""
        return MMBTU_PER_MWH / self.efficiency

    @property
    def default_capacity_credit(self) -> float:
        if self.capacity_credit is not None:
            return self.capacity_credit
        return DEFAULT_CAPACITY_CREDIT.get(self.kind, 0.0)

    def existing_energy(self) -> float:
        if self.existing_energy_mwh is not None:
            return self.existing_energy_mwh
        if self.storage_duration_h is not None:
            return self.storage_duration_h * self.existing_capacity
        return 0.0


@dataclass(frozen=True)
class CostRecord:
    """Costs in sheet units; converted where used so saves echo loads exactly.

    basis: power_kw ($/kW, $/kW-yr), energy_kwh ($/kWh, $/kWh-yr), or
    capture_tph ($ per tonne/hour). variable_om is $/MWh of primary activity
    ($/tonne for capture techs); it is never basis-scaled.
    """

    tech: str
    basis: str
    capital: float = 0.0
    fixed_om: float = 0.0
    variable_om: float = 0.0
    lifetime_years: Optional[float] = None

    def __post_init__(self):
        if self.basis not in COST_BASES:
            raise ValidationError(
                f"cost {self.tech!r}: basis {self.basis!r} not in {COST_BASES}")
        if self.capital < 0 or self.fixed_om < 0:
            raise ValidationError(f"cost {self.tech!r}: negative capital or fixed O&M")
        if self.capital > 0 and (self.lifetime_years is None or self.lifetime_years <= 0):
            raise ValidationError(
                f"cost {self.tech!r}: nonzero capital needs a positive lifetime")

    @property
    def group(self) -> str:
        return _BASIS_GROUP[self.basis]

    @property
    def capital_per_unit(self) -> float:
        """$ per MW / MWh / (tonne/hour)."""
        return self.capital * _BASIS_SCALE[self.basis]

    @property
    def fixed_om_per_unit(self) -> float:
        return self.fixed_om * _BASIS_SCALE[self.basis]

    def annualized_capital_per_unit(self, discount_rate: float) -> float:
        return annualize_capital(self.capital_per_unit, self.lifetime_years, discount_rate)


@dataclass
class SeriesTable:
    """Per-timepoint demand and capacity factors, already paired to a layout."""

    demand: dict[tuple[str, str], float] = field(default_factory=dict)
    capacity_factor: dict[tuple[str, str], float] = field(default_factory=dict)
    h2_demand: dict[tuple[str, str], float] = field(default_factory=dict)

    def validate(self, zone_ids: Iterable[str], temporal: TemporalStructure) -> None:
        tps = [tp.id for tp in temporal.timepoints]
        for z in zone_ids:
            for t in tps:
                if (z, t) not in self.demand:
                    raise ValidationError(f"series: missing demand for zone {z!r}, {t!r}")
        expected = {(z, t) for z in zone_ids for t in tps}
        extra = set(self.demand) - expected
        if extra:
            raise ValidationError(f"series: unexpected demand keys {sorted(extra)[:3]}")
        for key, v in self.demand.items():
            if v < 0 or not math.isfinite(v):
                raise ValidationError(f"series: demand at {key} is {v}")
        for key, v in self.capacity_factor.items():
            if not (0.0 <= v <= 1.0 + 1e-9):
                raise ValidationError(f"series: capacity factor at {key} is {v}")

    def zone_demand(self, zone: str, tp: str) -> float:
        return self.demand[(zone, tp)]

    def cf(self, project: str, tp: str) -> float:
        try:
            return self.capacity_factor[(project, tp)]
        except KeyError:
            raise ValidationError(
                f"no capacity factor series for project {project!r} at {tp!r}") from None


@dataclass
class SystemDataset:
    name: str = "dataset"
    zones: dict[str, Zone] = field(default_factory=dict)
    links: dict[str, TransportLink] = field(default_factory=dict)
    projects: dict[str, Project] = field(default_factory=dict)
    costs: dict[tuple[str, str], CostRecord] = field(default_factory=dict)
    fuel_prices: dict[tuple[str, Optional[str]], float] = field(default_factory=dict)
    emission_factors: dict[str, float] = field(default_factory=dict)
    h2_shares: dict[str, float] = field(default_factory=dict)
    demand: Optional[pd.DataFrame] = None
    capacity_factors: Optional[pd.DataFrame] = None
    hydro_month_cf: dict[tuple[str, int], float] = field(default_factory=dict)
    series: Optional[SeriesTable] = None
    table_counts: dict[str, int] = field(default_factory=dict)

    def validate(self) -> None:
        for link in self.links.values():
            for z in (link.from_zone, link.to_zone):
                if z not in self.zones:
                    raise ValidationError(
                        f"link {link.id!r}: zone {z!r} not in zones table")
        for prj in self.projects.values():
            if prj.zone not in self.zones:
                raise ValidationError(
                    f"project {prj.id!r}: zone {prj.zone!r} not in zones table")
            if prj.kind == "h2_storage_underground":
                if not self.zones[prj.zone].underground_h2_allowed:
                    raise ValidationError(
                        f"project {prj.id!r}: underground H2 storage in zone "
                        f"{prj.zone!r} which does not allow it")
            if prj.kind == "ccs_retrofit":
                parent = self.projects.get(prj.parent_project)
                if parent is None:
                    raise ValidationError(
                        f"project {prj.id!r}: parent {prj.parent_project!r} not found")
                if parent.kind not in CCS_HOST_KINDS:
                    raise ValidationError(
                        f"project {prj.id!r}: parent kind {parent.kind!r} cannot "
                        f"host capture (must be one of {CCS_HOST_KINDS})")
                if parent.zone != prj.zone:
                    raise ValidationError(
                        f"project {prj.id!r}: capture must sit in the parent's zone")
                if parent.fuel is None:
                    raise ValidationError(
                        f"project {prj.id!r}: parent {parent.id!r} burns no fuel")
            if prj.burns_fuel:
                self.fuel_price(prj.fuel, prj.zone)  # raises if absent
        for (fuel, zone), price in self.fuel_prices.items():
            if zone is not None and zone not in self.zones:
                raise ValidationError(f"fuel price ({fuel!r}): zone {zone!r} unknown")
            if price < 0:
                raise ValidationError(f"fuel price ({fuel!r}, {zone!r}) is negative")
        for fuel, ef in self.emission_factors.items():
            if ef < 0:
                raise ValidationError(f"emission factor for {fuel!r} is negative")
        if self.h2_shares:
            for z in self.h2_shares:
                if z not in self.zones:
                    raise ValidationError(f"h2 demand share: zone {z!r} unknown")
            total = sum(self.h2_shares.values())
            if abs(total - 1.0) > 1e-6:
                raise ValidationError(f"h2 demand shares sum to {total}, expected 1")
            if any(v < 0 for v in self.h2_shares.values()):
                raise ValidationError("h2 demand shares must be >= 0")
        for (prj_id, month), cf in self.hydro_month_cf.items():
            if prj_id not in self.projects:
                raise ValidationError(f"hydro cf: project {prj_id!r} unknown")
            if not (0 <= cf <= 1):
                raise ValidationError(f"hydro cf for {prj_id!r} month {month} not in [0,1]")

    def cost_for(self, tech: str, group: str,
                 required: bool = True) -> Optional[CostRecord]:
        """Cost record by tech label and basis group (power/energy/capture)."""
        for basis, g in _BASIS_GROUP.items():
            if g == group and (tech, basis) in self.costs:
                return self.costs[(tech, basis)]
        if required:
            raise ValidationError(f"no {group}-basis cost record for tech {tech!r}")
        return None

    def fuel_price(self, fuel: str, zone: str) -> float:
        if (fuel, zone) in self.fuel_prices:
            return self.fuel_prices[(fuel, zone)]
        if (fuel, None) in self.fuel_prices:
            return self.fuel_prices[(fuel, None)]
        raise ValidationError(f"no price for fuel {fuel!r} (zone {zone!r} or national)")

    def emission_factor(self, fuel: str) -> float:
        if fuel not in self.emission_factors:
            raise ValidationError(f"no emission factor for fuel {fuel!r}")
        return self.emission_factors[fuel]

    def summary(self) -> dict[str, int]:
        out = dict(self.table_counts)
        out.setdefault("zones", len(self.zones))
        out.setdefault("links", len(self.links))
        out.setdefault("projects", len(self.projects))
        out.setdefault("costs", len(self.costs))
        if self.demand is not None:
            out.setdefault("demand_rows", len(self.demand))
        return out

    # ------------------------------------------------------------------ save

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        zrows = []
        srows = []
        for z in self.zones.values():
            zrows.append({"zone": z.id, "name": z.name,
                          "underground_h2_allowed": z.underground_h2_allowed})
            if z.co2_storage_kind != "none":
                srows.append({"zone": z.id, "kind": z.co2_storage_kind,
                              "capacity_tonnes": z.co2_storage_capacity_tonnes})
        pd.DataFrame(zrows).to_csv(d / "zones.csv", index=False)
        if srows:
            pd.DataFrame(srows).to_csv(d / "co2_sites.csv", index=False)
        if self.links:
            pd.DataFrame([{
                "link": l.id, "commodity": l.commodity, "from_zone": l.from_zone,
                "to_zone": l.to_zone, "length_km": l.length_km,
                "existing_capacity": l.existing_capacity, "expandable": l.expandable,
                "loss_rate_per_1000km": l.loss_rate_per_1000km,
                "capital_per_unit_km": l.capital_per_unit_km,
                "lifetime_years": l.lifetime_years,
            } for l in self.links.values()]).to_csv(d / "links.csv", index=False)
        pd.DataFrame([{
            "project": p.id, "zone": p.zone, "kind": p.kind, "tech": p.tech,
            "candidate": p.candidate, "existing_capacity": p.existing_capacity,
            "existing_energy_mwh": p.existing_energy_mwh,
            "max_capacity": p.max_capacity, "efficiency": p.efficiency,
            "charge_efficiency": p.charge_efficiency,
            "discharge_efficiency": p.discharge_efficiency,
            "storage_duration_h": p.storage_duration_h,
            "power_capacity": p.power_capacity,
            "min_gen_fraction": p.min_gen_fraction,
            "ramp_fraction_per_hour": p.ramp_fraction_per_hour,
            "fuel": p.fuel, "capacity_credit": p.capacity_credit,
            "capture_rate": p.capture_rate,
            "electricity_per_tonne": p.electricity_per_tonne,
            "parent_project": p.parent_project,
        } for p in self.projects.values()]).to_csv(d / "projects.csv", index=False)
        pd.DataFrame([{
            "tech": c.tech, "basis": c.basis, "capital": c.capital,
            "fixed_om": c.fixed_om, "variable_om": c.variable_om,
            "lifetime_years": c.lifetime_years,
        } for c in self.costs.values()]).to_csv(d / "costs.csv", index=False)
        if self.fuel_prices:
            pd.DataFrame([{
                "fuel": fuel, "zone": zone if zone is not None else "",
                "usd_per_mmbtu": price,
            } for (fuel, zone), price in self.fuel_prices.items()
            ]).to_csv(d / "fuel_prices.csv", index=False)
        if self.emission_factors:
            pd.DataFrame([{"fuel": f, "tonnes_per_mmbtu": ef}
                          for f, ef in self.emission_factors.items()
                          ]).to_csv(d / "emission_factors.csv", index=False)
        if self.h2_shares:
            pd.DataFrame([{"zone": z, "annual_share": s}
                          for z, s in self.h2_shares.items()
                          ]).to_csv(d / "h2_demand.csv", index=False)
        if self.demand is not None:
            self.demand.to_csv(d / "demand.csv", index=False)
        if self.capacity_factors is not None and len(self.capacity_factors):
            self.capacity_factors.to_csv(d / "capacity_factors.csv", index=False)
        if self.hydro_month_cf:
            pd.DataFrame([{"project": p, "month": m, "cf": cf}
                          for (p, m), cf in self.hydro_month_cf.items()
                          ]).to_csv(d / "hydro_cf.csv", index=False)


# ---------------------------------------------------------------------- load

def _is_blank(v) -> bool:
    return v is None or (isinstance(v, float) and math.isnan(v)) or \
        (isinstance(v, str) and not v.strip())


def _opt_float(v, where: str) -> Optional[float]:
    if _is_blank(v):
        return None
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: expected a number, got {v!r}") from None


def _req_float(v, where: str, default: Optional[float] = None) -> float:
    out = _opt_float(v, where)
    if out is None:
        if default is not None:
            return default
        raise ValidationError(f"{where}: value is required")
    return out


def _as_bool(v, where: str, default: Optional[bool] = None) -> bool:
    if _is_blank(v):
        if default is None:
            raise ValidationError(f"{where}: value is required")
        return default
    s = str(v).strip().lower()
    if s in ("true", "1", "yes", "y", "t"):
        return True
    if s in ("false", "0", "no", "n", "f"):
        return False
    raise ValidationError(f"{where}: expected a boolean, got {v!r}")


def _opt_str(v) -> Optional[str]:
    if _is_blank(v):
        return None
    return str(v).strip()


def _read_table(path: Path, required: bool, columns: Iterable[str]) -> Optional[pd.DataFrame]:
    if not path.exists():
        if required:
            raise ValidationError(f"missing required input file {path.name}")
        return None
    try:
        df = pd.read_csv(path)
    except Exception as exc:
        raise ValidationError(f"{path.name}: cannot parse ({exc})") from None
    missing = set(columns) - set(df.columns)
    if missing:
        raise ValidationError(f"{path.name}: missing columns {sorted(missing)}")
    return df


def load_system_inputs(directory) -> SystemDataset:
    """Load and validate a dataset directory; see README for the file schema."""
    d = Path(directory)
    if not d.is_dir():
        raise ValidationError(f"dataset directory {d} does not exist")
    ds = SystemDataset(name=d.name)

    zdf = _read_table(d / "zones.csv", True, ["zone"])
    sites = {}
    sdf = _read_table(d / "co2_sites.csv", False, ["zone", "kind"])
    if sdf is not None:
        for i, row in sdf.iterrows():
            where = f"co2_sites.csv row {i + 2}"
            z = _opt_str(row["zone"])
            kind = _opt_str(row["kind"])
            if kind not in CO2_SITE_KINDS:
                raise ValidationError(f"{where}: kind {kind!r} not in {CO2_SITE_KINDS}")
            if z in sites:
                raise ValidationError(f"{where}: duplicate site for zone {z!r}")
            cap = _opt_float(row.get("capacity_tonnes"), where)
            sites[z] = (kind, cap)
        ds.table_counts["co2_sites"] = len(sdf)
    for i, row in zdf.iterrows():
        where = f"zones.csv row {i + 2}"
        zid = _opt_str(row["zone"])
        if zid is None:
            raise ValidationError(f"{where}: blank zone id")
        if zid in ds.zones:
            raise ValidationError(f"{where}: duplicate zone {zid!r}")
        kind, cap = sites.pop(zid, ("none", None))
        try:
            ds.zones[zid] = Zone(
                id=zid, name=_opt_str(row.get("name")) or zid,
                underground_h2_allowed=_as_bool(
                    row.get("underground_h2_allowed"), where, default=False),
                co2_storage_kind=kind, co2_storage_capacity_tonnes=cap)
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from None
    if sites:
        raise ValidationError(f"co2_sites.csv: unknown zones {sorted(sites)}")
    ds.zones = dict(sorted(ds.zones.items()))
    ds.table_counts["zones"] = len(ds.zones)

    cdf = _read_table(d / "costs.csv", True, ["tech", "basis", "capital"])
    for i, row in cdf.iterrows():
        where = f"costs.csv row {i + 2}"
        try:
            rec = CostRecord(
                tech=_opt_str(row["tech"]) or "",
                basis=_opt_str(row["basis"]) or "",
                capital=_req_float(row["capital"], where, default=0.0),
                fixed_om=_req_float(row.get("fixed_om"), where, default=0.0),
                variable_om=_req_float(row.get("variable_om"), where, default=0.0),
                lifetime_years=_opt_float(row.get("lifetime_years"), where))
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from None
        key = (rec.tech, rec.basis)
        if key in ds.costs:
            raise ValidationError(f"{where}: duplicate cost record for {key}")
        ds.costs[key] = rec
    ds.costs = dict(sorted(ds.costs.items()))
    ds.table_counts["costs"] = len(ds.costs)

    ldf = _read_table(d / "links.csv", False,
                      ["link", "commodity", "from_zone", "to_zone", "length_km"])
    if ldf is not None:
        for i, row in ldf.iterrows():
            where = f"links.csv row {i + 2}"
            try:
                link = TransportLink(
                    id=_opt_str(row["link"]) or "",
                    commodity=_opt_str(row["commodity"]) or "",
                    from_zone=_opt_str(row["from_zone"]) or "",
                    to_zone=_opt_str(row["to_zone"]) or "",
                    length_km=_req_float(row["length_km"], where),
                    existing_capacity=_req_float(
                        row.get("existing_capacity"), where, default=0.0),
                    expandable=_as_bool(row.get("expandable"), where, default=True),
                    loss_rate_per_1000km=_req_float(
                        row.get("loss_rate_per_1000km"), where, default=0.0),
                    capital_per_unit_km=_req_float(
                        row.get("capital_per_unit_km"), where, default=0.0),
                    lifetime_years=_opt_float(row.get("lifetime_years"), where))
            except ValidationError as exc:
                raise ValidationError(f"{where}: {exc}") from None
            if link.id in ds.links:
                raise ValidationError(f"{where}: duplicate link {link.id!r}")
            ds.links[link.id] = link
        ds.links = dict(sorted(ds.links.items()))
        ds.table_counts["links"] = len(ds.links)

    pdf = _read_table(d / "projects.csv", True, ["project", "zone", "kind"])
    for i, row in pdf.iterrows():
        where = f"projects.csv row {i + 2}"
        try:
            prj = Project(
                id=_opt_str(row["project"]) or "",
                zone=_opt_str(row["zone"]) or "",
                kind=_opt_str(row["kind"]) or "",
                tech=_opt_str(row.get("tech")) or "",
                candidate=_as_bool(row.get("candidate"), where, default=True),
                existing_capacity=_req_float(
                    row.get("existing_capacity"), where, default=0.0),
                existing_energy_mwh=_opt_float(row.get("existing_energy_mwh"), where),
                max_capacity=_opt_float(row.get("max_capacity"), where),
                efficiency=_req_float(row.get("efficiency"), where, default=1.0),
                charge_efficiency=_req_float(
                    row.get("charge_efficiency"), where, default=1.0),
                discharge_efficiency=_req_float(
                    row.get("discharge_efficiency"), where, default=1.0),
                storage_duration_h=_opt_float(row.get("storage_duration_h"), where),
                power_capacity=_opt_float(row.get("power_capacity"), where),
                min_gen_fraction=_req_float(
                    row.get("min_gen_fraction"), where, default=0.0),
                ramp_fraction_per_hour=_req_float(
                    row.get("ramp_fraction_per_hour"), where, default=1.0),
                fuel=_opt_str(row.get("fuel")),
                capacity_credit=_opt_float(row.get("capacity_credit"), where),
                capture_rate=_opt_float(row.get("capture_rate"), where),
                electricity_per_tonne=_opt_float(
                    row.get("electricity_per_tonne"), where),
                parent_project=_opt_str(row.get("parent_project")))
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from None
        if prj.id in ds.projects:
            raise ValidationError(f"{where}: duplicate project {prj.id!r}")
        ds.projects[prj.id] = prj
    ds.projects = dict(sorted(ds.projects.items()))
    ds.table_counts["projects"] = len(ds.projects)

    xdf = _read_table(d / "existing_capacity.csv", False, ["zone"])
    if xdf is not None:
        by_zone_tech = {(p.zone, p.tech): pid for pid, p in ds.projects.items()}
        for i, row in xdf.iterrows():
            where = f"existing_capacity.csv row {i + 2}"
            z = _opt_str(row["zone"])
            if z not in ds.zones:
                raise ValidationError(f"{where}: unknown zone {z!r}")
            for col in xdf.columns:
                if col == "zone":
                    continue
                val = _opt_float(row[col], f"{where} col {col!r}")
                if val is None:
                    val = 0.0  # blank cells mean zero capacity
                pid = by_zone_tech.get((z, col))
                if pid is None:
                    if val > 0:
                        raise ValidationError(
                            f"{where}: capacity {val} for tech {col!r} in zone {z!r} "
                            f"matches no project")
                    continue
                ds.projects[pid] = replace(ds.projects[pid], existing_capacity=val)
        ds.table_counts["existing_capacity"] = len(xdf)

    fdf = _read_table(d / "fuel_prices.csv", False, ["fuel", "usd_per_mmbtu"])
    if fdf is not None:
        for i, row in fdf.iterrows():
            where = f"fuel_prices.csv row {i + 2}"
            fuel = _opt_str(row["fuel"])
            zone = _opt_str(row.get("zone"))
            if zone in (None, "national"):
                zone = None
            key = (fuel, zone)
            if key in ds.fuel_prices:
                raise ValidationError(f"{where}: duplicate price for {key}")
            ds.fuel_prices[key] = _req_float(row["usd_per_mmbtu"], where)
        ds.table_counts["fuel_prices"] = len(fdf)

    edf = _read_table(d / "emission_factors.csv", False, ["fuel", "tonnes_per_mmbtu"])
    if edf is not None:
        for i, row in edf.iterrows():
            where = f"emission_factors.csv row {i + 2}"
            fuel = _opt_str(row["fuel"])
            if fuel in ds.emission_factors:
                raise ValidationError(f"{where}: duplicate factor for {fuel!r}")
            ds.emission_factors[fuel] = _req_float(row["tonnes_per_mmbtu"], where)
        ds.table_counts["emission_factors"] = len(edf)

    hdf = _read_table(d / "h2_demand.csv", False, ["zone", "annual_share"])
    if hdf is not None:
        for i, row in hdf.iterrows():
            where = f"h2_demand.csv row {i + 2}"
            z = _opt_str(row["zone"])
            if z in ds.h2_shares:
                raise ValidationError(f"{where}: duplicate share for zone {z!r}")
            ds.h2_shares[z] = _req_float(row["annual_share"], where)
        ds.table_counts["h2_demand"] = len(hdf)

    ddf = _read_table(d / "demand.csv", True,
                      ["zone", "month", "day", "hour", "demand_mw"])
    ds.demand = ddf
    ds.table_counts["demand_rows"] = len(ddf)

    cfd = _read_table(d / "capacity_factors.csv", False,
                      ["project", "month", "day", "hour", "cf"])
    if cfd is not None:
        ds.capacity_factors = cfd
        ds.table_counts["capacity_factor_rows"] = len(cfd)

    hcf = _read_table(d / "hydro_cf.csv", False, ["project", "month", "cf"])
    if hcf is not None:
        for i, row in hcf.iterrows():
            where = f"hydro_cf.csv row {i + 2}"
            key = (_opt_str(row["project"]), int(row["month"]))
            if key in ds.hydro_month_cf:
                raise ValidationError(f"{where}: duplicate entry for {key}")
            ds.hydro_month_cf[key] = _req_float(row["cf"], where)
        ds.table_counts["hydro_cf"] = len(hcf)

    ds.validate()
    return ds


def extract_series(dataset: SystemDataset,
                   temporal: TemporalStructure) -> SeriesTable:
    """Slice representative-day demand/CF values out of full-year tables.

    Timepoints spanning several hours take the mean over their block. If the
    dataset already carries a prebuilt SeriesTable it is returned as-is.
    """
    if dataset.series is not None:
        return dataset.series
    if dataset.demand is None:
        raise ValidationError("dataset has neither an hourly demand table nor a "
                              "prebuilt series")
    table = SeriesTable()
    dmap: dict[tuple[str, int, int, int], float] = {}
    for row in dataset.demand.itertuples(index=False):
        dmap[(str(row.zone), int(row.month), int(row.day), int(row.hour))] = \
            float(row.demand_mw)

    def block_mean(source: Mapping, key_head: tuple, horizon, tp, what: str) -> float:
        vals = []
        for hh in range(tp.hour_of_day, tp.hour_of_day + int(tp.hours_in_tmp)):
            key = key_head + (horizon.month, horizon.day_index, hh)
            if key not in source:
                raise ValidationError(
                    f"{what}: no value for {key_head[0]!r} at month {horizon.month} "
                    f"day {horizon.day_index} hour {hh}")
            vals.append(source[key])
        return float(np.mean(vals))

    for h in temporal.horizons:
        for tp in temporal.horizon_timepoints(h.id):
            for z in dataset.zones:
                table.demand[(z, tp.id)] = block_mean(dmap, (z,), h, tp, "demand.csv")

    vre = [p for p in dataset.projects.values() if p.kind == "vre_gen"]
    if vre:
        if dataset.capacity_factors is None:
            raise ValidationError(
                f"capacity_factors.csv required: dataset has VRE projects "
                f"({vre[0].id!r}, ...)")
        cmap: dict[tuple[str, int, int, int], float] = {}
        for row in dataset.capacity_factors.itertuples(index=False):
            cmap[(str(row.project), int(row.month), int(row.day), int(row.hour))] = \
                float(row.cf)
        for prj in vre:
            for h in temporal.horizons:
                for tp in temporal.horizon_timepoints(h.id):
                    table.capacity_factor[(prj.id, tp.id)] = block_mean(
                        cmap, (prj.id,), h, tp, "capacity_factors.csv")

    table.validate(dataset.zones.keys(), temporal)
    return table
