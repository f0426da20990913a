"""Scenario configuration, model assembly, solving, and result packaging.

A scenario is a declarative overlay on a dataset: an emission cap, technology
allow/forbid flags, national capacity ceilings, exogenous hydrogen demand and
its coupling mode, network-expansion freezes, and cost/parameter overrides.
`apply_scenario` resolves the overlay into ModelInputs (filtered projects,
hourly H2 load, segment assignment); `build_model` hands those to the sector
builders; `run_scenario` solves and post-processes.

Post-processing never trusts the solver's objective breakdown: cost categories
and every conservation balance are recomputed from primal values and the input
data through a separate path, and the relative gap to the solver objective is
stored with the result.

The decoupled coupling mode clones candidate electrolyzers and H2 storage into
a dedicated fleet (suffix "__hta") that alone serves exogenous hydrogen
demand; merging the two fleets maps any decoupled solution onto the coupled
model, so the coupled optimum can never cost more.

`dispatch_validation` re-runs operations over every calendar hour (mapped to
representative timepoints through the chronology) with capacities frozen at an
optimal plan's values and penalized slack on the demand balances, reporting
unserved energy.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import yaml

from . import carbon_chain, hydrogen_chain, power_core
from .errors import ScenarioError, SolverError, ValidationError
from .lp_backend import LinearProgram, Solution, solve
from .power_core import GRID, HTA, BuildContext
from .system_data import (
    CAPTURE_KINDS, COST_BASES, FOSSIL_H2_KINDS, G2P_KINDS, GENERATOR_KINDS,
    H2_STORAGE_KINDS, P2G_KINDS, PROJECT_KINDS, STORAGE_KINDS, CostRecord,
    Project, SeriesTable, SystemDataset, extract_series,
)
from .temporal import (
    ChronoHour, Horizon, TemporalStructure, Timepoint, build_chronology,
    build_standard_layout, daily_totals_from_hourly, timepoint_weight,
)
from .units import HOURS_PER_YEAR

log = logging.getLogger(__name__)

_CAP_MODES = ("none", "absolute", "fraction_of_base", "by_zone")
_PROFILE_MODES = ("electricity_shaped", "flat")
_COUPLINGS = ("coupled", "decoupled")
_FLAG_VALUES = ("allowed", "forbidden")
_OVERRIDE_FIELDS = ("capital", "fixed_om", "variable_om", "lifetime_years")
_PROJECT_OVERRIDE_FIELDS = (
    "efficiency", "charge_efficiency", "discharge_efficiency", "min_gen_fraction",
    "ramp_fraction_per_hour", "max_capacity", "capacity_credit", "capture_rate",
    "electricity_per_tonne", "storage_duration_h", "power_capacity")

_CONFIG_KEYS = {
    "name", "description", "emission_cap", "tech_flags", "capacity_caps",
    "nuclear_min_gen", "h2_demand", "coupling", "blue_h2", "network_expansion",
    "reserve_margin", "reserve_scope", "cost_overrides", "project_overrides",
}


@dataclass
class ScenarioConfig:
    name: str
    description: str = ""
    emission_cap_mode: str = "none"
    emission_cap_tonnes: Optional[float] = None
    emission_cap_fraction: Optional[float] = None
    base_emissions_tonnes: Optional[float] = None
    emission_cap_by_zone: dict[str, float] = field(default_factory=dict)
    tech_flags: dict[str, str] = field(default_factory=dict)
    capacity_caps: dict[str, float] = field(default_factory=dict)
    nuclear_min_gen: Optional[float] = None
    h2_demand_twh: float = 0.0
    h2_profile_mode: str = "electricity_shaped"
    coupling: str = "coupled"
    blue_h2: bool = False
    network_expansion: dict[str, bool] = field(default_factory=dict)
    reserve_margin: float = 0.15
    reserve_scope: str = "system"
    cost_overrides: list[dict] = field(default_factory=list)
    project_overrides: dict[str, dict] = field(default_factory=dict)

    def __post_init__(self):
        if self.emission_cap_mode not in _CAP_MODES:
            raise ScenarioError(
                f"scenario {self.name!r}: emission_cap mode "
                f"{self.emission_cap_mode!r} not in {_CAP_MODES}")
        if self.emission_cap_mode == "absolute" and self.emission_cap_tonnes is None:
            raise ScenarioError(
                f"scenario {self.name!r}: absolute emission cap needs tonnes")
        if self.emission_cap_mode == "fraction_of_base":
            if self.emission_cap_fraction is None or self.emission_cap_fraction < 0:
                raise ScenarioError(
                    f"scenario {self.name!r}: fraction_of_base cap needs a "
                    f"fraction >= 0")
        if self.h2_profile_mode not in _PROFILE_MODES:
            raise ScenarioError(
                f"scenario {self.name!r}: h2 profile mode "
                f"{self.h2_profile_mode!r} not in {_PROFILE_MODES}")
        if self.coupling not in _COUPLINGS:
            raise ScenarioError(
                f"scenario {self.name!r}: coupling {self.coupling!r} "
                f"not in {_COUPLINGS}")
        if self.h2_demand_twh < 0:
            raise ScenarioError(f"scenario {self.name!r}: negative H2 demand")
        for key, val in self.tech_flags.items():
            if val not in _FLAG_VALUES:
                raise ScenarioError(
                    f"scenario {self.name!r}: tech flag {key!r}={val!r} "
                    f"must be one of {_FLAG_VALUES}")
        if self.blue_h2 and self.tech_flags.get("ccs_retrofit") == "forbidden":
            raise ScenarioError(
                f"scenario {self.name!r}: blue_h2 requires point-source capture "
                f"but ccs_retrofit is forbidden")
        if self.reserve_scope not in ("system", "zone"):
            raise ScenarioError(
                f"scenario {self.name!r}: reserve_scope must be system or zone")
        if self.reserve_margin is not None and self.reserve_margin < 0:
            raise ScenarioError(f"scenario {self.name!r}: negative reserve margin")
        for ov in self.cost_overrides:
            bad = set(ov) - {"tech", "basis", "field", "value", "scale"}
            if bad or "tech" not in ov or "field" not in ov:
                raise ScenarioError(
                    f"scenario {self.name!r}: cost override needs tech+field "
                    f"(+value or scale), got {ov}")
            if ov["field"] not in _OVERRIDE_FIELDS:
                raise ScenarioError(
                    f"scenario {self.name!r}: cost override field {ov['field']!r} "
                    f"not in {_OVERRIDE_FIELDS}")
            if ("value" in ov) == ("scale" in ov):
                raise ScenarioError(
                    f"scenario {self.name!r}: cost override needs exactly one of "
                    f"value/scale: {ov}")
        for tech, fields in self.project_overrides.items():
            bad = set(fields) - set(_PROJECT_OVERRIDE_FIELDS)
            if bad:
                raise ScenarioError(
                    f"scenario {self.name!r}: project override for {tech!r} has "
                    f"unknown fields {sorted(bad)}")

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ScenarioError("scenario config must be a mapping")
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ScenarioError(f"unknown scenario config keys: {sorted(unknown)}")
        if "name" not in raw:
            raise ScenarioError("scenario config needs a name")
        cap = raw.get("emission_cap") or {}
        if not isinstance(cap, dict):
            raise ScenarioError("emission_cap must be a mapping")
        h2 = raw.get("h2_demand") or {}
        if not isinstance(h2, dict):
            raise ScenarioError("h2_demand must be a mapping")
        net = raw.get("network_expansion") or {}
        return cls(
            name=str(raw["name"]),
            description=str(raw.get("description", "")),
            emission_cap_mode=cap.get("mode", "none"),
            emission_cap_tonnes=cap.get("tonnes"),
            emission_cap_fraction=cap.get("fraction"),
            base_emissions_tonnes=cap.get("base_tonnes"),
            emission_cap_by_zone=dict(cap.get("tonnes_by_zone") or {}),
            tech_flags=dict(raw.get("tech_flags") or {}),
            capacity_caps=dict(raw.get("capacity_caps") or {}),
            nuclear_min_gen=raw.get("nuclear_min_gen"),
            h2_demand_twh=float(h2.get("annual_twh", 0.0)),
            h2_profile_mode=h2.get("mode", "electricity_shaped"),
            coupling=raw.get("coupling", "coupled"),
            blue_h2=bool(raw.get("blue_h2", False)),
            network_expansion={k: bool(v) for k, v in net.items()},
            reserve_margin=raw.get("reserve_margin", 0.15),
            reserve_scope=raw.get("reserve_scope", "system"),
            cost_overrides=list(raw.get("cost_overrides") or []),
            project_overrides=dict(raw.get("project_overrides") or {}),
        )

    @classmethod
    def from_yaml(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            raw = yaml.safe_load(fh)
        if raw is None:
            raise ScenarioError(f"{path}: empty scenario file")
        try:
            return cls.from_dict(raw)
        except ScenarioError as exc:
            raise ScenarioError(f"{Path(path).name}: {exc}") from None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "emission_cap": {
                "mode": self.emission_cap_mode,
                "tonnes": self.emission_cap_tonnes,
                "fraction": self.emission_cap_fraction,
                "base_tonnes": self.base_emissions_tonnes,
                "tonnes_by_zone": dict(self.emission_cap_by_zone),
            },
            "tech_flags": dict(self.tech_flags),
            "capacity_caps": dict(self.capacity_caps),
            "nuclear_min_gen": self.nuclear_min_gen,
            "h2_demand": {"annual_twh": self.h2_demand_twh,
                          "mode": self.h2_profile_mode},
            "coupling": self.coupling,
            "blue_h2": self.blue_h2,
            "network_expansion": dict(self.network_expansion),
            "reserve_margin": self.reserve_margin,
            "reserve_scope": self.reserve_scope,
            "cost_overrides": list(self.cost_overrides),
            "project_overrides": dict(self.project_overrides),
        }


@dataclass
class FixedCapacities:
    """Frozen totals for operational runs: project power/energy, links, sites."""

    project: dict[str, float] = field(default_factory=dict)
    energy: dict[str, float] = field(default_factory=dict)
    link: dict[str, float] = field(default_factory=dict)
    site: dict[str, float] = field(default_factory=dict)

    def get(self, kind: str, key: str) -> float:
        return getattr(self, kind).get(key, 0.0)


@dataclass
class ModelInputs:
    """A dataset with one scenario resolved onto it, ready to build."""

    name: str
    dataset: SystemDataset
    temporal: TemporalStructure
    series: SeriesTable
    projects: dict[str, Project]
    links: dict[str, "TransportLink"]
    costs: dict[tuple[str, str], CostRecord]
    config: ScenarioConfig
    segment_of: dict[str, str]
    h2_load: dict[tuple[str, str], float]
    h2_load_segment: str
    emission_cap_tonnes: Optional[float]
    emission_cap_by_zone: dict[str, float]
    reserve_margin: Optional[float]
    reserve_scope: str
    capacity_caps: list[tuple[str, tuple[str, ...], float]]
    fixed_capacities: Optional[FixedCapacities] = None
    unserved_penalty: Optional[float] = None

    def cost_for(self, tech: str, group: str,
                 required: bool = True) -> Optional[CostRecord]:
        for basis in COST_BASES:
            rec = self.costs.get((tech, basis))
            if rec is not None and rec.group == group:
                return rec
        if required:
            raise ValidationError(f"no {group}-basis cost record for tech {tech!r}")
        return None

    def fuel_price(self, fuel: str, zone: str) -> float:
        return self.dataset.fuel_price(fuel, zone)

    def emission_factor(self, fuel: str) -> float:
        return self.dataset.emission_factor(fuel)


def _apply_cost_overrides(costs: dict, overrides: list[dict],
                          scenario: str) -> dict:
    out = dict(costs)
    for ov in overrides:
        tech = ov["tech"]
        keys = [k for k in out
                if k[0] == tech and ("basis" not in ov or k[1] == ov["basis"])]
        if not keys:
            raise ScenarioError(
                f"scenario {scenario!r}: cost override matches no record: {ov}")
        for key in keys:
            rec = out[key]
            old = getattr(rec, ov["field"])
            new = ov["value"] if "value" in ov else (old or 0.0) * ov["scale"]
            out[key] = replace(rec, **{ov["field"]: new})
    return out


def _flagged(config: ScenarioConfig, prj: Project) -> bool:
    for key in (prj.kind, prj.tech):
        if config.tech_flags.get(key) == "forbidden":
            return True
    return False


def apply_scenario(dataset: SystemDataset, config: ScenarioConfig,
                   temporal: TemporalStructure,
                   series: Optional[SeriesTable] = None, *,
                   base_emissions: Optional[float] = None,
                   fixed_capacities: Optional[FixedCapacities] = None,
                   unserved_penalty: Optional[float] = None) -> ModelInputs:
    """Resolve a scenario overlay onto a dataset.

    Filters forbidden technologies (dropping both candidate and existing
    capacity, and any capture child riding on a dropped parent), applies cost
    and parameter overrides, freezes non-expandable networks, resolves the
    emission cap, shapes the hourly hydrogen load, and in decoupled mode
    synthesizes the dedicated production/storage fleet.
    """
    if series is None:
        series = extract_series(dataset, temporal)
        series.validate(dataset.zones.keys(), temporal)

    # a flag or override key that is neither a known kind nor a tech in this
    # dataset is almost certainly a typo; silently ignoring it would let a
    # supposedly-forbidden technology stay in the model
    techs = {p.tech for p in dataset.projects.values()}
    for label, keys in (("tech_flags", config.tech_flags),
                        ("project_overrides", config.project_overrides)):
        unknown = sorted(k for k in keys if k not in PROJECT_KINDS and k not in techs)
        if unknown:
            raise ScenarioError(
                f"scenario {config.name!r}: {label} key(s) {unknown} match no "
                f"project kind or tech in dataset {dataset.name!r}")

    projects: dict[str, Project] = {}
    for pid, prj in dataset.projects.items():
        if _flagged(config, prj):
            continue
        over = {}
        for key in (prj.kind, prj.tech):
            if key in config.project_overrides:
                over.update(config.project_overrides[key])
        if over:
            prj = replace(prj, **over)
        if config.nuclear_min_gen is not None and prj.kind == "nuclear":
            prj = replace(prj, min_gen_fraction=config.nuclear_min_gen)
        projects[pid] = prj
    # capture without its host is meaningless; drop it with the parent
    projects = {pid: p for pid, p in projects.items()
                if p.kind != "ccs_retrofit" or p.parent_project in projects}

    for prj in projects.values():
        if prj.kind in FOSSIL_H2_KINDS and not config.blue_h2:
            raise ScenarioError(
                f"scenario {config.name!r}: fossil hydrogen project {prj.id!r} "
                f"({prj.kind}) present but blue_h2 is false; forbid the kind via "
                f"tech_flags or enable blue_h2")

    links = {}
    for lid, link in dataset.links.items():
        if not config.network_expansion.get(link.commodity, True):
            link = replace(link, expandable=False)
        links[lid] = link

    costs = _apply_cost_overrides(dataset.costs, config.cost_overrides, config.name)

    if config.emission_cap_mode == "absolute":
        cap = config.emission_cap_tonnes
    elif config.emission_cap_mode == "fraction_of_base":
        base = config.base_emissions_tonnes
        if base is None:
            base = base_emissions
        if base is None:
            raise ScenarioError(
                f"scenario {config.name!r}: fraction_of_base cap needs "
                f"base_tonnes in the config or a base_emissions argument")
        cap = config.emission_cap_fraction * base
    else:
        cap = None
    cap_by_zone = dict(config.emission_cap_by_zone) \
        if config.emission_cap_mode == "by_zone" else {}

    annual_mwh = config.h2_demand_twh * 1e6
    shares = dict(dataset.h2_shares)
    if annual_mwh > 0 and not shares:
        # default split: each zone's share of annual electricity demand
        weights = {}
        for z in dataset.zones:
            weights[z] = sum(
                tp.hours_in_tmp * float(tp.weight) * series.zone_demand(z, tp.id)
                for tp in temporal.timepoints)
        total = sum(weights.values())
        if total <= 0:
            raise ScenarioError(
                f"scenario {config.name!r}: cannot derive H2 demand shares from "
                f"zero electricity demand; provide h2_demand.csv")
        shares = {z: w / total for z, w in weights.items()}
    h2_load = hydrogen_chain.build_h2_demand_profile(
        annual_mwh, shares, series, temporal, config.h2_profile_mode)

    segment_of = {pid: GRID for pid in projects}
    h2_load_segment = GRID
    if annual_mwh > 0 and config.coupling == "decoupled":
        h2_load_segment = HTA
        clones = {}
        for pid, prj in sorted(projects.items()):
            if prj.kind in P2G_KINDS + H2_STORAGE_KINDS and prj.candidate:
                cid = f"{pid}__hta"
                clones[cid] = replace(prj, id=cid, existing_capacity=0.0,
                                      existing_energy_mwh=None)
                segment_of[cid] = HTA
        projects.update(clones)
    if config.blue_h2:
        for pid, prj in projects.items():
            if prj.kind in FOSSIL_H2_KINDS:
                segment_of[pid] = h2_load_segment

    caps: list[tuple[str, tuple[str, ...], float]] = []
    for label in sorted(config.capacity_caps):
        tokens = {t.strip() for t in label.split("+")}
        ids = tuple(pid for pid, p in sorted(projects.items())
                    if p.kind in tokens or p.tech in tokens)
        if ids:
            caps.append((label.replace("+", "_"), ids, config.capacity_caps[label]))

    projects = dict(sorted(projects.items()))
    return ModelInputs(
        name=config.name, dataset=dataset, temporal=temporal, series=series,
        projects=projects, links=links, costs=costs, config=config,
        segment_of=segment_of, h2_load=h2_load, h2_load_segment=h2_load_segment,
        emission_cap_tonnes=cap, emission_cap_by_zone=cap_by_zone,
        reserve_margin=config.reserve_margin, reserve_scope=config.reserve_scope,
        capacity_caps=caps, fixed_capacities=fixed_capacities,
        unserved_penalty=unserved_penalty)


def build_model(inputs: ModelInputs) -> BuildContext:
    """Assemble the full LP for one scenario in deterministic order."""
    lp = LinearProgram(name=f"{inputs.dataset.name}__{inputs.name}")
    ctx = BuildContext(lp=lp, inputs=inputs)
    projects = list(inputs.projects.values())
    for prj in projects:
        power_core.add_project_capacity(ctx, prj)
    for prj in projects:
        if prj.kind in GENERATOR_KINDS:
            power_core.generator_dispatch(ctx, prj)
    for prj in projects:
        if prj.kind in STORAGE_KINDS:
            power_core.storage_dispatch(ctx, prj)
    for prj in projects:
        if prj.kind in P2G_KINDS:
            hydrogen_chain.p2g_dispatch(ctx, prj)
    for prj in projects:
        if prj.kind in G2P_KINDS:
            hydrogen_chain.g2p_dispatch(ctx, prj)
    for prj in projects:
        if prj.kind in FOSSIL_H2_KINDS:
            hydrogen_chain.fossil_h2_dispatch(ctx, prj)
    for prj in projects:
        if prj.kind in CAPTURE_KINDS:
            carbon_chain.capture_dispatch(ctx, prj)
    for link in inputs.links.values():
        power_core.link_flow(ctx, link)
    for zone_id in inputs.dataset.zones:
        carbon_chain.injection_dispatch(ctx, zone_id)
    power_core.power_balance(ctx)
    hydrogen_chain.h2_balance(ctx)
    carbon_chain.co2_balance(ctx)
    power_core.reserve_constraint(ctx)
    power_core.capacity_group_caps(ctx)
    carbon_chain.carbon_cap(ctx)
    return ctx


# ------------------------------------------------------------------ results

class ScenarioResult:
    """Solved-scenario summary: a plain deterministic dict with helpers."""

    def __init__(self, data: dict):
        self.data = data

    @property
    def status(self) -> str:
        return self.data["status"]

    @property
    def ok(self) -> bool:
        return self.status == "optimal"

    @property
    def objective(self) -> Optional[float]:
        return self.data["objective_usd"]

    @property
    def cost_categories(self) -> dict:
        return self.data["cost_categories"]

    @property
    def scenario_name(self) -> str:
        return self.data["scenario"]

    def to_json(self, path=None) -> str:
        text = json.dumps(self.data, indent=2) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, path) -> "ScenarioResult":
        with open(path) as fh:
            return cls(json.load(fh))

    def fixed_capacities(self) -> FixedCapacities:
        fixed = FixedCapacities()
        for row in self.data["capacity"]:
            fixed.project[row["project"]] = row["total"]
            if row.get("energy_total") is not None:
                fixed.energy[row["project"]] = row["energy_total"]
        for row in self.data["links"]:
            fixed.link[row["link"]] = row["total"]
        for row in self.data["sites"]:
            fixed.site[row["zone"]] = row["injection_capacity_tph"]
        return fixed


def _value(sol: Solution, ctx: BuildContext, key: tuple) -> float:
    var = ctx.index.get(key)
    return 0.0 if var is None else float(sol.values[var])


def _clean(v: float, eps: float = 1e-7) -> float:
    """Strip solver noise from reported quantities."""
    return 0.0 if abs(v) < eps else v


def _conservation_report(ctx: BuildContext, sol: Solution) -> dict:
    """Re-derive every balance from primal values and inputs (not LP rows)."""
    inputs = ctx.inputs
    x = lambda key: _value(sol, ctx, key)
    links_in: dict[str, list] = {}
    links_out: dict[str, list] = {}
    for link in inputs.links.values():
        links_out.setdefault(link.from_zone, []).append(link)
        links_in.setdefault(link.to_zone, []).append(link)

    def link_net(zone: str, tp: str, commodity: str) -> float:
        net = 0.0
        for link in links_in.get(zone, ()):
            if link.commodity == commodity:
                net += x(("flow", link.id, tp)) - x(("to_loss", link.id, tp))
        for link in links_out.get(zone, ()):
            if link.commodity == commodity:
                net -= x(("flow", link.id, tp)) + x(("from_loss", link.id, tp))
        return net

    by_zone: dict[str, list[Project]] = {}
    for prj in inputs.projects.values():
        by_zone.setdefault(prj.zone, []).append(prj)

    worst_power = worst_h2 = worst_co2 = 0.0
    for zone in inputs.dataset.zones:
        for tp in ctx.temporal.timepoints:
            load = ctx.series.zone_demand(zone, tp.id)
            net = link_net(zone, tp.id, "electricity") + x(("unserved", zone, tp.id))
            co2_net = link_net(zone, tp.id, "co2") - x(("inject", zone, tp.id))
            for prj in by_zone.get(zone, ()):
                if prj.kind in GENERATOR_KINDS:
                    net += x(("gen", prj.id, tp.id))
                elif prj.kind in ("battery", "pumped_hydro"):
                    net += x(("discharge", prj.id, tp.id)) - x(("charge", prj.id, tp.id))
                elif prj.kind in P2G_KINDS:
                    net -= x(("p2g_in", prj.id, tp.id))
                elif prj.kind in G2P_KINDS:
                    net += x(("g2p_out", prj.id, tp.id))
                elif prj.kind in CAPTURE_KINDS:
                    cap = x(("capture", prj.id, tp.id))
                    net -= prj.electricity_per_tonne * cap
                    co2_net += cap
            resid = abs(net - load) / max(1.0, abs(load))
            worst_power = max(worst_power, resid)
            worst_co2 = max(worst_co2, abs(co2_net))
    segments = {GRID, inputs.h2_load_segment}
    for seg in sorted(segments):
        for zone in inputs.dataset.zones:
            for tp in ctx.temporal.timepoints:
                load = inputs.h2_load.get((zone, tp.id), 0.0) \
                    if seg == inputs.h2_load_segment else 0.0
                net = x(("unserved_h2", seg, zone, tp.id))
                if seg == GRID:
                    net += link_net(zone, tp.id, "hydrogen")
                for prj in by_zone.get(zone, ()):
                    if inputs.segment_of.get(prj.id, GRID) != seg:
                        continue
                    if prj.kind in P2G_KINDS:
                        net += prj.efficiency * x(("p2g_in", prj.id, tp.id))
                    elif prj.kind in FOSSIL_H2_KINDS:
                        net += x(("h2_prod", prj.id, tp.id))
                    elif prj.kind in H2_STORAGE_KINDS:
                        net += (x(("discharge", prj.id, tp.id))
                                - x(("charge", prj.id, tp.id)))
                    elif prj.kind in G2P_KINDS and seg == GRID:
                        net -= x(("g2p_out", prj.id, tp.id)) / prj.efficiency
                resid = abs(net - load) / max(1.0, abs(load))
                worst_h2 = max(worst_h2, resid)
    return {
        "power_balance_max_rel_residual": worst_power,
        "h2_balance_max_rel_residual": worst_h2,
        "co2_balance_max_abs_residual": worst_co2,
        "weighted_hours_exact": ctx.temporal.total_weighted_hours() == HOURS_PER_YEAR,
    }


def _recompute_costs(ctx: BuildContext, sol: Solution) -> dict:
    """Independent cost ledger from primals and cost inputs, by category."""
    inputs = ctx.inputs
    rate = inputs.temporal.period.discount_rate
    x = lambda key: _value(sol, ctx, key)
    inv = fixed = vom = fuel = penalty = 0.0
    for prj in inputs.projects.values():
        if not ctx.fixed_mode:
            group = power_core._primary_group(prj)
            rec = inputs.cost_for(prj.tech, group, required=False)
            new = x(("new_cap", prj.id))
            if rec is not None:
                inv += new * rec.annualized_capital_per_unit(rate)
                fixed += (prj.existing_capacity + new) * rec.fixed_om_per_unit
            if prj.kind == "battery":
                erec = inputs.cost_for(prj.tech, "energy", required=False)
                if erec is not None:
                    enew = x(("new_energy", prj.id))
                    inv += enew * erec.annualized_capital_per_unit(rate)
                    fixed += (prj.existing_energy() + enew) * erec.fixed_om_per_unit
        for tp in ctx.temporal.timepoints:
            wh = ctx.wh(tp)
            if prj.kind in GENERATOR_KINDS:
                g = x(("gen", prj.id, tp.id))
                rec = inputs.cost_for(prj.tech, "power", required=False)
                if rec is not None:
                    vom += wh * rec.variable_om * g
                if prj.burns_fuel:
                    fuel += wh * g * prj.heat_rate_mmbtu_per_mwh * \
                        inputs.fuel_price(prj.fuel, prj.zone)
            elif prj.kind in STORAGE_KINDS:
                rec = inputs.cost_for(
                    prj.tech, "energy" if prj.is_h2_storage else "power",
                    required=False)
                if rec is not None:
                    vom += wh * rec.variable_om * x(("discharge", prj.id, tp.id))
            elif prj.kind in P2G_KINDS:
                rec = inputs.cost_for(prj.tech, "power", required=False)
                if rec is not None:
                    vom += wh * rec.variable_om * prj.efficiency * \
                        x(("p2g_in", prj.id, tp.id))
            elif prj.kind in G2P_KINDS:
                rec = inputs.cost_for(prj.tech, "power", required=False)
                if rec is not None:
                    vom += wh * rec.variable_om * x(("g2p_out", prj.id, tp.id))
            elif prj.kind in FOSSIL_H2_KINDS:
                q = x(("h2_prod", prj.id, tp.id))
                rec = inputs.cost_for(prj.tech, "power", required=False)
                if rec is not None:
                    vom += wh * rec.variable_om * q
                fuel += wh * q * prj.heat_rate_mmbtu_per_mwh * \
                    inputs.fuel_price(prj.fuel, prj.zone)
            elif prj.kind in CAPTURE_KINDS:
                rec = inputs.cost_for(prj.tech, "capture", required=False)
                if rec is not None:
                    vom += wh * rec.variable_om * x(("capture", prj.id, tp.id))
    if not ctx.fixed_mode:
        for link in inputs.links.values():
            new = x(("new_link", link.id))
            if new:
                inv += new * link.annualized_capital_per_unit(rate)
        for zone in inputs.dataset.zones.values():
            if zone.co2_storage_kind == "none":
                continue
            rec = inputs.cost_for(f"co2_storage_{zone.co2_storage_kind}", "capture",
                                  required=False)
            new = x(("new_site", zone.id))
            if rec is not None and new:
                inv += new * rec.annualized_capital_per_unit(rate)
                fixed += new * rec.fixed_om_per_unit
    if inputs.unserved_penalty is not None:
        for (seg_zone_tp, var) in ctx.index.items():
            if seg_zone_tp[0] == "unserved":
                _, zone, tp = seg_zone_tp
                penalty += ctx.wh(ctx.tp(tp)) * inputs.unserved_penalty * \
                    float(sol.values[var])
            elif seg_zone_tp[0] == "unserved_h2":
                tp = seg_zone_tp[3]
                penalty += ctx.wh(ctx.tp(tp)) * inputs.unserved_penalty * \
                    float(sol.values[var])
    return {"investment": inv, "fixed_om": fixed, "variable_om": vom,
            "fuel": fuel, "unserved_penalty": penalty}


def _capacity_unit(prj: Project) -> str:
    if prj.kind in H2_STORAGE_KINDS:
        return "MWh"
    if prj.kind in CAPTURE_KINDS:
        return "tph"
    return "MW"


def summarize(ctx: BuildContext, sol: Solution) -> ScenarioResult:
    """Aggregate a solution into the deterministic result payload.

    Everything stored here must be a pure function of the inputs so that
    two runs of the same scenario produce byte-identical reports; wall
    clock timings are logged, never stored.
    """
    inputs = ctx.inputs
    data: dict = {
        "schema": "gridcap-result-1",
        "scenario": inputs.name,
        "dataset": inputs.dataset.name,
        "status": sol.status,
        "message": sol.message if sol.status != "optimal" else "",
        "objective_usd": sol.objective,
        "model": {"variables": ctx.lp.n_variables,
                  "constraints": ctx.lp.n_constraints},
        "config": inputs.config.to_dict(),
    }
    if not sol.ok:
        data.update({"cost_categories": None, "capacity": [], "links": [],
                     "sites": [], "activity": [], "trade": [], "emissions": None,
                     "hydrogen": None, "demand": None, "lcoe_usd_per_mwh": None,
                     "levelized_total_energy": None, "unserved": None,
                     "conservation": None, "cost_check_rel_gap": None})
        return ScenarioResult(data)

    x = lambda key: _value(sol, ctx, key)
    costs = _recompute_costs(ctx, sol)
    total_cost = sum(costs.values())
    gap = abs(total_cost - sol.objective) / max(1.0, abs(sol.objective))
    data["cost_categories"] = costs
    data["cost_check_rel_gap"] = gap

    capacity = []
    for prj in inputs.projects.values():
        if ctx.fixed_mode:
            new, existing = 0.0, ctx.fixed_of("project", prj.id)
            enew, eexisting = 0.0, ctx.fixed_of("energy", prj.id)
        else:
            new, existing = x(("new_cap", prj.id)), prj.existing_capacity
            if prj.kind == "pumped_hydro":
                enew = prj.storage_duration_h * new
                eexisting = prj.storage_duration_h * prj.existing_capacity
            elif prj.is_h2_storage:
                enew, eexisting = new, existing
            else:
                enew, eexisting = x(("new_energy", prj.id)), prj.existing_energy()
        new, enew = _clean(new), _clean(enew)
        row = {"project": prj.id, "zone": prj.zone, "kind": prj.kind,
               "tech": prj.tech, "segment": inputs.segment_of.get(prj.id, GRID),
               "unit": _capacity_unit(prj),
               "existing": existing, "new": new, "total": existing + new}
        if prj.is_storage:
            row["energy_existing"] = eexisting
            row["energy_new"] = enew
            row["energy_total"] = eexisting + enew
        else:
            row["energy_total"] = None
        capacity.append(row)
    data["capacity"] = capacity

    data["links"] = []
    for link in inputs.links.values():
        if ctx.fixed_mode:
            new, existing = 0.0, ctx.fixed_of("link", link.id)
        else:
            new, existing = _clean(x(("new_link", link.id))), link.existing_capacity
        data["links"].append({"link": link.id, "commodity": link.commodity,
                              "from_zone": link.from_zone, "to_zone": link.to_zone,
                              "existing": existing, "new": new,
                              "total": existing + new})

    data["sites"] = []
    for zone in inputs.dataset.zones.values():
        if zone.co2_storage_kind == "none":
            continue
        cap = ctx.fixed_of("site", zone.id) if ctx.fixed_mode \
            else x(("new_site", zone.id))
        stored = sum(ctx.wh(tp) * x(("inject", zone.id, tp.id))
                     for tp in ctx.temporal.timepoints)
        data["sites"].append({"zone": zone.id, "kind": zone.co2_storage_kind,
                              "injection_capacity_tph": _clean(cap),
                              "stored_tonnes": _clean(stored),
                              "reservoir_tonnes": zone.co2_storage_capacity_tonnes})

    activity = []
    ed = 0.0
    for prj in inputs.projects.values():
        metrics: dict[str, float] = {}
        for tp in ctx.temporal.timepoints:
            wh = ctx.wh(tp)
            if prj.kind in GENERATOR_KINDS:
                metrics["gen_mwh"] = metrics.get("gen_mwh", 0.0) + \
                    wh * x(("gen", prj.id, tp.id))
            elif prj.kind in STORAGE_KINDS:
                metrics["charge_mwh"] = metrics.get("charge_mwh", 0.0) + \
                    wh * x(("charge", prj.id, tp.id))
                metrics["discharge_mwh"] = metrics.get("discharge_mwh", 0.0) + \
                    wh * x(("discharge", prj.id, tp.id))
            elif prj.kind in P2G_KINDS:
                e_in = wh * x(("p2g_in", prj.id, tp.id))
                metrics["elec_input_mwh"] = metrics.get("elec_input_mwh", 0.0) + e_in
                metrics["h2_output_mwh"] = metrics.get("h2_output_mwh", 0.0) + \
                    e_in * prj.efficiency
            elif prj.kind in G2P_KINDS:
                out = wh * x(("g2p_out", prj.id, tp.id))
                metrics["gen_mwh"] = metrics.get("gen_mwh", 0.0) + out
                metrics["h2_input_mwh"] = metrics.get("h2_input_mwh", 0.0) + \
                    out / prj.efficiency
            elif prj.kind in FOSSIL_H2_KINDS:
                metrics["h2_output_mwh"] = metrics.get("h2_output_mwh", 0.0) + \
                    wh * x(("h2_prod", prj.id, tp.id))
            elif prj.kind in CAPTURE_KINDS:
                metrics["capture_tonnes"] = metrics.get("capture_tonnes", 0.0) + \
                    wh * x(("capture", prj.id, tp.id))
        ed += metrics.get("h2_input_mwh", 0.0)
        for metric in sorted(metrics):
            activity.append({"project": prj.id, "zone": prj.zone, "kind": prj.kind,
                             "tech": prj.tech,
                             "segment": inputs.segment_of.get(prj.id, GRID),
                             "metric": metric, "annual": _clean(metrics[metric])})
    data["activity"] = activity

    data["trade"] = []
    for link in inputs.links.values():
        grossflow = sum(ctx.wh(tp) * abs(x(("flow", link.id, tp.id)))
                        for tp in ctx.temporal.timepoints)
        losses = sum(ctx.wh(tp) * (x(("from_loss", link.id, tp.id))
                                   + x(("to_loss", link.id, tp.id)))
                     for tp in ctx.temporal.timepoints)
        data["trade"].append({"link": link.id, "commodity": link.commodity,
                              "gross_flow": _clean(grossflow),
                              "losses": _clean(losses)})

    emissions_by_zone = {}
    for zone, terms in sorted(ctx.emissions.items()):
        total = sum(coeff * float(sol.values[var]) for var, coeff in terms)
        emissions_by_zone[zone] = total
    data["emissions"] = {"total_tonnes": sum(emissions_by_zone.values()),
                         "by_zone": emissions_by_zone}

    hd = sum(ctx.wh(ctx.tp(tp)) * load
             for (zone, tp), load in inputs.h2_load.items())
    p2g_cost = storage_cost = hta_cost = fossil_cost = 0.0
    if not ctx.fixed_mode:
        rate = inputs.temporal.period.discount_rate
        for prj in inputs.projects.values():
            rec = inputs.cost_for(prj.tech, power_core._primary_group(prj),
                                  required=False)
            if rec is None:
                continue
            new = x(("new_cap", prj.id))
            cost = new * rec.annualized_capital_per_unit(rate) + \
                (prj.existing_capacity + new) * rec.fixed_om_per_unit
            if prj.kind in P2G_KINDS:
                p2g_cost += cost
            elif prj.kind in H2_STORAGE_KINDS:
                storage_cost += cost
            elif prj.kind in FOSSIL_H2_KINDS:
                fossil_cost += cost
            else:
                continue
            if inputs.segment_of.get(prj.id, GRID) == HTA:
                hta_cost += cost
    data["hydrogen"] = {
        "ed_mwh": ed, "hd_mwh": hd,
        "p2g_capacity_cost_usd": p2g_cost,
        "h2_storage_capacity_cost_usd": storage_cost,
        "fossil_h2_capacity_cost_usd": fossil_cost,
        "hta_capacity_cost_usd": hta_cost,
    }

    elec_demand = sum(
        ctx.wh(tp) * ctx.series.zone_demand(z, tp.id)
        for z in inputs.dataset.zones for tp in ctx.temporal.timepoints)
    peak = max(sum(ctx.series.zone_demand(z, tp.id) for z in inputs.dataset.zones)
               for tp in ctx.temporal.timepoints)
    data["demand"] = {"electricity_mwh": elec_demand, "peak_mw": peak}
    data["lcoe_usd_per_mwh"] = (total_cost / elec_demand) if elec_demand > 0 else None
    # cost per unit of all delivered energy; denominator stated because the
    # convention is not universal
    total_energy = elec_demand + hd
    data["levelized_total_energy"] = {
        "usd_per_mwh": (total_cost / total_energy) if total_energy > 0 else None,
        "denominator": "electricity_demand_mwh + hd_mwh",
    }

    if inputs.unserved_penalty is not None:
        uns = unsh2 = 0.0
        worst = 0.0
        for key, var in ctx.index.items():
            if key[0] == "unserved":
                v = float(sol.values[var])
                uns += ctx.wh(ctx.tp(key[2])) * v
                worst = max(worst, v)
            elif key[0] == "unserved_h2":
                unsh2 += ctx.wh(ctx.tp(key[3])) * float(sol.values[var])
        data["unserved"] = {
            "electricity_mwh": uns,
            "electricity_pct": 100.0 * uns / elec_demand if elec_demand else 0.0,
            "worst_hour_mw": worst,
            "h2_mwh": unsh2,
            "h2_pct": 100.0 * unsh2 / hd if hd else 0.0,
        }
    else:
        data["unserved"] = None

    data["conservation"] = _conservation_report(ctx, sol)
    return ScenarioResult(data)


def run_scenario(dataset: SystemDataset, config: ScenarioConfig,
                 temporal: Optional[TemporalStructure] = None, *,
                 series: Optional[SeriesTable] = None,
                 tolerance: float = 1e-6,
                 base_emissions: Optional[float] = None) -> ScenarioResult:
    """Plan one scenario: apply, build, solve, summarize."""
    if temporal is None:
        temporal, _ = build_standard_layout(dataset.demand, _default_period())
    inputs = apply_scenario(dataset, config, temporal, series,
                            base_emissions=base_emissions)
    ctx = build_model(inputs)
    model = ctx.lp.assemble()
    t0 = time.perf_counter()
    sol = solve(model, tolerance)
    log.info("scenario %s: %s in %.2fs (%d vars, %d rows)", config.name,
             sol.status, time.perf_counter() - t0, ctx.lp.n_variables,
             ctx.lp.n_constraints)
    if sol.status == "error":
        raise SolverError(f"scenario {config.name!r}: {sol.message}")
    return summarize(ctx, sol)


def export_scenario_mps(dataset: SystemDataset, config: ScenarioConfig,
                        temporal: Optional[TemporalStructure] = None, *,
                        series: Optional[SeriesTable] = None,
                        base_emissions: Optional[float] = None) -> str:
    from .lp_backend import export_mps
    if temporal is None:
        temporal, _ = build_standard_layout(dataset.demand, _default_period())
    inputs = apply_scenario(dataset, config, temporal, series,
                            base_emissions=base_emissions)
    ctx = build_model(inputs)
    return export_mps(ctx.lp.assemble())


def _default_period():
    from .temporal import Period
    return Period("2050", discount_rate=0.08, dollar_year=2020)


# -------------------------------------------------- operational validation

def hourly_structures(temporal: TemporalStructure, series: SeriesTable,
                      h2_load: dict, chronology: list[ChronoHour],
                      zones) -> tuple[TemporalStructure, SeriesTable, dict]:
    """Expand representative data onto the full calendar via the chronology."""
    horizons: dict[tuple[int, int], Horizon] = {}
    tps: list[Timepoint] = []
    n = len(chronology)
    demand: dict[tuple[str, str], float] = {}
    cf: dict[tuple[str, str], float] = {}
    load: dict[tuple[str, str], float] = {}
    vre_ids = sorted({pid for (pid, _) in series.capacity_factor})
    w = timepoint_weight(n, 1)
    for entry in chronology:
        hkey = (entry.month, entry.day)
        if hkey not in horizons:
            horizons[hkey] = Horizon(
                id=f"d{entry.month:02d}{entry.day:02d}", month=entry.month,
                day_kind="median", day_index=entry.day)
        hid = horizons[hkey].id
        tid = f"{hid}_h{entry.hour:02d}"
        tps.append(Timepoint(id=tid, horizon_id=hid, hour_of_day=entry.hour,
                             hours_in_tmp=1, weight=w))
        for z in zones:
            demand[(z, tid)] = series.demand[(z, entry.timepoint_id)]
            if (z, entry.timepoint_id) in h2_load:
                load[(z, tid)] = h2_load[(z, entry.timepoint_id)]
        for pid in vre_ids:
            cf[(pid, tid)] = series.capacity_factor[(pid, entry.timepoint_id)]
    hourly_temporal = TemporalStructure(
        temporal.period, list(horizons.values()), tps)
    return hourly_temporal, SeriesTable(demand=demand, capacity_factor=cf), load


def dispatch_validation(result: ScenarioResult, dataset: SystemDataset,
                        config: ScenarioConfig, *,
                        temporal: Optional[TemporalStructure] = None,
                        series: Optional[SeriesTable] = None,
                        chronology: Optional[list[ChronoHour]] = None,
                        penalty: float = 1e4,
                        tolerance: float = 1e-6) -> ScenarioResult:
    """Fix an optimal plan's capacities and re-dispatch every calendar hour.

    Unserved energy appears as penalized slack on the power and hydrogen
    balances; the annual carbon cap is not re-imposed (it is a planning
    constraint, and the check's question is purely whether demand is met).
    """
    if not result.ok:
        raise ScenarioError(
            f"dispatch validation needs an optimal plan, got {result.status!r}")
    if temporal is None:
        temporal, _ = build_standard_layout(dataset.demand, _default_period())
    if chronology is None:
        chronology = build_chronology(
            temporal, daily_totals_from_hourly(dataset.demand))
    if series is None:
        series = extract_series(dataset, temporal)
    plan_inputs = apply_scenario(dataset, config, temporal, series)
    hourly_temporal, hourly_series, hourly_load = hourly_structures(
        temporal, series, plan_inputs.h2_load, chronology, dataset.zones)
    inputs = apply_scenario(dataset, config, hourly_temporal, hourly_series,
                            fixed_capacities=result.fixed_capacities(),
                            unserved_penalty=penalty)
    inputs.h2_load = hourly_load
    inputs.emission_cap_tonnes = None
    inputs.emission_cap_by_zone = {}
    ctx = build_model(inputs)
    model = ctx.lp.assemble()
    t0 = time.perf_counter()
    sol = solve(model, tolerance)
    log.info("dispatch %s: %s in %.2fs", config.name, sol.status,
             time.perf_counter() - t0)
    if sol.status == "error":
        raise SolverError(f"dispatch validation {config.name!r}: {sol.message}")
    if not sol.ok:
        raise SolverError(
            f"dispatch validation {config.name!r} should always be feasible "
            f"with slack, got {sol.status}: {sol.message}")
    return summarize(ctx, sol)
