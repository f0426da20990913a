"""Power-sector model building: capacity, dispatch, storage, network, balance.

This module owns the shared BuildContext that all sector builders write into.
Zone-level power injections and withdrawals accumulate as (variable, coeff)
term lists per (zone, timepoint); the balance constraint at the end equates
their sum with end-use demand. The hydrogen and carbon modules keep their own
term ledgers on the same context and reuse the storage and link machinery
defined here.

Sign conventions for net power by asset class: generators contribute their
gross output; storage contributes discharge minus charge; electrolysis
contributes minus its electric input; hydrogen-to-power contributes its
output; capture units contribute minus their electricity penalty.

Capacity handling has two modes. In planning mode candidate projects get a
new-capacity variable and limits are written as rows involving it. With fixed
capacities (the 8760-hour operational check) every limit collapses to a plain
variable bound, which keeps that model small.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import ValidationError
from .lp_backend import SENSE_EQ, SENSE_GE, SENSE_LE, LinearProgram
from .system_data import (
    ELEC_STORAGE_KINDS, G2P_KINDS, GENERATOR_KINDS, H2_STORAGE_KINDS, Project,
    TransportLink,
)
from .temporal import TemporalStructure, Timepoint

GRID = "grid"   # the power-sector hydrogen balance segment
HTA = "hta"     # dedicated (decoupled) hydrogen balance segment

Term = tuple[int, float]


@dataclass
class BuildContext:
    """Mutable assembly state shared by the sector builders."""

    lp: LinearProgram
    inputs: "ModelInputs"  # scenario_engine.ModelInputs; duck-typed here
    power: dict[tuple[str, str], list[Term]] = field(default_factory=dict)
    h2: dict[tuple[str, str, str], list[Term]] = field(default_factory=dict)
    co2: dict[tuple[str, str], list[Term]] = field(default_factory=dict)
    # annual weighted emission terms (tonnes), per zone
    emissions: dict[str, list[Term]] = field(default_factory=dict)
    index: dict[tuple, int] = field(default_factory=dict)
    new_cap: dict[str, int] = field(default_factory=dict)
    new_energy: dict[str, int] = field(default_factory=dict)
    new_link: dict[str, int] = field(default_factory=dict)
    new_site: dict[str, int] = field(default_factory=dict)

    # ------------------------------------------------------------ plumbing

    @property
    def temporal(self) -> TemporalStructure:
        return self.inputs.temporal

    def tp(self, tp_id: str) -> Timepoint:
        cache = self.__dict__.setdefault("_tp_cache", None)
        if cache is None:
            cache = {t.id: t for t in self.temporal.timepoints}
            self.__dict__["_tp_cache"] = cache
        return cache[tp_id]

    @property
    def series(self):
        return self.inputs.series

    def reg(self, key: tuple, var: int) -> int:
        self.index[key] = var
        return var

    def add_power(self, zone: str, tp: str, var: int, coeff: float) -> None:
        self.power.setdefault((zone, tp), []).append((var, coeff))

    def add_h2(self, segment: str, zone: str, tp: str, var: int, coeff: float) -> None:
        self.h2.setdefault((segment, zone, tp), []).append((var, coeff))

    def add_co2(self, zone: str, tp: str, var: int, coeff: float) -> None:
        self.co2.setdefault((zone, tp), []).append((var, coeff))

    def add_emission(self, zone: str, var: int, annual_tonnes_per_unit: float) -> None:
        self.emissions.setdefault(zone, []).append((var, annual_tonnes_per_unit))

    def wh(self, tp: Timepoint) -> float:
        """Annualizing factor hours * weight for one timepoint."""
        return tp.hours_in_tmp * float(tp.weight)

    @property
    def fixed_mode(self) -> bool:
        return self.inputs.fixed_capacities is not None

    def fixed_of(self, kind: str, key: str) -> float:
        return self.inputs.fixed_capacities.get(kind, key)

    def segment_of(self, prj: Project) -> str:
        return self.inputs.segment_of.get(prj.id, GRID)

    # -------------------------------------------------- capacity accessors

    def power_capacity(self, prj: Project) -> tuple[Optional[int], float]:
        """(new-capacity var or None, constant existing part), in MW.

        For H2 storage kinds the primary capacity is energy; use
        energy_capacity for those.
        """
        if self.fixed_mode:
            return None, self.fixed_of("project", prj.id)
        return self.new_cap.get(prj.id), prj.existing_capacity

    def energy_capacity(self, prj: Project) -> tuple[Optional[int], float]:
        """(energy var or None, constant existing), in MWh."""
        if self.fixed_mode:
            return None, self.fixed_of("energy", prj.id)
        if prj.kind in H2_STORAGE_KINDS:
            return self.new_cap.get(prj.id), prj.existing_capacity
        return self.new_energy.get(prj.id), prj.existing_energy()

    def capped_dispatch(self, name: str, var: int, cap_var: Optional[int],
                        cap_const: float, factor: float = 1.0) -> None:
        """Emit `dispatch <= factor * capacity` as a row or a bound."""
        if cap_var is None:
            self.lp.tighten_upper(var, factor * cap_const)
        else:
            self.lp.add_constraint(name, [(var, 1.0), (cap_var, -factor)],
                                   SENSE_LE, factor * cap_const)

    def floored_dispatch(self, name: str, var: int, cap_var: Optional[int],
                         cap_const: float, factor: float) -> None:
        """Emit `dispatch >= factor * capacity` (must-run floors)."""
        if factor <= 0:
            return
        if cap_var is None:
            self.lp.tighten_lower(var, factor * cap_const)
        else:
            self.lp.add_constraint(name, [(var, 1.0), (cap_var, -factor)],
                                   SENSE_GE, factor * cap_const)


# ------------------------------------------------------------- investment

_POWER_BASIS_KINDS = GENERATOR_KINDS + ELEC_STORAGE_KINDS + (
    "p2g", "g2p_fuel_cell", "g2p_turbine", "smr", "gasification")


def _primary_group(prj: Project) -> str:
    if prj.kind in H2_STORAGE_KINDS:
        return "energy"
    if prj.kind in ("ccs_retrofit", "dac"):
        return "capture"
    return "power"


def add_project_capacity(ctx: BuildContext, prj: Project) -> None:
    """Create new-capacity variables and book investment + fixed O&M costs.

    Capacity denomination follows the kind: MW for generators/converters, MWh
    for H2 storage (its primary capacity is energy), tonnes/hour for capture.
    Battery projects get a second, independent energy variable. Fixed O&M on
    existing capacity lands in the objective offset so reported totals cover
    the whole fleet. No-op in fixed-capacity mode.
    """
    if ctx.fixed_mode:
        return
    inputs = ctx.inputs
    rate = inputs.temporal.period.discount_rate
    group = _primary_group(prj)
    rec = inputs.cost_for(prj.tech, group, required=prj.candidate)
    if rec is not None and prj.existing_capacity > 0:
        ctx.lp.add_offset(prj.existing_capacity * rec.fixed_om_per_unit)
    if prj.candidate:
        ub = None
        if prj.max_capacity is not None:
            ub = max(prj.max_capacity - prj.existing_capacity, 0.0)
        cost = rec.annualized_capital_per_unit(rate) + rec.fixed_om_per_unit
        var = ctx.lp.add_variable(f"inv_cap_{prj.id}", lb=0.0, ub=ub, obj=cost)
        ctx.new_cap[prj.id] = ctx.reg(("new_cap", prj.id), var)

    if prj.kind == "battery":
        erec = inputs.cost_for(prj.tech, "energy", required=prj.candidate)
        if erec is not None and prj.existing_energy() > 0:
            ctx.lp.add_offset(prj.existing_energy() * erec.fixed_om_per_unit)
        if prj.candidate:
            ecost = (erec.annualized_capital_per_unit(rate)
                     + erec.fixed_om_per_unit)
            evar = ctx.lp.add_variable(f"inv_energy_{prj.id}", lb=0.0, obj=ecost)
            ctx.new_energy[prj.id] = ctx.reg(("new_energy", prj.id), evar)


def capacity_group_caps(ctx: BuildContext) -> None:
    """National capacity ceilings over kind/tech groups (planning mode only)."""
    if ctx.fixed_mode:
        return
    for label, project_ids, cap_mw in ctx.inputs.capacity_caps:
        terms, existing = [], 0.0
        for pid in project_ids:
            prj = ctx.inputs.projects[pid]
            existing += prj.existing_capacity
            var = ctx.new_cap.get(pid)
            if var is not None:
                terms.append((var, 1.0))
        if not terms:
            if existing > cap_mw + 1e-9:
                raise ValidationError(
                    f"capacity cap {label!r}: existing fleet {existing} MW already "
                    f"exceeds the cap {cap_mw} MW and nothing is expandable")
            continue
        ctx.lp.add_constraint(f"cap_group_{label}", terms, SENSE_LE,
                              cap_mw - existing)


# --------------------------------------------------------------- dispatch

def generator_dispatch(ctx: BuildContext, prj: Project) -> None:
    """Gross power, capacity/CF limits, must-run floor, ramps, hydro budgets.

    Fuel cost and CO2 follow the burn rate 3.412/efficiency MMBtu per MWh.
    Ramp rows link consecutive timepoints inside a horizon only.
    """
    inputs = ctx.inputs
    cap_var, cap_const = ctx.power_capacity(prj)
    mgf = prj.min_gen_fraction
    vom = 0.0
    rec = inputs.cost_for(prj.tech, "power", required=False)
    if rec is not None:
        vom = rec.variable_om
    fuel_cost = 0.0
    ef = 0.0
    if prj.burns_fuel:
        fuel_cost = prj.heat_rate_mmbtu_per_mwh * inputs.fuel_price(prj.fuel, prj.zone)
        ef = inputs.emission_factor(prj.fuel) * prj.heat_rate_mmbtu_per_mwh

    gen_of: dict[str, int] = {}
    for tp in ctx.temporal.timepoints:
        g = ctx.lp.add_variable(f"pwr_gen_{prj.id}_{tp.id}", lb=0.0,
                                obj=ctx.wh(tp) * (vom + fuel_cost))
        gen_of[tp.id] = ctx.reg(("gen", prj.id, tp.id), g)
        if prj.kind == "vre_gen":
            cf = ctx.series.cf(prj.id, tp.id)
            ctx.capped_dispatch(f"pwr_maxgen_{prj.id}_{tp.id}", g, cap_var,
                                cap_const, factor=cf)
        else:
            ctx.capped_dispatch(f"pwr_maxgen_{prj.id}_{tp.id}", g, cap_var, cap_const)
            if mgf > 0:
                ctx.floored_dispatch(f"pwr_mingen_{prj.id}_{tp.id}", g, cap_var,
                                     cap_const, mgf)
        ctx.add_power(prj.zone, tp.id, g, 1.0)
        if ef > 0:
            ctx.add_emission(prj.zone, g, ctx.wh(tp) * ef)

    rf = prj.ramp_fraction_per_hour
    if rf < 1.0 and prj.kind != "vre_gen":
        for h in ctx.temporal.ordered_horizons():
            tps = ctx.temporal.horizon_timepoints(h.id)
            for prev, cur in zip(tps, tps[1:]):
                limit = rf * cur.hours_in_tmp
                up = [(gen_of[cur.id], 1.0), (gen_of[prev.id], -1.0)]
                if cap_var is not None:
                    up.append((cap_var, -limit))
                ctx.lp.add_constraint(f"pwr_rampup_{prj.id}_{cur.id}", up,
                                      SENSE_LE, limit * cap_const)
                dn = [(gen_of[prev.id], 1.0), (gen_of[cur.id], -1.0)]
                if cap_var is not None:
                    dn.append((cap_var, -limit))
                ctx.lp.add_constraint(f"pwr_rampdn_{prj.id}_{cur.id}", dn,
                                      SENSE_LE, limit * cap_const)

    if prj.kind == "hydro":
        for month in ctx.temporal.months:
            cf = ctx.inputs.dataset.hydro_month_cf.get((prj.id, month))
            if cf is None:
                continue
            tps = ctx.temporal.month_timepoints(month)
            total_wh = sum(ctx.wh(tp) for tp in tps)
            terms = [(gen_of[tp.id], ctx.wh(tp)) for tp in tps]
            if cap_var is not None:
                terms.append((cap_var, -cf * total_wh))
            ctx.lp.add_constraint(f"pwr_hydro_budget_{prj.id}_m{month:02d}", terms,
                                  SENSE_LE, cf * total_wh * cap_const)


def storage_dispatch(ctx: BuildContext, prj: Project) -> None:
    """Charge/discharge/state with a cyclic state balance.

    Electric storage (battery, pumped hydro) balances within each horizon at
    weight 1 and injects discharge - charge into the power balance. H2 storage
    balances across the whole ordered year with the annualization weight
    inside the recursion (seasonal shifting) and trades on its hydrogen
    segment's balance. State is in stored units: charging adds
    charge * eff_c * hours * w, discharging removes discharge / eff_d * hours * w.
    """
    inputs = ctx.inputs
    is_h2 = prj.kind in H2_STORAGE_KINDS
    prefix = "h2" if is_h2 else "pwr"
    pumped = prj.kind == "pumped_hydro"
    if pumped and prj.storage_duration_h is None:
        raise ValidationError(
            f"project {prj.id!r}: pumped_hydro needs storage_duration_h")
    if not pumped:
        evar, econst = ctx.energy_capacity(prj)
    if not is_h2:
        pvar, pconst = ctx.power_capacity(prj)
    rec = inputs.cost_for(prj.tech, "energy" if is_h2 else "power", required=False)
    vom = rec.variable_om if rec is not None else 0.0

    chg, dis, soc = {}, {}, {}
    for tp in ctx.temporal.timepoints:
        c = ctx.lp.add_variable(f"{prefix}_chg_{prj.id}_{tp.id}", lb=0.0)
        d = ctx.lp.add_variable(f"{prefix}_dis_{prj.id}_{tp.id}", lb=0.0,
                                obj=ctx.wh(tp) * vom)
        s = ctx.lp.add_variable(f"{prefix}_soc_{prj.id}_{tp.id}", lb=0.0)
        chg[tp.id] = ctx.reg(("charge", prj.id, tp.id), c)
        dis[tp.id] = ctx.reg(("discharge", prj.id, tp.id), d)
        soc[tp.id] = ctx.reg(("soc", prj.id, tp.id), s)
        if is_h2:
            if prj.power_capacity is not None:
                cap = prj.power_capacity
                ctx.lp.tighten_upper(c, cap)
                ctx.lp.tighten_upper(d, cap)
            ctx.add_h2(ctx.segment_of(prj), prj.zone, tp.id, d, 1.0)
            ctx.add_h2(ctx.segment_of(prj), prj.zone, tp.id, c, -1.0)
        else:
            ctx.capped_dispatch(f"pwr_chglim_{prj.id}_{tp.id}", c, pvar, pconst)
            ctx.capped_dispatch(f"pwr_dislim_{prj.id}_{tp.id}", d, pvar, pconst)
            ctx.add_power(prj.zone, tp.id, d, 1.0)
            ctx.add_power(prj.zone, tp.id, c, -1.0)
        if pumped:
            # energy tracks the power capacity at fixed duration
            ctx.capped_dispatch(f"pwr_soclim_{prj.id}_{tp.id}", s, pvar, pconst,
                                factor=prj.storage_duration_h)
        else:
            ctx.capped_dispatch(f"{prefix}_soclim_{prj.id}_{tp.id}", s, evar, econst)

    if is_h2:
        sequences = [ctx.temporal.ordered_timepoints()]
        weighted = True
    else:
        sequences = [ctx.temporal.horizon_timepoints(h.id)
                     for h in ctx.temporal.ordered_horizons()]
        weighted = False
    for seq in sequences:
        for prev, cur in zip(seq, seq[1:] + seq[:1]):
            w = prev.hours_in_tmp * (float(prev.weight) if weighted else 1.0)
            ctx.lp.add_constraint(
                f"{prefix}_socbal_{prj.id}_{cur.id}",
                [(soc[cur.id], 1.0), (soc[prev.id], -1.0),
                 (chg[prev.id], -prj.charge_efficiency * w),
                 (dis[prev.id], w / prj.discharge_efficiency)],
                SENSE_EQ, 0.0)


# ---------------------------------------------------------------- network

def link_flow(ctx: BuildContext, link: TransportLink) -> None:
    """Signed flow with linearized bidirectional losses.

    Flow is positive from from_zone to to_zone and bounded by +-capacity.
    Losses are charged to whichever side the flow leaves from / arrives at:
    the exporting zone loses flow + from_loss, the importing zone receives
    flow - to_loss, with each loss variable pinned above loss * |flow| via
    the two-sided linearization (>= +-loss * flow, <= loss * capacity). With a
    zero loss rate the loss variables are omitted entirely.
    """
    lf = link.loss_fraction
    expandable = link.expandable and not ctx.fixed_mode
    cap_var = None
    if ctx.fixed_mode:
        cap_const = ctx.fixed_of("link", link.id)
    else:
        cap_const = link.existing_capacity
        if expandable:
            rate = ctx.inputs.temporal.period.discount_rate
            cost = link.annualized_capital_per_unit(rate)
            cap_var = ctx.lp.add_variable(f"inv_link_{link.id}", lb=0.0, obj=cost)
            ctx.new_link[link.id] = ctx.reg(("new_link", link.id), cap_var)

    if link.commodity == "electricity":
        def add_term(zone, tp, var, coeff):
            ctx.add_power(zone, tp, var, coeff)
    elif link.commodity == "hydrogen":
        def add_term(zone, tp, var, coeff):
            ctx.add_h2(GRID, zone, tp, var, coeff)
    else:
        def add_term(zone, tp, var, coeff):
            ctx.add_co2(zone, tp, var, coeff)

    for tp in ctx.temporal.timepoints:
        if cap_var is None:
            f = ctx.lp.add_variable(f"flow_{link.id}_{tp.id}",
                                    lb=-cap_const, ub=cap_const)
        else:
            f = ctx.lp.add_variable(f"flow_{link.id}_{tp.id}", lb=None)
            ctx.lp.add_constraint(f"net_cappos_{link.id}_{tp.id}",
                                  [(f, 1.0), (cap_var, -1.0)], SENSE_LE, cap_const)
            ctx.lp.add_constraint(f"net_capneg_{link.id}_{tp.id}",
                                  [(f, -1.0), (cap_var, -1.0)], SENSE_LE, cap_const)
        ctx.reg(("flow", link.id, tp.id), f)
        add_term(link.from_zone, tp.id, f, -1.0)
        add_term(link.to_zone, tp.id, f, 1.0)
        if lf > 0:
            floss = ctx.lp.add_variable(f"lossf_{link.id}_{tp.id}", lb=0.0)
            tloss = ctx.lp.add_variable(f"losst_{link.id}_{tp.id}", lb=0.0)
            ctx.reg(("from_loss", link.id, tp.id), floss)
            ctx.reg(("to_loss", link.id, tp.id), tloss)
            # loss >= -lf*flow and loss <= lf*cap catch the reverse direction;
            # the forward direction symmetrically on the to-side
            ctx.lp.add_constraint(f"net_lossf_lo_{link.id}_{tp.id}",
                                  [(floss, 1.0), (f, lf)], SENSE_GE, 0.0)
            ctx.lp.add_constraint(f"net_losst_lo_{link.id}_{tp.id}",
                                  [(tloss, 1.0), (f, -lf)], SENSE_GE, 0.0)
            if cap_var is None:
                ctx.lp.tighten_upper(floss, lf * cap_const)
                ctx.lp.tighten_upper(tloss, lf * cap_const)
            else:
                ctx.lp.add_constraint(f"net_lossf_hi_{link.id}_{tp.id}",
                                      [(floss, 1.0), (cap_var, -lf)],
                                      SENSE_LE, lf * cap_const)
                ctx.lp.add_constraint(f"net_losst_hi_{link.id}_{tp.id}",
                                      [(tloss, 1.0), (cap_var, -lf)],
                                      SENSE_LE, lf * cap_const)
            add_term(link.from_zone, tp.id, floss, -1.0)
            add_term(link.to_zone, tp.id, tloss, -1.0)
            if link.commodity == "co2":
                # vented pipeline losses count toward the emission ledger
                for zone, var in ((link.from_zone, floss), (link.to_zone, tloss)):
                    ctx.add_emission(zone, var, ctx.wh(tp))


# ---------------------------------------------------------------- balance

def power_balance(ctx: BuildContext) -> None:
    """Sum of net injections equals end-use demand in every (zone, timepoint)."""
    penalty = ctx.inputs.unserved_penalty
    for zone in ctx.inputs.dataset.zones:
        for tp in ctx.temporal.timepoints:
            load = ctx.series.zone_demand(zone, tp.id)
            terms = list(ctx.power.get((zone, tp.id), ()))
            if penalty is not None:
                u = ctx.lp.add_variable(f"uns_{zone}_{tp.id}", lb=0.0,
                                        obj=ctx.wh(tp) * penalty)
                ctx.reg(("unserved", zone, tp.id), u)
                terms.append((u, 1.0))
            if not terms:
                if load > 0:
                    raise ValidationError(
                        f"zone {zone!r} has demand but no way to serve it at {tp.id!r}")
                continue
            ctx.lp.add_constraint(f"pwr_balance_{zone}_{tp.id}", terms,
                                  SENSE_EQ, load)


def reserve_constraint(ctx: BuildContext) -> None:
    """Credit-weighted firm capacity >= (1 + margin) * peak end-use demand."""
    if ctx.fixed_mode:
        return
    margin = ctx.inputs.reserve_margin
    if margin is None:
        return
    eligible = [p for p in ctx.inputs.projects.values()
                if p.default_capacity_credit > 0 and not p.is_h2_storage
                and p.kind not in ("ccs_retrofit", "dac")]

    def emit(name: str, zones: set[str]) -> None:
        peak = max(sum(ctx.series.zone_demand(z, tp.id) for z in zones)
                   for tp in ctx.temporal.timepoints)
        if peak <= 0:
            return
        terms, firm_existing = [], 0.0
        for prj in eligible:
            if prj.zone not in zones:
                continue
            credit = prj.default_capacity_credit
            firm_existing += credit * prj.existing_capacity
            var = ctx.new_cap.get(prj.id)
            if var is not None:
                terms.append((var, credit))
        need = (1.0 + margin) * peak - firm_existing
        if not terms:
            if need > 1e-9:
                raise ValidationError(
                    f"reserve {name}: firm capacity {firm_existing:.1f} MW cannot "
                    f"reach (1+{margin}) x peak {peak:.1f} MW and nothing firm is "
                    f"expandable")
            return
        ctx.lp.add_constraint(f"pwr_reserve_{name}", terms, SENSE_GE, need)

    if ctx.inputs.reserve_scope == "zone":
        for zone in ctx.inputs.dataset.zones:
            emit(zone, {zone})
    else:
        emit("system", set(ctx.inputs.dataset.zones))
