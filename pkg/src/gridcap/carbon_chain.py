"""CO2 capture, transport, geological injection, and the emissions ledger.

Point-source capture rides on a fueled parent project (coal/gas power,
reformers): captured tonnes per hour are limited both by the capture unit's
own capacity and by capture_rate x the parent's instantaneous flue CO2. Direct
air capture is limited by its capacity alone. Every captured tonne must flow
somewhere: the zonal CO2 balance (capture + imports = injection + exports)
has no free disposal, so capture without storage or pipelines is forced to
zero rather than silently vented.

Emissions accounting per zone: combustion adds burn x emission factor,
capture of either kind subtracts captured tonnes, CO2 pipeline losses (if a
loss rate is set) add back as vented. The carbon cap bounds the weighted
annual sum, systemwide or per zone.
"""

from __future__ import annotations

from .errors import ValidationError
from .lp_backend import SENSE_EQ, SENSE_LE
from .power_core import BuildContext
from .system_data import Project
from .units import MMBTU_PER_MWH


def capture_dispatch(ctx: BuildContext, prj: Project) -> None:
    """Capture variables for one ccs_retrofit or dac project."""
    cap_var, cap_const = ctx.power_capacity(prj)  # tonnes/hour
    rec = ctx.inputs.cost_for(prj.tech, "capture", required=False)
    vom = rec.variable_om if rec is not None else 0.0  # $/tonne
    parent = None
    flue_rate = 0.0
    if prj.kind == "ccs_retrofit":
        parent = ctx.inputs.projects[prj.parent_project]
        # tonnes of flue CO2 per unit of parent activity (MWh out, or MWh-H2)
        flue_rate = (ctx.inputs.emission_factor(parent.fuel)
                     * MMBTU_PER_MWH / parent.efficiency)
    for tp in ctx.temporal.timepoints:
        c = ctx.lp.add_variable(f"co2_cap_{prj.id}_{tp.id}", lb=0.0,
                                obj=ctx.wh(tp) * vom)
        ctx.reg(("capture", prj.id, tp.id), c)
        ctx.capped_dispatch(f"co2_caplim_{prj.id}_{tp.id}", c, cap_var, cap_const)
        if parent is not None:
            key = ("gen", parent.id, tp.id)
            if key not in ctx.index:
                key = ("h2_prod", parent.id, tp.id)
            if key not in ctx.index:
                raise ValidationError(
                    f"capture {prj.id!r}: parent {parent.id!r} has no dispatch "
                    f"variable at {tp.id!r} (build order)")
            ctx.lp.add_constraint(
                f"co2_flue_{prj.id}_{tp.id}",
                [(c, 1.0), (ctx.index[key], -prj.capture_rate * flue_rate)],
                SENSE_LE, 0.0)
        ctx.add_power(prj.zone, tp.id, c, -prj.electricity_per_tonne)
        ctx.add_co2(prj.zone, tp.id, c, 1.0)
        ctx.add_emission(prj.zone, c, -ctx.wh(tp))


def injection_dispatch(ctx: BuildContext, zone_id: str) -> None:
    """Injection capacity and cumulative reservoir limit for one storage site."""
    zone = ctx.inputs.dataset.zones[zone_id]
    if zone.co2_storage_kind == "none":
        return
    tech = f"co2_storage_{zone.co2_storage_kind}"
    cap_var = None
    if ctx.fixed_mode:
        cap_const = ctx.fixed_of("site", zone_id)
    else:
        cap_const = 0.0
        rec = ctx.inputs.cost_for(tech, "capture")
        rate = ctx.inputs.temporal.period.discount_rate
        cost = rec.annualized_capital_per_unit(rate) + rec.fixed_om_per_unit
        cap_var = ctx.lp.add_variable(f"inv_site_{zone_id}", lb=0.0, obj=cost)
        ctx.new_site[zone_id] = ctx.reg(("new_site", zone_id), cap_var)
    cumulative = []
    for tp in ctx.temporal.timepoints:
        i = ctx.lp.add_variable(f"co2_inj_{zone_id}_{tp.id}", lb=0.0)
        ctx.reg(("inject", zone_id, tp.id), i)
        ctx.capped_dispatch(f"co2_injlim_{zone_id}_{tp.id}", i, cap_var, cap_const)
        ctx.add_co2(zone_id, tp.id, i, -1.0)
        cumulative.append((i, ctx.wh(tp)))
    if zone.co2_storage_capacity_tonnes is not None:
        ctx.lp.add_constraint(f"co2_cumul_{zone_id}", cumulative, SENSE_LE,
                              zone.co2_storage_capacity_tonnes)


def co2_balance(ctx: BuildContext) -> None:
    """capture + imports == injection + exports, per (zone, timepoint)."""
    for zone, tp in sorted(ctx.co2):
        ctx.lp.add_constraint(f"co2_balance_{zone}_{tp}",
                              ctx.co2[(zone, tp)], SENSE_EQ, 0.0)


def carbon_cap(ctx: BuildContext) -> None:
    """Weighted annual emissions (including vented pipeline losses) under cap."""
    cap_by_zone = ctx.inputs.emission_cap_by_zone
    if cap_by_zone:
        for zone in sorted(cap_by_zone):
            terms = ctx.emissions.get(zone, [])
            cap = cap_by_zone[zone]
            if not terms:
                if cap < 0:
                    raise ValidationError(
                        f"zone {zone!r}: negative emission cap {cap} with no "
                        f"negative-emission technology present")
                continue
            ctx.lp.add_constraint(f"sys_carbon_cap_{zone}", terms, SENSE_LE, cap)
        return
    cap = ctx.inputs.emission_cap_tonnes
    if cap is None:
        return
    terms = [t for zone in sorted(ctx.emissions) for t in ctx.emissions[zone]]
    if not terms:
        if cap < 0:
            raise ValidationError(
                f"negative emission cap {cap} with no emitting or capturing "
                f"technology present")
        return
    ctx.lp.add_constraint("sys_carbon_cap", terms, SENSE_LE, cap)
