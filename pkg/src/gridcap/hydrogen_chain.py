"""Hydrogen supply chain: electrolysis, reconversion, fossil H2, storage, balance.

All hydrogen is counted in MWh at lower heating value. Each asset belongs to a
balance segment: "grid" is the power-sector hydrogen system (electrolyzers,
storage, hydrogen-to-power, pipelines); a decoupled scenario adds an "hta"
segment holding the dedicated fleet that alone serves exogenous hydrogen
demand. In coupled mode everything, demand included, sits on "grid".

Electrolyzer capacity is denominated in MW of electric input;
hydrogen-to-power capacity in MW of electric output; fossil reformers in MW of
hydrogen output. Storage lives in power_core.storage_dispatch with the
period-linked, weight-carrying state recursion.
"""

from __future__ import annotations

from .errors import ScenarioError, ValidationError
from .lp_backend import SENSE_EQ
from .power_core import GRID, BuildContext
from .system_data import Project
from .units import HOURS_PER_YEAR


def p2g_dispatch(ctx: BuildContext, prj: Project) -> None:
    """Electrolysis: electric input bounded by capacity, H2 out at efficiency."""
    cap_var, cap_const = ctx.power_capacity(prj)
    rec = ctx.inputs.cost_for(prj.tech, "power", required=False)
    vom = rec.variable_om if rec is not None else 0.0  # $/MWh of H2 made
    eta = prj.efficiency
    seg = ctx.segment_of(prj)
    for tp in ctx.temporal.timepoints:
        x = ctx.lp.add_variable(f"h2_p2g_{prj.id}_{tp.id}", lb=0.0,
                                obj=ctx.wh(tp) * vom * eta)
        ctx.reg(("p2g_in", prj.id, tp.id), x)
        ctx.capped_dispatch(f"h2_p2glim_{prj.id}_{tp.id}", x, cap_var, cap_const)
        ctx.add_power(prj.zone, tp.id, x, -1.0)
        ctx.add_h2(seg, prj.zone, tp.id, x, eta)


def g2p_dispatch(ctx: BuildContext, prj: Project) -> None:
    """Hydrogen back to power: output bounded by capacity, H2 drawn at 1/eta.

    Draws from the grid segment always; reconversion is a power-sector asset.
    """
    cap_var, cap_const = ctx.power_capacity(prj)
    rec = ctx.inputs.cost_for(prj.tech, "power", required=False)
    vom = rec.variable_om if rec is not None else 0.0
    eta = prj.efficiency
    for tp in ctx.temporal.timepoints:
        y = ctx.lp.add_variable(f"h2_g2p_{prj.id}_{tp.id}", lb=0.0,
                                obj=ctx.wh(tp) * vom)
        ctx.reg(("g2p_out", prj.id, tp.id), y)
        ctx.capped_dispatch(f"h2_g2plim_{prj.id}_{tp.id}", y, cap_var, cap_const)
        ctx.add_power(prj.zone, tp.id, y, 1.0)
        ctx.add_h2(GRID, prj.zone, tp.id, y, -1.0 / eta)


def fossil_h2_dispatch(ctx: BuildContext, prj: Project) -> None:
    """Reformer/gasifier H2 production with fuel cost and CO2, CCS-hostable."""
    if not ctx.inputs.config.blue_h2:
        raise ScenarioError(
            f"fossil hydrogen project {prj.id!r} ({prj.kind}) present in scenario "
            f"{ctx.inputs.name!r} which does not enable blue hydrogen; forbid the "
            f"kind via tech_flags or set blue_h2: true")
    cap_var, cap_const = ctx.power_capacity(prj)
    rec = ctx.inputs.cost_for(prj.tech, "power", required=False)
    vom = rec.variable_om if rec is not None else 0.0
    fuel_cost = prj.heat_rate_mmbtu_per_mwh * ctx.inputs.fuel_price(prj.fuel, prj.zone)
    ef = ctx.inputs.emission_factor(prj.fuel) * prj.heat_rate_mmbtu_per_mwh
    seg = ctx.segment_of(prj)
    for tp in ctx.temporal.timepoints:
        q = ctx.lp.add_variable(f"h2_prod_{prj.id}_{tp.id}", lb=0.0,
                                obj=ctx.wh(tp) * (vom + fuel_cost))
        ctx.reg(("h2_prod", prj.id, tp.id), q)
        ctx.capped_dispatch(f"h2_prodlim_{prj.id}_{tp.id}", q, cap_var, cap_const)
        ctx.add_h2(seg, prj.zone, tp.id, q, 1.0)
        if ef > 0:
            ctx.add_emission(prj.zone, q, ctx.wh(tp) * ef)


def h2_balance(ctx: BuildContext) -> None:
    """Per (segment, zone, timepoint): production + discharge + imports equal
    exogenous demand + reconversion draw + charging + exports.

    Emitted wherever any hydrogen term or load exists; a zone with load but no
    supply yields an (honestly) infeasible row. In fixed-capacity mode a
    penalized slack reports unserved hydrogen.
    """
    load_seg = ctx.inputs.h2_load_segment
    keys = set(ctx.h2)
    for (zone, tp), load in ctx.inputs.h2_load.items():
        if load > 0:
            keys.add((load_seg, zone, tp))
    penalty = ctx.inputs.unserved_penalty
    for seg, zone, tp in sorted(keys):
        load = ctx.inputs.h2_load.get((zone, tp), 0.0) if seg == load_seg else 0.0
        terms = list(ctx.h2.get((seg, zone, tp), ()))
        if penalty is not None and load > 0:
            u = ctx.lp.add_variable(f"unsh2_{seg}_{zone}_{tp}", lb=0.0,
                                    obj=ctx.wh(ctx.tp(tp)) * penalty)
            ctx.reg(("unserved_h2", seg, zone, tp), u)
            terms.append((u, 1.0))
        if not terms:
            if load > 0:
                raise ValidationError(
                    f"zone {zone!r} has hydrogen demand on segment {seg!r} "
                    f"but no hydrogen supply at {tp!r}")
            continue
        ctx.lp.add_constraint(f"h2_balance_{seg}_{zone}_{tp}", terms, SENSE_EQ, load)


def build_h2_demand_profile(annual_mwh: float, shares: dict[str, float],
                            series, temporal, mode: str) -> dict[tuple[str, str], float]:
    """Hourly exogenous H2 load (MW) per (zone, timepoint).

    flat: the zone's annual share spread uniformly over 8760 hours.
    electricity_shaped: scaled to the zone's own electricity demand profile,
    so weighted totals still hit the annual target exactly.
    """
    if annual_mwh < 0:
        raise ValidationError(f"annual H2 demand must be >= 0, got {annual_mwh}")
    out: dict[tuple[str, str], float] = {}
    if annual_mwh == 0:
        return out
    if mode not in ("flat", "electricity_shaped"):
        raise ValidationError(f"unknown H2 profile mode {mode!r}")
    for zone in sorted(shares):
        share = shares[zone]
        if share == 0:
            continue
        target = annual_mwh * share
        if mode == "flat":
            level = target / HOURS_PER_YEAR
            for tp in temporal.timepoints:
                out[(zone, tp.id)] = level
        else:
            weighted_elec = sum(
                tp.hours_in_tmp * float(tp.weight) * series.zone_demand(zone, tp.id)
                for tp in temporal.timepoints)
            if weighted_elec <= 0:
                raise ValidationError(
                    f"zone {zone!r}: electricity-shaped H2 profile needs nonzero "
                    f"electricity demand (share {share})")
            scale = target / weighted_elec
            for tp in temporal.timepoints:
                out[(zone, tp.id)] = scale * series.zone_demand(zone, tp.id)
    return out
