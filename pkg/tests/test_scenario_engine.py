"""Scenario overlays, result serialization, and the independent cross-checks."""

import json

import pytest

from gridcap.errors import ScenarioError
from gridcap.lp_backend import solve
from gridcap.scenario_engine import (
    ScenarioConfig, ScenarioResult, apply_scenario, build_model,
    export_scenario_mps, run_scenario, summarize,
)
from gridcap.system_data import Project, Zone

from .toys import (
    add_h2_chain, config, flat_temporal, series_for, solve_toy,
    wind_gas_dataset,
)


class TestConfigParsing:
    def test_round_trip_through_dict(self):
        cfg = ScenarioConfig.from_dict({
            "name": "x", "emission_cap": {"mode": "absolute", "tonnes": 5.0},
            "tech_flags": {"dac": "forbidden"},
            "h2_demand": {"annual_twh": 2.0, "mode": "flat"},
            "reserve_margin": None,
        })
        again = ScenarioConfig.from_dict(cfg.to_dict())
        assert again == cfg

    def test_unknown_keys_rejected(self):
        with pytest.raises(ScenarioError, match="unknown scenario config"):
            ScenarioConfig.from_dict({"name": "x", "emissions_cap": {}})

    def test_absolute_cap_needs_tonnes(self):
        with pytest.raises(ScenarioError, match="needs tonnes"):
            ScenarioConfig.from_dict({"name": "x",
                                      "emission_cap": {"mode": "absolute"}})

    def test_blue_h2_with_forbidden_capture_contradicts(self):
        with pytest.raises(ScenarioError, match="blue_h2"):
            ScenarioConfig.from_dict({
                "name": "x", "blue_h2": True,
                "tech_flags": {"ccs_retrofit": "forbidden"}})

    def test_cost_override_needs_exactly_one_of_value_scale(self):
        for extra in ({}, {"value": 1.0, "scale": 2.0}):
            ov = {"tech": "wind", "field": "capital", **extra}
            with pytest.raises(ScenarioError, match="value/scale"):
                ScenarioConfig.from_dict({"name": "x", "cost_overrides": [ov]})

    def test_flag_values_restricted(self):
        with pytest.raises(ScenarioError, match="tech flag"):
            ScenarioConfig.from_dict({"name": "x",
                                      "tech_flags": {"dac": "banned"}})

    def test_yaml_error_carries_filename(self, tmp_path):
        p = tmp_path / "bad.yaml"
        p.write_text("name: x\nemission_cap:\n  mode: never\n")
        with pytest.raises(ScenarioError, match="bad.yaml"):
            ScenarioConfig.from_yaml(p)


class TestOverlays:
    def setup_method(self):
        self.t = flat_temporal(2)
        self.ds = add_h2_chain(wind_gas_dataset())
        self.s = series_for(self.t, [100, 80], cf={"wind": [1.0, 0.5]})

    def test_forbidden_kind_drops_project(self):
        cfg = config(name="nog", tech_flags={"thermal_gen": "forbidden"})
        mi = apply_scenario(self.ds, cfg, self.t, self.s)
        assert "gas" not in mi.projects
        assert "wind" in mi.projects

    def test_unmatched_flag_key_rejected(self):
        cfg = config(name="typo", tech_flags={"therml_gen": "forbidden"})
        with pytest.raises(ScenarioError, match="match no project kind"):
            apply_scenario(self.ds, cfg, self.t, self.s)

    def test_orphaned_capture_child_dropped_with_parent(self):
        ds = wind_gas_dataset()
        ds.projects["ccs"] = Project("ccs", "z", "ccs_retrofit", tech="ccs",
                                     parent_project="gas", capture_rate=0.9,
                                     electricity_per_tonne=0.25)
        cfg = config(name="nog", tech_flags={"thermal_gen": "forbidden"})
        mi = apply_scenario(ds, cfg, self.t, self.s)
        assert "ccs" not in mi.projects

    def test_cost_override_value_and_scale(self):
        cfg = config(name="ov", cost_overrides=[
            {"tech": "wind", "field": "fixed_om", "value": 70.0},
            {"tech": "gas", "field": "variable_om", "scale": 2.0},
        ])
        mi = apply_scenario(self.ds, cfg, self.t, self.s)
        assert mi.cost_for("wind", "power").fixed_om == 70.0
        assert mi.cost_for("gas", "power").variable_om == 4.0

    def test_cost_override_without_match_rejected(self):
        cfg = config(name="ov", cost_overrides=[
            {"tech": "coal", "field": "capital", "value": 1.0}])
        with pytest.raises(ScenarioError, match="matches no record"):
            apply_scenario(self.ds, cfg, self.t, self.s)

    def test_project_override_reaches_efficiency(self):
        cfg = config(name="ov", project_overrides={"p2g": {"efficiency": 0.8}})
        mi = apply_scenario(self.ds, cfg, self.t, self.s)
        assert mi.projects["ely"].efficiency == 0.8

    def test_fraction_cap_uses_runtime_base(self):
        cfg = config(name="fr", emission_cap_mode="fraction_of_base",
                     emission_cap_fraction=0.25)
        mi = apply_scenario(self.ds, cfg, self.t, self.s, base_emissions=1000.0)
        assert mi.emission_cap_tonnes == pytest.approx(250.0)
        with pytest.raises(ScenarioError, match="fraction_of_base"):
            apply_scenario(self.ds, cfg, self.t, self.s)

    def test_capacity_cap_group_sums_kinds(self):
        cfg = config(name="cc", capacity_caps={"vre_gen+thermal_gen": 120.0})
        mi = apply_scenario(self.ds, cfg, self.t, self.s)
        caps = {label: (ids, mw) for label, ids, mw in mi.capacity_caps}
        label = "vre_gen_thermal_gen"
        assert label in caps
        assert set(caps[label][0]) == {"wind", "gas"}
        res = solve_toy(self.ds, self.t, self.s, cfg)
        assert res.ok
        total = sum(r["total"] for r in res.data["capacity"]
                    if r["project"] in ("wind", "gas"))
        assert total <= 120.0 + 1e-6

    def test_decoupled_mode_clones_dedicated_fleet(self):
        cfg = config(name="dec", coupling="decoupled", h2_demand_twh=0.0876,
                     h2_profile_mode="flat")
        mi = apply_scenario(self.ds, cfg, self.t, self.s)
        assert "ely__hta" in mi.projects
        assert "cavern__hta" in mi.projects
        assert "h2t__hta" not in mi.projects  # reconversion stays on the grid
        assert mi.segment_of["ely__hta"] == "hta"
        assert mi.projects["ely__hta"].existing_capacity == 0.0
        # exogenous demand moved off the grid segment
        assert mi.h2_load_segment == "hta"

    def test_nuclear_min_gen_applies_by_kind(self):
        ds = wind_gas_dataset()
        ds.projects["nuk"] = Project("nuk", "z", "nuclear", tech="nuk",
                                     fuel=None, min_gen_fraction=0.9)
        ds.costs[("nuk", "power_kw")] = ds.costs[("gas", "power_kw")]
        cfg = config(name="fx", nuclear_min_gen=0.2)
        mi = apply_scenario(ds, cfg, self.t, self.s)
        assert mi.projects["nuk"].min_gen_fraction == 0.2
        assert mi.projects["gas"].min_gen_fraction == 0.0


class TestH2ShareDefaults:
    def test_shares_follow_zonal_demand_when_unset(self):
        t = flat_temporal(2)
        za, zb = Zone("a"), Zone("b")
        ds = wind_gas_dataset(zone=za)
        ds.zones["b"] = zb
        ds.projects["gas_b"] = Project("gas_b", "b", "thermal_gen",
                                       tech="gas", fuel="gas", efficiency=0.5)
        ds.projects["ely_a"] = Project("ely_a", "a", "p2g", tech="ely",
                                       efficiency=0.7)
        ds.projects["ely_b"] = Project("ely_b", "b", "p2g", tech="ely",
                                       efficiency=0.7)
        ds.costs[("ely", "power_kw")] = ds.costs[("gas", "power_kw")]
        s = series_for(t, {"a": [75, 75], "b": [25, 25]},
                       cf={"wind": [1.0, 1.0]})
        cfg = config(name="sh", h2_demand_twh=0.0876, h2_profile_mode="flat")
        mi = apply_scenario(ds, cfg, t, s)
        load_a = sum(v for (z, _), v in mi.h2_load.items() if z == "a")
        load_b = sum(v for (z, _), v in mi.h2_load.items() if z == "b")
        assert load_a == pytest.approx(3 * load_b, rel=1e-9)


class TestResultIntegrity:
    def solved(self):
        t = flat_temporal(4)
        ds = add_h2_chain(wind_gas_dataset())
        s = series_for(t, [100, 60, 80, 40],
                       cf={"wind": [0.9, 0.1, 0.5, 0.3]})
        return solve_toy(ds, t, s), ds, t, s

    def test_objective_matches_recomputed_costs(self):
        res, *_ = self.solved()
        assert res.ok
        assert abs(res.data["cost_check_rel_gap"]) <= 1e-9
        total = sum(res.cost_categories.values())
        assert total == pytest.approx(res.objective, rel=1e-9)

    def test_conservation_residuals_are_tiny(self):
        res, *_ = self.solved()
        cons = res.data["conservation"]
        assert cons["weighted_hours_exact"] is True
        for key in ("power_balance_max_rel_residual",
                    "h2_balance_max_rel_residual",
                    "co2_balance_max_abs_residual"):
            assert abs(cons[key]) <= 1e-6

    def test_json_round_trip(self, tmp_path):
        res, *_ = self.solved()
        p = tmp_path / "r.json"
        res.to_json(p)
        again = ScenarioResult.from_json(p)
        assert again.data == res.data
        # and the text itself is deterministic
        res.to_json(tmp_path / "r2.json")
        assert (tmp_path / "r.json").read_bytes() == \
            (tmp_path / "r2.json").read_bytes()

    def test_fixed_capacities_round_trip(self):
        res, *_ = self.solved()
        fc = res.fixed_capacities()
        caps = {r["project"]: r["total"] for r in res.data["capacity"]}
        for pid, total in caps.items():
            assert fc.get("project", pid) == pytest.approx(total)

    def test_infeasible_result_keeps_schema(self):
        t = flat_temporal(2)
        ds = wind_gas_dataset(gas_min_gen=0.5)
        s = series_for(t, [100, 20], cf={"wind": [0.0, 0.0]})
        res = solve_toy(ds, t, s)
        assert res.status == "infeasible"
        assert res.objective is None
        assert res.data["capacity"] == []
        assert res.data["levelized_total_energy"] is None
        assert json.loads(res.to_json()) == res.data


class TestFixedCapacityMode:
    def test_planned_fleet_dispatches_without_shortfall(self):
        t = flat_temporal(4)
        ds = add_h2_chain(wind_gas_dataset())
        s = series_for(t, [100, 60, 80, 40],
                       cf={"wind": [0.9, 0.1, 0.5, 0.3]})
        plan = solve_toy(ds, t, s)
        cfg = config()
        inputs = apply_scenario(ds, cfg, t, s,
                                fixed_capacities=plan.fixed_capacities(),
                                unserved_penalty=1e4)
        ctx = build_model(inputs)
        res = summarize(ctx, solve(ctx.lp.assemble()))
        assert res.ok
        assert res.data["unserved"]["electricity_mwh"] == pytest.approx(0.0, abs=1e-6)
        # operating cost excludes investment entirely
        assert res.cost_categories["investment"] == 0.0
        assert res.cost_categories["fixed_om"] == 0.0

    def test_halved_fleet_reports_shortfall_instead_of_failing(self):
        t = flat_temporal(4)
        ds = wind_gas_dataset()
        s = series_for(t, [100, 60, 80, 40],
                       cf={"wind": [0.9, 0.1, 0.5, 0.3]})
        plan = solve_toy(ds, t, s)
        fc = plan.fixed_capacities()
        fc.project = {k: 0.5 * v for k, v in fc.project.items()}
        inputs = apply_scenario(ds, cfg := config(), t, s,
                                fixed_capacities=fc, unserved_penalty=1e4)
        ctx = build_model(inputs)
        res = summarize(ctx, solve(ctx.lp.assemble()))
        assert res.ok
        assert res.data["unserved"]["electricity_mwh"] > 0.0
        assert res.data["unserved"]["electricity_pct"] > 0.0


class TestDeterminism:
    def test_mps_export_is_reproducible(self):
        t = flat_temporal(4)
        ds = add_h2_chain(wind_gas_dataset())
        s = series_for(t, [100, 60, 80, 40],
                       cf={"wind": [0.9, 0.1, 0.5, 0.3]})
        a = export_scenario_mps(ds, config(), t, series=s)
        b = export_scenario_mps(ds, config(), t, series=s)
        assert a == b
        assert "ENDATA" in a

    def test_rerun_reproduces_report(self):
        t = flat_temporal(4)
        ds = add_h2_chain(wind_gas_dataset())
        s = series_for(t, [100, 60, 80, 40],
                       cf={"wind": [0.9, 0.1, 0.5, 0.3]})
        r1 = run_scenario(ds, config(), t, series=s)
        r2 = run_scenario(ds, config(), t, series=s)
        assert r1.data == r2.data
        assert r1.to_json() == r2.to_json()
