"""Dataset types, cost arithmetic, loaders, and the save/load round trip."""

import math

import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridcap.errors import ValidationError
from gridcap.system_data import (
    CostRecord, Project, SeriesTable, SystemDataset, TransportLink, Zone,
    annualize_capital, capital_recovery_factor, derive_link_loss, extract_series,
    load_system_inputs,
)
from gridcap.temporal import Period, build_standard_layout

from .test_temporal import synthetic_year


class TestCostMath:
    def test_crf_frozen_values(self):
        assert capital_recovery_factor(0.08, 25) == pytest.approx(
            0.09367877905196811, rel=1e-12)
        assert capital_recovery_factor(0.08, 15) == pytest.approx(
            0.11682954493601999, rel=1e-12)
        assert capital_recovery_factor(0.08, 100) == pytest.approx(
            0.08003638412300075, rel=1e-12)

    def test_crf_zero_rate_is_straight_line(self):
        assert capital_recovery_factor(0.0, 10) == pytest.approx(0.1)

    def test_electrolyzer_sheet_anchor(self):
        # 283 $/kW over 25 years at 8% -> 26.5 k$/MW-yr
        rec = CostRecord(tech="electrolyzer", basis="power_kw", capital=283.0,
                         lifetime_years=25)
        assert rec.annualized_capital_per_unit(0.08) == pytest.approx(
            26511.094471706976, rel=1e-12)

    def test_battery_energy_sheet_anchor(self):
        rec = CostRecord(tech="battery", basis="energy_kwh", capital=111.0,
                         lifetime_years=15)
        assert rec.annualized_capital_per_unit(0.08) == pytest.approx(
            12968.07948789822, rel=1e-12)

    def test_capture_basis_not_scaled(self):
        rec = CostRecord(tech="dac", basis="capture_tph", capital=7.0e6,
                         lifetime_years=30)
        assert rec.capital_per_unit == 7.0e6

    def test_zero_capital_needs_no_lifetime(self):
        assert annualize_capital(0.0, None, 0.08) == 0.0

    def test_nonzero_capital_without_lifetime_rejected(self):
        with pytest.raises(ValidationError, match="lifetime"):
            annualize_capital(100.0, None, 0.08)
        with pytest.raises(ValidationError, match="lifetime"):
            CostRecord(tech="x", basis="power_kw", capital=10.0)

    @given(rate=st.floats(0.0, 0.3), years=st.integers(1, 100))
    @settings(max_examples=60)
    def test_crf_at_least_straight_line(self, rate, years):
        assert capital_recovery_factor(rate, years) >= 1.0 / years - 1e-12


class TestLinkLoss:
    def test_power_line_rate(self):
        assert derive_link_loss(0.053, 1000.0) == pytest.approx(0.053)

    def test_h2_pipeline_rate(self):
        assert derive_link_loss(0.013, 500.0) == pytest.approx(0.0065)

    def test_total_loss_rejected(self):
        with pytest.raises(ValidationError, match=">= 1"):
            derive_link_loss(0.5, 3000.0)

    def test_link_annualized_capital(self):
        link = TransportLink(id="l1", commodity="electricity", from_zone="a",
                             to_zone="b", length_km=1000.0,
                             capital_per_unit_km=340.0, lifetime_years=20)
        crf = capital_recovery_factor(0.08, 20)
        assert link.annualized_capital_per_unit(0.08) == pytest.approx(340e3 * crf)


class TestTypeValidation:
    def test_zone_bad_site_kind(self):
        with pytest.raises(ValidationError, match="co2_storage_kind"):
            Zone(id="z", co2_storage_kind="subsea")

    def test_link_self_loop(self):
        with pytest.raises(ValidationError, match="from_zone equals"):
            TransportLink(id="l", commodity="hydrogen", from_zone="a",
                          to_zone="a", length_km=10)

    def test_project_kind_checked(self):
        with pytest.raises(ValidationError, match="kind"):
            Project(id="p", zone="z", kind="fusion")

    def test_ccs_needs_parent_and_rate(self):
        with pytest.raises(ValidationError, match="parent_project"):
            Project(id="p", zone="z", kind="ccs_retrofit", capture_rate=0.85,
                    electricity_per_tonne=0.15)
        with pytest.raises(ValidationError, match="capture_rate"):
            Project(id="p", zone="z", kind="ccs_retrofit", parent_project="host",
                    electricity_per_tonne=0.15)

    def test_dac_needs_electricity_per_tonne(self):
        with pytest.raises(ValidationError, match="electricity_per_tonne"):
            Project(id="p", zone="z", kind="dac")

    def test_tech_defaults_to_kind(self):
        p = Project(id="p", zone="z", kind="battery")
        assert p.tech == "battery"

    def test_identifier_charset(self):
        with pytest.raises(ValidationError, match="identifier"):
            Zone(id="bad zone")

    def test_existing_energy_fallback(self):
        p = Project(id="p", zone="z", kind="pumped_hydro", existing_capacity=100.0,
                    storage_duration_h=10.0)
        assert p.existing_energy() == 1000.0
        q = Project(id="q", zone="z", kind="battery", existing_capacity=5.0)
        assert q.existing_energy() == 0.0


def tiny_dataset() -> SystemDataset:
    ds = SystemDataset(name="tiny")
    ds.zones = {
        "north": Zone(id="north", underground_h2_allowed=True,
                      co2_storage_kind="onshore", co2_storage_capacity_tonnes=1e9),
        "south": Zone(id="south"),
    }
    ds.links = {
        "n-s-ac": TransportLink(id="n-s-ac", commodity="electricity",
                                from_zone="north", to_zone="south", length_km=800.0,
                                existing_capacity=500.0, loss_rate_per_1000km=0.053,
                                capital_per_unit_km=340.0, lifetime_years=20),
        "n-s-h2": TransportLink(id="n-s-h2", commodity="hydrogen",
                                from_zone="north", to_zone="south", length_km=800.0,
                                loss_rate_per_1000km=0.013,
                                capital_per_unit_km=226.0, lifetime_years=50),
    }
    ds.projects = {
        "north_wind": Project(id="north_wind", zone="north", kind="vre_gen",
                              tech="onshore_wind"),
        "south_gas": Project(id="south_gas", zone="south", kind="thermal_gen",
                             tech="gas_ccgt", efficiency=0.55, fuel="gas",
                             min_gen_fraction=0.0, ramp_fraction_per_hour=0.6,
                             existing_capacity=200.0),
        "north_ely": Project(id="north_ely", zone="north", kind="p2g",
                             tech="electrolyzer", efficiency=0.7),
        "north_cavern": Project(id="north_cavern", zone="north",
                                kind="h2_storage_underground", tech="underground_h2",
                                charge_efficiency=0.99, discharge_efficiency=0.99),
    }
    ds.costs = {
        ("onshore_wind", "power_kw"): CostRecord("onshore_wind", "power_kw",
                                                 capital=784.0, fixed_om=23.0,
                                                 lifetime_years=25),
        ("gas_ccgt", "power_kw"): CostRecord("gas_ccgt", "power_kw", capital=495.0,
                                             fixed_om=13.0, variable_om=2.0,
                                             lifetime_years=30),
        ("electrolyzer", "power_kw"): CostRecord("electrolyzer", "power_kw",
                                                 capital=311.0, fixed_om=12.44,
                                                 lifetime_years=25),
        ("underground_h2", "energy_kwh"): CostRecord("underground_h2", "energy_kwh",
                                                     capital=1.6, lifetime_years=100),
    }
    ds.fuel_prices = {("gas", None): 13.68, ("gas", "south"): 12.0}
    ds.emission_factors = {"gas": 0.0531}
    ds.h2_shares = {"north": 0.4, "south": 0.6}
    ds.demand = synthetic_year()
    # second zone demand: reuse with different scale
    other = synthetic_year(base=50.0).assign(zone="south")
    ds.demand = pd.concat([ds.demand.assign(zone="north"), other], ignore_index=True)
    cf = synthetic_year(base=1.0).assign(project="north_wind")
    cf["cf"] = (cf["hour"] % 24) / 48.0 + 0.25
    ds.capacity_factors = cf[["project", "month", "day", "hour", "cf"]]
    ds.hydro_month_cf = {}
    ds.validate()
    return ds


class TestDatasetValidation:
    def test_tiny_dataset_validates(self):
        tiny_dataset()

    def test_unknown_zone_in_project(self):
        ds = tiny_dataset()
        ds.projects["bad"] = Project(id="bad", zone="nowhere", kind="battery")
        with pytest.raises(ValidationError, match="nowhere"):
            ds.validate()

    def test_underground_storage_needs_allowed_zone(self):
        ds = tiny_dataset()
        ds.projects["cav2"] = Project(id="cav2", zone="south",
                                      kind="h2_storage_underground")
        with pytest.raises(ValidationError, match="does not allow"):
            ds.validate()

    def test_ccs_parent_checks(self):
        ds = tiny_dataset()
        ds.projects["cc"] = Project(id="cc", zone="south", kind="ccs_retrofit",
                                    parent_project="missing", capture_rate=0.85,
                                    electricity_per_tonne=0.16)
        with pytest.raises(ValidationError, match="missing"):
            ds.validate()
        ds.projects["cc"] = Project(id="cc", zone="south", kind="ccs_retrofit",
                                    parent_project="north_wind", capture_rate=0.85,
                                    electricity_per_tonne=0.16)
        with pytest.raises(ValidationError, match="cannot host"):
            ds.validate()

    def test_fuel_price_fallback(self):
        ds = tiny_dataset()
        assert ds.fuel_price("gas", "south") == 12.0
        assert ds.fuel_price("gas", "north") == 13.68
        with pytest.raises(ValidationError, match="coal"):
            ds.fuel_price("coal", "north")

    def test_h2_shares_must_sum_to_one(self):
        ds = tiny_dataset()
        ds.h2_shares = {"north": 0.4, "south": 0.4}
        with pytest.raises(ValidationError, match="sum to"):
            ds.validate()

    def test_cost_lookup_by_group(self):
        ds = tiny_dataset()
        assert ds.cost_for("underground_h2", "energy").capital == 1.6
        with pytest.raises(ValidationError, match="power-basis"):
            ds.cost_for("underground_h2", "power")
        assert ds.cost_for("underground_h2", "power", required=False) is None


class TestRoundTrip:
    def test_save_load_preserves_numbers(self, tmp_path):
        ds = tiny_dataset()
        ds.save(tmp_path / "data")
        back = load_system_inputs(tmp_path / "data")
        assert set(back.zones) == set(ds.zones)
        assert set(back.projects) == set(ds.projects)
        for pid, p in ds.projects.items():
            q = back.projects[pid]
            assert q == p, pid
        for key, c in ds.costs.items():
            assert back.costs[key] == c
        for key, l in ds.links.items():
            assert back.links[key] == l
        assert back.fuel_prices == ds.fuel_prices
        assert back.emission_factors == ds.emission_factors
        assert back.h2_shares == ds.h2_shares
        assert back.zones["north"].co2_storage_capacity_tonnes == 1e9
        pd.testing.assert_frame_equal(
            back.demand.reset_index(drop=True),
            ds.demand[["zone", "month", "day", "hour", "demand_mw"]].reset_index(
                drop=True), check_dtype=False)

    def test_missing_required_file(self, tmp_path):
        (tmp_path / "empty").mkdir()
        with pytest.raises(ValidationError, match="zones.csv"):
            load_system_inputs(tmp_path / "empty")

    def test_loader_row_errors_carry_location(self, tmp_path):
        ds = tiny_dataset()
        ds.save(tmp_path / "d")
        path = tmp_path / "d" / "projects.csv"
        text = path.read_text().replace("vre_gen", "windmill")
        path.write_text(text)
        with pytest.raises(ValidationError, match=r"projects.csv row 2"):
            load_system_inputs(tmp_path / "d")

    def test_wide_existing_capacity_merge(self, tmp_path):
        ds = tiny_dataset()
        ds.save(tmp_path / "d")
        wide = pd.DataFrame([
            {"zone": "north", "onshore_wind": 1500.0, "gas_ccgt": None},
            {"zone": "south", "onshore_wind": None, "gas_ccgt": 800.0},
        ])
        wide.to_csv(tmp_path / "d" / "existing_capacity.csv", index=False)
        back = load_system_inputs(tmp_path / "d")
        assert back.projects["north_wind"].existing_capacity == 1500.0
        assert back.projects["south_gas"].existing_capacity == 800.0

    def test_wide_existing_capacity_orphan_value(self, tmp_path):
        ds = tiny_dataset()
        ds.save(tmp_path / "d")
        pd.DataFrame([{"zone": "south", "onshore_wind": 99.0}]).to_csv(
            tmp_path / "d" / "existing_capacity.csv", index=False)
        with pytest.raises(ValidationError, match="matches no project"):
            load_system_inputs(tmp_path / "d")


class TestSeriesExtraction:
    def test_block_values_and_means(self):
        ds = tiny_dataset()
        ts, sel = build_standard_layout(ds.demand, Period("2050"))
        series = extract_series(ds, ts)
        # max-demand day of month 1 is day 30: north demand 100*30/24 per hour
        assert series.demand[("north", "m01max_h00")] == pytest.approx(3000.0 / 24)
        assert series.demand[("south", "m01min_h00")] == pytest.approx(50.0 / 24)
        assert series.cf("north_wind", "m01max_h13") == pytest.approx(13 / 48 + 0.25)

    def test_two_hour_blocks_average(self):
        ds = tiny_dataset()
        ts, _ = build_standard_layout(ds.demand, Period("2050"), hours_in_tmp=2)
        series = extract_series(ds, ts)
        expected = ((12 / 48 + 0.25) + (13 / 48 + 0.25)) / 2
        assert series.cf("north_wind", "m01max_h12") == pytest.approx(expected)

    def test_missing_vre_series_is_an_error(self):
        ds = tiny_dataset()
        ds.capacity_factors = None
        ts, _ = build_standard_layout(ds.demand, Period("2050"))
        with pytest.raises(ValidationError, match="capacity_factors.csv"):
            extract_series(ds, ts)

    def test_series_table_completeness_check(self):
        ds = tiny_dataset()
        ts, _ = build_standard_layout(ds.demand, Period("2050"))
        series = extract_series(ds, ts)
        del series.demand[("north", "m01max_h00")]
        with pytest.raises(ValidationError, match="missing demand"):
            series.validate(ds.zones.keys(), ts)
