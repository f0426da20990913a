"""Plan the two-zone showcase system under reference policy and read the plan.

Walks the full cycle once: load a dataset from CSVs, run the cost-minimizing
expansion, then pull the pieces a study would quote: capacity additions,
cost breakdown, trade, emissions, and the system LCOE.
"""

from importlib.resources import files
from pathlib import Path

from gridcap.scenario_engine import ScenarioConfig, run_scenario
from gridcap.system_data import load_system_inputs

HERE = Path(__file__).resolve().parent

dataset = load_system_inputs(HERE / "data" / "twozone")
print(f"dataset {dataset.name}: {len(dataset.zones)} zones, "
      f"{len(dataset.projects)} projects, {len(dataset.links)} links")

config = ScenarioConfig.from_yaml(files("gridcap") / "scenarios" / "ref.yaml")
print(f"scenario {config.name}: {config.description}")
result = run_scenario(dataset, config)
print(f"\nstatus: {result.status}")
print(f"objective: {result.objective / 1e9:.3f} B$/yr")

print("\nnew capacity (>= 1 unit):")
for row in sorted(result.data["capacity"], key=lambda r: -r["new"]):
    if row["new"] >= 1.0:
        print(f"  {row['project']:<16} {row['zone']:<7} {row['kind']:<22}"
              f" {row['new']:>10.0f} {row['unit']}")

print("\nannual cost by category (M$/yr):")
for cat, usd in sorted(result.data["cost_categories"].items(),
                       key=lambda kv: -kv[1]):
    if abs(usd) > 1e5:
        print(f"  {cat:<16} {usd / 1e6:>10.1f}")

print("\ntransmission and pipelines:")
for row in result.data["trade"]:
    unit = "Mt" if row["commodity"] == "co2" else "TWh"
    print(f"  {row['link']:<18} {row['commodity']:<12}"
          f" gross {row['gross_flow'] / 1e6:>6.2f} {unit}"
          f"  losses {row['losses'] / 1e6:.3f} {unit}")

emis = result.data["emissions"]
print(f"\nemissions: {emis['total_tonnes'] / 1e6:.2f} Mt "
      f"({', '.join(f'{z}={v / 1e6:.2f}' for z, v in emis['by_zone'].items())})")
print(f"LCOE: {result.data['lcoe_usd_per_mwh']:.2f} $/MWh")
print(f"reserve margin held at {config.reserve_margin:.0%} of peak "
      f"{result.data['demand']['peak_mw']:.0f} MW")
