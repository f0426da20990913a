"""Exports: a solver-agnostic MPS file, report bundles, and a comparison.

Three artifact paths out of the engine:
  1. the exact LP as fixed-format MPS, byte-stable across runs, so any
     external solver can reproduce or audit the optimization,
  2. per-scenario report bundles (JSON + CSVs) from one run() result,
  3. a delta table across scenarios from compare_results.
Everything lands in demos/out/.
"""

from pathlib import Path

from gridcap.metrics import compare_results, emit_report
from gridcap.scenario_engine import (
    ScenarioConfig, export_scenario_mps, run_scenario,
)
from gridcap.system_data import load_system_inputs

HERE = Path(__file__).resolve().parent
OUT = HERE / "out"
OUT.mkdir(exist_ok=True)

dataset = load_system_inputs(HERE / "data" / "micro")
ze = ScenarioConfig(name="ze", emission_cap_mode="absolute",
                    emission_cap_tonnes=0.0)

mps = export_scenario_mps(dataset, ze)
again = export_scenario_mps(dataset, ze)
path = OUT / "micro_ze.mps"
path.write_text(mps)
print(f"MPS export: {len(mps.splitlines())} lines -> {path}")
print(f"deterministic: {'yes' if mps == again else 'NO (bug)'}")

results = []
for name, kw in (("ref", {}),
                 ("r80", dict(emission_cap_mode="fraction_of_base",
                              emission_cap_fraction=0.2)),
                 ("ze", dict(emission_cap_mode="absolute",
                             emission_cap_tonnes=0.0))):
    base = results[0].data["emissions"]["total_tonnes"] if results else None
    res = run_scenario(dataset, ScenarioConfig(name=name, **kw),
                       base_emissions=base)
    results.append(res)
    files = emit_report(res, OUT / name)
    print(f"{name}: {res.status}, report bundle: "
          f"{', '.join(Path(f).name for f in files)}")

rows = compare_results(results, out_path=OUT / "compare.csv")
print(f"\ncomparison ({OUT / 'compare.csv'}):")
cols = ("objective_usd", "emissions_tonnes", "lcoe_usd_per_mwh")
print(f"  {'scenario':<10}" + "".join(f"{c:>18}" for c in cols))
for row in rows:
    cells = "".join(f"{row[c]:>18.4g}" if row.get(c) is not None else
                    f"{'':>18}" for c in cols)
    print(f"  {row['scenario']:<10}{cells}")
