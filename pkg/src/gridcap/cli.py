"""Command-line front end: validate, plan, dispatch, report, compare, export-mps.

Exit codes: 0 success, 1 input or configuration problem, 2 the model solved to
infeasible or unbounded, 3 solver internal failure. Diagnostics go to stderr;
results are files under --out. Reruns never mutate their inputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import GridcapError, ScenarioError, SolverError, ValidationError
from .metrics import compare_results, emit_report
from .scenario_engine import (
    ScenarioConfig, ScenarioResult, dispatch_validation, export_scenario_mps,
    run_scenario,
)
from .system_data import load_system_inputs

_SOLVERS = ("highs",)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_SOLVER = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors, which collides with the infeasible
    # code; route usage problems to the input-error code instead
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


@dataclass
class RunManifest:
    dataset: str
    scenarios: list[str]
    out: str
    solver: str
    tolerance: float

    def write(self, directory: Path) -> None:
        directory.mkdir(parents=True, exist_ok=True)
        payload = {"dataset": self.dataset, "scenarios": self.scenarios,
                   "out": self.out, "solver": self.solver,
                   "tolerance": self.tolerance, "deterministic": True}
        (directory / "manifest.json").write_text(
            json.dumps(payload, indent=2) + "\n")


def _resolve_solver(flag: Optional[str]) -> str:
    solver = flag or os.environ.get("GRIDCAP_SOLVER") or "highs"
    if solver not in _SOLVERS:
        raise ValidationError(
            f"unknown solver {solver!r}; supported: {', '.join(_SOLVERS)}")
    return solver


def _load_scenario(spec: str) -> ScenarioConfig:
    path = Path(spec)
    if path.exists():
        return ScenarioConfig.from_yaml(path)
    from importlib.resources import files
    bundled = files("gridcap") / "scenarios" / f"{spec}.yaml"
    if bundled.is_file():
        return ScenarioConfig.from_yaml(bundled)
    raise ValidationError(
        f"scenario {spec!r}: no such file, and no bundled scenario by that name")


def list_bundled_scenarios() -> list[str]:
    from importlib.resources import files
    root = files("gridcap") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def _plan_one(dataset_dir: str, scenario_spec: str, out_dir: str,
              tolerance: float, base_emissions: Optional[float]) -> tuple[str, str]:
    """Worker for one scenario run; returns (scenario name, status)."""
    dataset = load_system_inputs(dataset_dir)
    config = _load_scenario(scenario_spec)
    result = run_scenario(dataset, config, tolerance=tolerance,
                          base_emissions=base_emissions)
    run_dir = Path(out_dir) / config.name
    emit_report(result, run_dir)
    return config.name, result.status


def _cmd_validate(args) -> int:
    dataset = load_system_inputs(args.dataset)
    for table, count in sorted(dataset.summary().items()):
        print(f"{table}: {count}")
    print("ok")
    return EXIT_OK


def _cmd_plan(args) -> int:
    _resolve_solver(args.solver)
    names = []
    for spec in args.scenario:
        name = _load_scenario(spec).name  # fail fast on bad configs
        if name in names:
            raise ValidationError(f"duplicate scenario name {name!r} in one run")
        names.append(name)
    out = Path(args.out)
    RunManifest(dataset=args.dataset, scenarios=names, out=str(out),
                solver=_resolve_solver(args.solver),
                tolerance=args.tol).write(out)

    statuses: dict[str, str] = {}
    if args.jobs > 1 and len(args.scenario) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_plan_one, args.dataset, spec, str(out),
                                   args.tol, args.base_emissions)
                       for spec in args.scenario]
            for fut in futures:
                name, status = fut.result()
                statuses[name] = status
    else:
        for spec in args.scenario:
            name, status = _plan_one(args.dataset, spec, str(out),
                                     args.tol, args.base_emissions)
            statuses[name] = status

    worst = EXIT_OK
    for name in names:
        status = statuses[name]
        print(f"{name}: {status} -> {out / name / 'report.json'}")
        if status in ("infeasible", "unbounded"):
            print(f"{name}: model is {status}; see the balance diagnostics in "
                  f"{out / name / 'report.json'}", file=sys.stderr)
            worst = max(worst, EXIT_INFEASIBLE)
    return worst


def _one_scenario(args) -> str:
    if len(args.scenario) != 1:
        raise ValidationError("this subcommand takes exactly one --scenario")
    return args.scenario[0]


def _cmd_dispatch(args) -> int:
    _resolve_solver(args.solver)
    dataset = load_system_inputs(args.dataset)
    config = _load_scenario(_one_scenario(args))
    plan = ScenarioResult.from_json(args.plan)
    report = dispatch_validation(plan, dataset, config,
                                 penalty=args.penalty, tolerance=args.tol)
    out = Path(args.out)
    emit_report(report, out / f"{config.name}_dispatch")
    uns = report.data["unserved"]
    print(f"unserved electricity: {uns['electricity_mwh']:.3f} MWh "
          f"({uns['electricity_pct']:.4f}%)")
    if uns["h2_mwh"] or report.data["hydrogen"]["hd_mwh"] > 0:
        print(f"unserved hydrogen: {uns['h2_mwh']:.3f} MWh ({uns['h2_pct']:.4f}%)")
    print(f"report -> {out / (config.name + '_dispatch') / 'report.json'}")
    return EXIT_OK


def _cmd_report(args) -> int:
    result = ScenarioResult.from_json(args.result)
    base = ScenarioResult.from_json(args.base) if args.base else None
    written = emit_report(result, args.out, base=base)
    for name in written:
        print(f"{Path(args.out) / name}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    results = [ScenarioResult.from_json(p) for p in args.results]
    out_path = Path(args.out) / "compare.csv"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    rows = compare_results(results, out_path)
    for row in rows:
        obj = row.get("objective_usd")
        shown = f"{obj:.6g}" if isinstance(obj, float) else obj
        print(f"{row['scenario']}: objective_usd={shown}")
    print(f"table -> {out_path}")
    return EXIT_OK


def _cmd_export_mps(args) -> int:
    _resolve_solver(args.solver)
    dataset = load_system_inputs(args.dataset)
    config = _load_scenario(_one_scenario(args))
    text = export_scenario_mps(dataset, config,
                               base_emissions=args.base_emissions)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{config.name}.mps"
    path.write_text(text)
    print(f"{path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gridcap",
                     description="sector-coupled capacity expansion planning")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=False, solver=False):
        p.add_argument("--dataset", required=True, help="dataset directory")
        if scenario:
            p.add_argument("--scenario", action="append", required=True,
                           help="scenario YAML path or bundled name (repeatable)")
        if solver:
            p.add_argument("--out", default="runs", help="output directory")
            p.add_argument("--tol", type=float, default=1e-6,
                           help="solver feasibility/report tolerance")
            p.add_argument("--solver", default=None,
                           help="LP backend (default: $GRIDCAP_SOLVER or highs)")

    p = sub.add_parser("validate", help="load and cross-check a dataset")
    common(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("plan", help="solve scenarios and write reports")
    common(p, scenario=True, solver=True)
    p.add_argument("--jobs", type=int, default=1,
                   help="scenarios to solve in parallel")
    p.add_argument("--base-emissions", type=float, default=None,
                   help="reference emissions (t) for fraction-of-base caps")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("dispatch",
                       help="fix a plan's capacities, re-dispatch 8760 hours")
    common(p, scenario=True, solver=True)
    p.add_argument("--plan", required=True, help="report.json of the plan run")
    p.add_argument("--penalty", type=float, default=1e4,
                   help="unserved energy penalty, $/MWh")
    p.set_defaults(func=_cmd_dispatch)

    p = sub.add_parser("report", help="re-emit CSV views from a result JSON")
    p.add_argument("--result", required=True, help="report.json to read")
    p.add_argument("--base", default=None,
                   help="baseline report.json for the system-delta hydrogen cost")
    p.add_argument("--out", default="runs", help="output directory")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("compare", help="tabulate several result JSONs")
    p.add_argument("--results", nargs="+", required=True)
    p.add_argument("--out", default="runs", help="output directory")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("export-mps", help="write the scenario LP as fixed MPS")
    common(p, scenario=True, solver=True)
    p.add_argument("--base-emissions", type=float, default=None)
    p.set_defaults(func=_cmd_export_mps)
    return parser


def run_command(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (ValidationError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except GridcapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
