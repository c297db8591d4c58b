"""Command-line interface: sweep, solve, export, pwl.

Experiment configs are YAML files whose keys mirror ExperimentConfig (see
README); the --preset flag supplies the two built-in configurations and any
config-file keys override the preset's values.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import harness, presets
from .harness import (ExperimentConfig, SolverSettings, desk_config,
                      emit_csv, generate_instance, paper_config,
                      run_milp_instance, run_sweep)
from .milp import build_problem27
from .netmodel import EnergyParams, cell_loads, energy
from .pwl import build_bound
from .scenarios import build_levels
from .solver import export_model

logger = logging.getLogger(__name__)


def _asdict(obj) -> dict:
    return {f: getattr(obj, f) for f in obj.__dataclass_fields__}


def _config_from_args(args) -> ExperimentConfig:
    config = desk_config() if args.preset == "desk" else paper_config()
    raw = {}
    if args.config:
        with open(args.config) as fh:
            raw = yaml.safe_load(fh) or {}
    overrides = {}
    if "solver" in raw:
        overrides["solver"] = SolverSettings(
            **{**_asdict(config.solver), **raw.pop("solver")})
    if "energy" in raw:
        overrides["energy_params"] = EnergyParams(
            **{**_asdict(config.energy_params), **raw.pop("energy")})
    if "cells" in raw:
        spec = raw.pop("cells")
        overrides["cells"] = presets.table2_cells(
            n_macro=int(spec.get("n_macro", 4)),
            n_pico=int(spec.get("n_pico", 4)),
            pico_bias_db=float(spec.get("pico_bias_db", presets.PICO_BIAS_DB)))
    if "weights" in raw:
        overrides["weights"] = tuple(tuple(float(x) for x in row)
                                     for row in raw.pop("weights"))
    if "methods" in raw:
        overrides["methods"] = tuple(raw.pop("methods"))
    overrides.update(raw)  # plain scalar fields pass through
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "runs", None) is not None:
        overrides["runs"] = args.runs
    return ExperimentConfig(**{**_asdict(config), **overrides})


def _build_instance_model(config, args):
    scenario, gains = generate_instance(config, config.seed, args.run_index,
                                        args.demand)
    pwl = build_bound(scenario.gamma_min, scenario.gamma_max, config.pwl_epsilon)
    levels = build_levels(gains, scenario.p_max, scenario.noise_power,
                          config.weights)
    model, varmap = build_problem27(scenario, gains, pwl, levels)
    return scenario, gains, model, varmap


def cmd_sweep(args) -> int:
    config = _config_from_args(args)
    rows, records = run_sweep(config)
    metrics_path, instances_path = emit_csv(rows, records, args.out)
    print(f"wrote {metrics_path} and {instances_path}")
    return 0


def cmd_solve(args) -> int:
    config = _config_from_args(args)
    scenario, gains, model, varmap = _build_instance_model(config, args)
    n_bin = len(model.binary_indices)
    if n_bin > config.solver.export_threshold:
        out = Path(args.out or ".") / "instance.mps"
        export_model(model, out)
        print(f"{n_bin} binaries exceed the bundled-solver budget "
              f"({config.solver.export_threshold}); model exported to {out}")
        return 0
    result, point, surrogate = run_milp_instance(scenario, gains, config)
    print(f"status: {result.status}  nodes: {result.nodes}  "
          f"gap: {result.gap:.3g}")
    if point is None:
        return 1
    report = cell_loads(point, scenario, gains)
    _, total = energy(point, report, scenario.energy_params, scenario.cells)
    print(f"objective (model): {result.objective:.6f}")
    print(f"energy (exact):    {total:.6f}")
    print(f"active cells: {np.flatnonzero(point.x == 1).tolist()}")
    print(f"powers (W): {[f'{v:.4f}' for v in point.p]}")
    print(f"exact loads: {[f'{v:.4f}' for v in report.rho]}")
    print(f"surrogate loads: {[f'{v:.4f}' for v in surrogate]}")
    print(f"verification: {'feasible' if report.feasible else 'INFEASIBLE'}")
    return 0


def cmd_export(args) -> int:
    config = _config_from_args(args)
    _, _, model, _ = _build_instance_model(config, args)
    out = Path(args.out)
    export_model(model, out)
    print(f"wrote {out} ({model.n_variables} variables, "
          f"{model.n_constraints} rows, {len(model.binary_indices)} binaries)")
    return 0


def cmd_pwl(args) -> int:
    bound = build_bound(args.gamma_min, args.gamma_max, args.epsilon)
    sys.stdout.write(bound.to_table())
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cellopt",
        description="Energy minimization for heterogeneous cellular networks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--preset", choices=("desk", "paper"), default="desk")
        p.add_argument("--config", help="YAML file overriding preset keys")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("sweep", help="run a Monte-Carlo demand sweep")
    add_common(p)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory for CSVs")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("solve", help="solve a single instance and verify it")
    add_common(p)
    p.add_argument("--run-index", type=int, default=0)
    p.add_argument("--demand", type=float, default=1e6, help="per-DP bits/s")
    p.add_argument("--out", help="directory for exported models")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("export", help="emit the MPS model of one instance")
    add_common(p)
    p.add_argument("--run-index", type=int, default=0)
    p.add_argument("--demand", type=float, default=1e6)
    p.add_argument("--out", required=True, help="MPS output path")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("pwl", help="print the load-bound table")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--gamma-min", type=float, default=0.1)
    p.add_argument("--gamma-max", type=float, default=100.0)
    p.set_defaults(func=cmd_pwl)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
