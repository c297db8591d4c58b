"""Monte-Carlo sweep harness: instance generation, methods, metrics, CSV.

An experiment fixes the base-station template and sweeps a per-DP demand
grid; each (demand, run) pair gets DP positions drawn from an independent
RNG substream keyed by (seed, run) so that the same layouts recur at every
demand point and results never depend on scheduling.

Every solution any method returns is re-verified against the exact model
before it is counted (a hard error otherwise).  Mean metrics follow the
comparability rule: only instances solved by ALL optimizing methods enter
the means, while feasibility rates are over all instances.  Instances whose
MILP exceeds the solver's binary budget or hits its node limit count as
unsolved, hence infeasible for the rate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import baselines, presets
from .milp import build_problem27, extract_solution, surrogate_loads
from .netmodel import (Cell, EnergyParams, GainMatrix, NetworkScenario,
                       cell_loads, compute_gains, energy)
from .pwl import build_bound
from .scenarios import TABLE1_WEIGHTS, build_levels
from .solver import branch_and_bound

logger = logging.getLogger(__name__)

METHOD_MILP = "milp"
METHOD_SWITCHING = "max_power_switching"
METHOD_SCALING = "power_scaling"
METHOD_FULL_POWER = "full_power"
ALL_METHODS = (METHOD_MILP, METHOD_SWITCHING, METHOD_SCALING, METHOD_FULL_POWER)

# the constant reference line is not an optimizer; it does not gate the
# comparable-instance set
OPTIMIZING_METHODS = (METHOD_MILP, METHOD_SWITCHING, METHOD_SCALING)


@dataclass(frozen=True)
class SolverSettings:
    gap_tol: float = 1e-6
    node_limit: int = 20000
    export_threshold: int = 200  # binary count above which instances export
    dive_period: int = 50


@dataclass(frozen=True)
class ExperimentConfig:
    cells: tuple[Cell, ...]
    dp_count: int
    demand_start: float
    demand_stop: float
    demand_step: float
    runs: int
    seed: int
    methods: tuple[str, ...] = ALL_METHODS
    pwl_epsilon: float = 0.05
    weights: tuple[tuple[float, float, float], ...] = TABLE1_WEIGHTS
    energy_params: EnergyParams = EnergyParams()
    solver: SolverSettings = SolverSettings()

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.demand_step <= 0:
            raise ValueError("demand step must be positive")
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")

    @property
    def demands(self) -> tuple[float, ...]:
        grid = np.arange(self.demand_start,
                         self.demand_stop + 0.5 * self.demand_step,
                         self.demand_step)
        return tuple(float(d) for d in grid)

    @property
    def n_binaries(self) -> int:
        k, m = len(self.cells), self.dp_count
        return k + k * m + len(self.weights) * k * m


def desk_config(runs: int = 200, seed: int = 1,
                demand_start: float = 0.25e6, demand_stop: float = 7.5e6,
                demand_step: float = 0.25e6, **kwargs) -> ExperimentConfig:
    """Reduced preset sized for the bundled solver: 2 macro + 2 pico cells,
    6 DPs, 3 interference levels, load bound at 0.1 error."""
    return ExperimentConfig(
        cells=presets.table2_cells(n_macro=2, n_pico=2),
        dp_count=6,
        demand_start=demand_start, demand_stop=demand_stop,
        demand_step=demand_step,
        runs=runs, seed=seed,
        pwl_epsilon=0.1,
        weights=presets.DESK_WEIGHTS,
        **kwargs)


def paper_config(runs: int = 200, seed: int = 1, **kwargs) -> ExperimentConfig:
    """Full 8-cell layout with 20 DPs; MILP instances exceed the bundled
    solver's budget and route through MPS export."""
    return ExperimentConfig(
        cells=presets.table2_cells(),
        dp_count=20,
        demand_start=0.25e6, demand_stop=7.5e6, demand_step=0.25e6,
        runs=runs, seed=seed,
        pwl_epsilon=0.05,
        weights=TABLE1_WEIGHTS,
        **kwargs)


def generate_instance(config: ExperimentConfig, seed: int, run_index: int,
                      demand: float) -> tuple[NetworkScenario, GainMatrix]:
    """Instance for one (seed, run) substream at the given per-DP demand.

    DP positions depend only on (seed, run_index): the demand sweep rescales
    the demand of fixed layouts, one layout per run.
    """
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                       spawn_key=(run_index,)))
    positions = rng.uniform(0.0, presets.AREA_M, size=(config.dp_count, 2))
    scenario = presets.make_scenario(config.cells, positions, demand,
                                     config.energy_params)
    return scenario, compute_gains(scenario)


@dataclass(frozen=True)
class InstanceOutcome:
    demand: float
    run: int
    method: str
    solved: bool
    feasible: bool
    energy: float
    active_cells: int
    active_load_mean: float
    status: str = ""
    nodes: int = 0


@dataclass(frozen=True)
class MetricsRow:
    demand: float
    method: str
    feasibility_rate: float
    mean_energy: float
    mean_active_cells: float
    mean_active_load: float
    instances_counted: int


class VerificationError(AssertionError):
    """A method returned a solution the exact evaluator rejects."""


def _outcome_from_point(demand, run, method, point, scenario, gains,
                        status="", nodes=0) -> InstanceOutcome:
    report = cell_loads(point, scenario, gains)
    if not report.feasible:
        raise VerificationError(
            f"{method} returned an infeasible solution at demand {demand:g}, "
            f"run {run}: {[v.kind for v in report.violations]}")
    _, total = energy(point, report, scenario.energy_params, scenario.cells)
    active = point.x == 1
    return InstanceOutcome(
        demand=demand, run=run, method=method, solved=True, feasible=True,
        energy=total, active_cells=int(active.sum()),
        active_load_mean=float(report.rho[active].mean()) if active.any() else 0.0,
        status=status, nodes=nodes)


def _unsolved(demand, run, method, status) -> InstanceOutcome:
    return InstanceOutcome(demand=demand, run=run, method=method, solved=False,
                           feasible=False, energy=float("nan"), active_cells=0,
                           active_load_mean=float("nan"), status=status)


def run_milp_instance(scenario: NetworkScenario, gains: GainMatrix,
                      config: ExperimentConfig):
    """Build and solve the inner-approximation MILP for one instance.

    Returns (result, point, surrogate) where point is the verified
    extracted solution (None unless proven optimal within the limits).
    """
    pwl = build_bound(scenario.gamma_min, scenario.gamma_max, config.pwl_epsilon)
    levels = build_levels(gains, scenario.p_max, scenario.noise_power,
                          config.weights)
    model, varmap = build_problem27(scenario, gains, pwl, levels)
    settings = config.solver
    result = branch_and_bound(model, gap_tol=settings.gap_tol,
                              node_limit=settings.node_limit,
                              dive_period=settings.dive_period)
    if result.status != "optimal":
        return result, None, None
    point = extract_solution(result.assignment, varmap, scenario, gains,
                             verify=True)
    surrogate = surrogate_loads(result.assignment, varmap, scenario)
    return result, point, surrogate


def _run_method(method, scenario, gains, config, demand, run) -> InstanceOutcome:
    if method == METHOD_MILP:
        if config.n_binaries > config.solver.export_threshold:
            return _unsolved(demand, run, method, "exported")
        result, point, _ = run_milp_instance(scenario, gains, config)
        if point is None:
            status = result.status
            if status in ("feasible", "node_limit"):
                status = "unsolved"
            return _unsolved(demand, run, method, status)
        return _outcome_from_point(demand, run, method, point, scenario, gains,
                                   status=result.status, nodes=result.nodes)
    if method == METHOD_SWITCHING:
        res = baselines.max_power_switching(scenario, gains)
    elif method == METHOD_SCALING:
        res = baselines.power_scaling_exhaustive(scenario, gains)
    elif method == METHOD_FULL_POWER:
        res = baselines.full_power(scenario, gains)
        # reference line: constant-energy configuration, reported whether or
        # not it is exact-feasible at this demand
        active = res.solution.x == 1
        return InstanceOutcome(
            demand=demand, run=run, method=method, solved=True,
            feasible=res.feasible, energy=res.energy,
            active_cells=int(active.sum()),
            active_load_mean=float(res.loads[active].mean()) if active.any() else 0.0)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not res.feasible:
        return _unsolved(demand, run, method, "infeasible")
    return _outcome_from_point(demand, run, method, res.solution, scenario, gains)


def run_sweep(config: ExperimentConfig,
              ) -> tuple[list[MetricsRow], list[InstanceOutcome]]:
    """Run every method over the demand grid; aggregate per-point metrics."""
    if not config.methods:
        raise ValueError("method list is empty")
    records: list[InstanceOutcome] = []
    for demand in config.demands:
        for run in range(config.runs):
            scenario, gains = generate_instance(config, config.seed, run, demand)
            for method in config.methods:
                records.append(_run_method(method, scenario, gains, config,
                                           demand, run))
        logger.info("sweep point %.3g bit/s done", demand)
    return aggregate(config, records), records


def aggregate(config: ExperimentConfig,
              records: list[InstanceOutcome]) -> list[MetricsRow]:
    """MetricsRow per (demand, method) under the comparability rule."""
    by_key = {(r.demand, r.method, r.run): r for r in records}
    gating = [m for m in config.methods if m in OPTIMIZING_METHODS]
    rows = []
    for demand in config.demands:
        comparable = [run for run in range(config.runs)
                      if all(by_key[(demand, m, run)].feasible for m in gating)]
        for method in config.methods:
            here = [by_key[(demand, method, run)] for run in range(config.runs)]
            ok = [r for r in here if r.solved and r.feasible]
            common = [by_key[(demand, method, run)] for run in comparable]
            rows.append(MetricsRow(
                demand=demand, method=method,
                feasibility_rate=len(ok) / config.runs,
                mean_energy=float(np.mean([r.energy for r in common]))
                if common else float("nan"),
                mean_active_cells=float(np.mean([r.active_cells for r in common]))
                if common else float("nan"),
                mean_active_load=float(np.mean([r.active_load_mean for r in common]))
                if common else float("nan"),
                instances_counted=len(comparable)))
    return rows


def _fmt(value) -> str:
    if isinstance(value, float):
        if np.isnan(value):
            return ""
        return f"{value:.6g}"
    return str(value)


METRICS_HEADER = ("demand,method,feasibility_rate,mean_energy,"
                  "mean_active_cells,mean_active_load,instances_counted")
INSTANCES_HEADER = ("demand,run,method,solved,feasible,energy,active_cells,"
                    "active_load_mean,status,nodes")


def emit_csv(rows: list[MetricsRow], records: list[InstanceOutcome],
             out_dir: str | Path) -> tuple[Path, Path]:
    """Write metrics.csv and instances.csv with fixed 6-significant-digit
    formatting; identical inputs produce byte-identical files."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        metrics_path = out / "metrics.csv"
        lines = [METRICS_HEADER]
        for r in rows:
            lines.append(",".join(_fmt(v) for v in (
                r.demand, r.method, r.feasibility_rate, r.mean_energy,
                r.mean_active_cells, r.mean_active_load, r.instances_counted)))
        metrics_path.write_text("\n".join(lines) + "\n")

        instances_path = out / "instances.csv"
        lines = [INSTANCES_HEADER]
        for r in records:
            lines.append(",".join(_fmt(v) for v in (
                r.demand, r.run, r.method, int(r.solved), int(r.feasible),
                r.energy, r.active_cells, r.active_load_mean, r.status,
                r.nodes)))
        instances_path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV outputs under {out}: {exc}") from exc
    return metrics_path, instances_path
