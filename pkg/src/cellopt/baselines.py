"""Comparison schemes: exhaustive cell switching and per-cell power scaling.

Both baselines search over on/off configurations and evaluate candidates
with the exact system model, so anything they return is exact-feasible by
construction.  They are the reference points the MILP is benchmarked
against in the sweep harness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .netmodel import (GainMatrix, NetworkScenario, SolutionPoint, allocate,
                       cell_loads, energy)

MAX_ENUM_CELLS = 20


@dataclass(frozen=True)
class BaselineResult:
    solution: Optional[SolutionPoint]
    energy: float
    feasible: bool
    configs_evaluated: int
    loads: Optional[np.ndarray] = None


def _evaluate(x: np.ndarray, p: np.ndarray, scenario: NetworkScenario,
              gains: GainMatrix):
    a = allocate(x, p, gains, scenario.biases)
    point = SolutionPoint(x=x, p=np.where(x == 1, p, 0.0), a=a)
    report = cell_loads(point, scenario, gains)
    if not report.feasible:
        return None, np.inf, None
    _, total = energy(point, report, scenario.energy_params, scenario.cells)
    return point, total, report.rho


def _all_off_result(scenario: NetworkScenario, configs: int) -> BaselineResult:
    k = scenario.n_cells
    point = SolutionPoint(x=np.zeros(k, dtype=int), p=np.zeros(k),
                          a=np.zeros((k, 0), dtype=int))
    return BaselineResult(solution=point, energy=0.0, feasible=True,
                          configs_evaluated=configs, loads=np.zeros(k))


def max_power_switching(scenario: NetworkScenario,
                        gains: GainMatrix) -> BaselineResult:
    """Exhaustive on/off search with transmit powers pinned to the maximum.

    Enumerates all activity patterns in ascending binary order, which makes
    the lowest pattern win energy ties deterministically.
    """
    k = scenario.n_cells
    if k > MAX_ENUM_CELLS:
        raise ValueError(f"exhaustive switching supports at most {MAX_ENUM_CELLS} cells")
    if scenario.n_dps == 0:
        return _all_off_result(scenario, configs=1)
    p_max = scenario.p_max
    best: Optional[tuple[SolutionPoint, float, np.ndarray]] = None
    configs = 0
    for mask in range(1, 2 ** k):
        x = np.array([(mask >> i) & 1 for i in range(k)], dtype=int)
        configs += 1
        point, total, rho = _evaluate(x, p_max * x, scenario, gains)
        if point is not None and (best is None or total < best[1]):
            best = (point, total, rho)
    if best is None:
        return BaselineResult(None, np.inf, False, configs)
    return BaselineResult(best[0], best[1], True, configs, loads=best[2])


def _cell_feasible(k: int, q: float, p: np.ndarray, alloc_rows: np.ndarray,
                   scenario: NetworkScenario, gains: GainMatrix) -> bool:
    """Cell k serves its DPs within load and SINR limits at power q."""
    mine = np.flatnonzero(alloc_rows)
    if mine.size == 0:
        return True
    g = gains.g
    others = p.copy()
    others[k] = 0.0
    interference = others @ g[:, mine] + scenario.noise_power
    gamma = q * g[k, mine] / interference
    if np.any(gamma < scenario.gamma_min):
        return False
    inv_rate = np.maximum(1.0 / np.log2(1.0 + gamma), scenario.tau_min)
    share = scenario.demands[mine] / (scenario.bandwidth * scenario.bw_efficiency)
    return float(share @ inv_rate) <= 1.0


def _scale_config(x: np.ndarray, scenario: NetworkScenario, gains: GainMatrix,
                  max_sweeps: int, tol: float) -> Optional[np.ndarray]:
    """Gauss-Seidel power scaling for one activity pattern.

    Each sweep re-allocates the DPs, then bisects every active cell to the
    smallest power that keeps its own DPs served, given the other cells'
    current powers; unattainable targets are projected onto the bounds.
    Returns the power vector, or None when the sweeps do not converge.
    """
    p_min, p_max = scenario.p_min, scenario.p_max
    active = np.flatnonzero(x)
    p = np.where(x == 1, p_max, 0.0)
    for _ in range(max_sweeps):
        a = allocate(x, p, gains, scenario.biases)
        previous = p.copy()
        for k in active:
            if _cell_feasible(k, p_min[k], p, a[k], scenario, gains):
                p[k] = p_min[k]
                continue
            if not _cell_feasible(k, p_max[k], p, a[k], scenario, gains):
                p[k] = p_max[k]  # projection; exact check decides later
                continue
            lo, hi = p_min[k], p_max[k]
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if _cell_feasible(k, mid, p, a[k], scenario, gains):
                    hi = mid
                else:
                    lo = mid
            p[k] = hi
        if float(np.max(np.abs(p - previous))) < tol:
            return p
    return None


def power_scaling_exhaustive(scenario: NetworkScenario, gains: GainMatrix,
                             max_sweeps: int = 100,
                             tol: float = 1e-6) -> BaselineResult:
    """Power scaling applied to every on/off configuration.

    Configurations whose scaling loop fails to converge are treated as
    infeasible; every returned solution is re-validated with the exact
    evaluator.
    """
    k = scenario.n_cells
    if k > MAX_ENUM_CELLS:
        raise ValueError(f"exhaustive scaling supports at most {MAX_ENUM_CELLS} cells")
    if scenario.n_dps == 0:
        return _all_off_result(scenario, configs=1)
    best: Optional[tuple[SolutionPoint, float, np.ndarray]] = None
    configs = 0
    for mask in range(1, 2 ** k):
        x = np.array([(mask >> i) & 1 for i in range(k)], dtype=int)
        configs += 1
        p = _scale_config(x, scenario, gains, max_sweeps, tol)
        if p is None:
            continue
        point, total, rho = _evaluate(x, p, scenario, gains)
        if point is not None and (best is None or total < best[1]):
            best = (point, total, rho)
    if best is None:
        return BaselineResult(None, np.inf, False, configs)
    return BaselineResult(best[0], best[1], True, configs, loads=best[2])


def full_power(scenario: NetworkScenario, gains: GainMatrix) -> BaselineResult:
    """All cells on at maximum power: the constant reference line."""
    if scenario.n_dps == 0:
        return _all_off_result(scenario, configs=1)
    x = np.ones(scenario.n_cells, dtype=int)
    p = scenario.p_max.copy()
    a = allocate(x, p, gains, scenario.biases)
    point = SolutionPoint(x=x, p=p, a=a)
    report = cell_loads(point, scenario, gains)
    _, total = energy(point, report, scenario.energy_params, scenario.cells)
    return BaselineResult(solution=point, energy=total, feasible=report.feasible,
                          configs_evaluated=1, loads=report.rho)
