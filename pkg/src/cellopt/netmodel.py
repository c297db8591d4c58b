"""Exact downlink system model: gains, SINR, load, energy, feasibility.

This module is the ground truth the optimizers are validated against.  All
quantities are linear (watts, hertz, bits/s); dB only appears in configs.

Feasibility is data, not an exception: ``cell_loads`` returns a
:class:`LoadReport` whose ``violations`` list every broken constraint.
Checks use a small relative tolerance (``FEAS_RTOL``) so that solutions
produced by an LP-based optimizer, feasible up to solver tolerance, are not
rejected for float noise.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

MACRO = "macro"
PICO = "pico"

# Log-distance path loss, 3GPP-style baseline models, d in km.
MACRO_PL_OFFSET_DB = 128.1
MACRO_PL_SLOPE_DB = 37.6
PICO_PL_OFFSET_DB = 140.7
PICO_PL_SLOPE_DB = 36.7

MIN_DISTANCE_M = 10.0

# Relative slack applied to every feasibility check; absorbs LP-level noise
# in solutions that are exact-feasible up to solver tolerance.
FEAS_RTOL = 1e-6


@dataclass(frozen=True)
class Cell:
    """A base station and its coverage area."""

    id: int
    position: tuple[float, float]
    p_min: float
    p_max: float
    antenna_gain: float
    bias: float
    cls: str = MACRO

    def __post_init__(self):
        if not (0.0 < self.p_min <= self.p_max):
            raise ValueError(f"cell {self.id}: need 0 < p_min <= p_max")
        if self.antenna_gain <= 0.0 or self.bias <= 0.0:
            raise ValueError(f"cell {self.id}: gain and bias must be positive")
        if self.cls not in (MACRO, PICO):
            raise ValueError(f"cell {self.id}: unknown class {self.cls!r}")


@dataclass(frozen=True)
class DemandPoint:
    """A user (or cluster of users) with a data-rate demand in bits/s."""

    id: int
    position: tuple[float, float]
    demand: float
    antenna_gain: float = 1.0

    def __post_init__(self):
        if self.demand <= 0.0:
            raise ValueError(f"DP {self.id}: demand must be positive")
        if self.antenna_gain <= 0.0:
            raise ValueError(f"DP {self.id}: antenna gain must be positive")


@dataclass(frozen=True)
class EnergyParams:
    """Weights of the activity / transmit-power / load energy terms."""

    kappa1: float = 0.5
    kappa2: float = 0.5
    kappa3: float = 0.0
    t0: float = 1.0

    def __post_init__(self):
        if min(self.kappa1, self.kappa2, self.kappa3) < 0.0:
            raise ValueError("energy weights must be non-negative")
        if self.kappa1 == self.kappa2 == self.kappa3 == 0.0:
            raise ValueError("at least one energy weight must be non-zero")


@dataclass(frozen=True)
class NetworkScenario:
    """Cells, demand points and the radio parameters they share."""

    cells: tuple[Cell, ...]
    demand_points: tuple[DemandPoint, ...]
    noise_power: float
    bandwidth: float
    bw_efficiency: float
    gamma_min: float
    gamma_max: float
    energy_params: EnergyParams = EnergyParams()

    def __post_init__(self):
        if not (0.0 < self.gamma_min < self.gamma_max):
            raise ValueError("need 0 < gamma_min < gamma_max")
        if self.noise_power <= 0.0 or self.bandwidth <= 0.0:
            raise ValueError("noise power and bandwidth must be positive")
        if not (0.0 < self.bw_efficiency <= 1.0):
            raise ValueError("bandwidth efficiency must lie in (0, 1]")

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def n_dps(self) -> int:
        return len(self.demand_points)

    @property
    def p_min(self) -> np.ndarray:
        return np.array([c.p_min for c in self.cells])

    @property
    def p_max(self) -> np.ndarray:
        return np.array([c.p_max for c in self.cells])

    @property
    def biases(self) -> np.ndarray:
        return np.array([c.bias for c in self.cells])

    @property
    def demands(self) -> np.ndarray:
        return np.array([d.demand for d in self.demand_points])

    @property
    def tau_min(self) -> float:
        """Inverse rate at the SINR cap, the smallest per-bit load factor."""
        return 1.0 / math.log2(1.0 + self.gamma_max)

    @property
    def tau_max(self) -> float:
        """Inverse rate at the SINR floor, the largest per-bit load factor."""
        return 1.0 / math.log2(1.0 + self.gamma_min)


@dataclass(frozen=True)
class GainMatrix:
    """Linear attenuation factors between every cell and demand point."""

    g: np.ndarray  # shape (K, M), all entries > 0
    clamp_count: int = 0

    def __post_init__(self):
        if np.any(~np.isfinite(self.g)) or np.any(self.g <= 0.0):
            raise ValueError("gain matrix entries must be positive and finite")


@dataclass(frozen=True)
class SolutionPoint:
    """Cell activity, transmit powers and DP allocation.

    The common currency between the optimizers and the exact evaluator.
    """

    x: np.ndarray  # (K,) 0/1
    p: np.ndarray  # (K,) watts
    a: np.ndarray  # (K, M) 0/1, each column sums to 1

    def __post_init__(self):
        x = np.asarray(self.x)
        p = np.asarray(self.p)
        a = np.asarray(self.a)
        if x.ndim != 1 or p.shape != x.shape or a.ndim != 2 or a.shape[0] != x.size:
            raise ValueError("inconsistent solution shapes")
        if not np.all((x == 0) | (x == 1)):
            raise ValueError("activity flags must be 0/1")
        if not np.all((a == 0) | (a == 1)):
            raise ValueError("allocation entries must be 0/1")
        if a.shape[1] and not np.array_equal(a.sum(axis=0), np.ones(a.shape[1])):
            raise ValueError("each DP must be allocated to exactly one cell")
        if np.any(p[x == 0] != 0.0):
            raise ValueError("inactive cells must have zero power")
        if np.any(a[x == 0, :] == 1):
            raise ValueError("DPs may only be allocated to active cells")


@dataclass(frozen=True)
class Violation:
    """One broken constraint: what, where, and by how much."""

    kind: str
    index: tuple
    value: float
    limit: float


@dataclass(frozen=True)
class LoadReport:
    """Loads, serving SINRs and the feasibility verdict for a solution."""

    rho: np.ndarray  # (K,)
    sinr: np.ndarray  # (K, M), NaN where A_km = 0
    feasible: bool
    violations: tuple[Violation, ...] = field(default_factory=tuple)


def _path_gain(cls: str, distance_m: float) -> float:
    d_km = max(distance_m, MIN_DISTANCE_M) / 1000.0
    if cls == MACRO:
        pl_db = MACRO_PL_OFFSET_DB + MACRO_PL_SLOPE_DB * math.log10(d_km)
    else:
        pl_db = PICO_PL_OFFSET_DB + PICO_PL_SLOPE_DB * math.log10(d_km)
    return 10.0 ** (-pl_db / 10.0)


def compute_gains(scenario: NetworkScenario) -> GainMatrix:
    """Channel gain g[k, m] = BS gain * class path gain * DP gain.

    Distances below the 10 m floor are clamped (logged, never raised).
    """
    k_n, m_n = scenario.n_cells, scenario.n_dps
    g = np.empty((k_n, m_n))
    clamped = 0
    for k, cell in enumerate(scenario.cells):
        cx, cy = cell.position
        for m, dp in enumerate(scenario.demand_points):
            dx, dy = dp.position
            dist = math.hypot(cx - dx, cy - dy)
            if dist < MIN_DISTANCE_M:
                clamped += 1
            g[k, m] = cell.antenna_gain * _path_gain(cell.cls, dist) * dp.antenna_gain
    if clamped:
        logger.warning("clamped %d cell-DP distances below %.0f m", clamped, MIN_DISTANCE_M)
    return GainMatrix(g=g, clamp_count=clamped)


def sinr(solution: SolutionPoint, gains: GainMatrix, noise: float, k: int, m: int) -> float:
    """SINR of cell k serving DP m under full interference from active cells."""
    if solution.x[k] != 1:
        raise ValueError(f"cell {k} is not active")
    received = solution.p * solution.x * gains.g[:, m]
    interference = received.sum() - received[k]
    return received[k] / (interference + noise)


def inverse_rate(gamma: float, gamma_max: float) -> float:
    """Time per transmitted bit (up to the 1/(W*eta) factor), clamped below.

    Returns max(1/log2(1+gamma), tau_min) where tau_min = 1/log2(1+gamma_max):
    above the SINR cap the best modulation and coding scheme is already in
    use, so the rate stops improving.
    """
    if gamma <= 0.0:
        raise ValueError(f"SINR must be positive, got {gamma!r}")
    tau_min = 1.0 / math.log2(1.0 + gamma_max)
    return max(1.0 / math.log2(1.0 + gamma), tau_min)


def _serving_sinr_matrix(solution: SolutionPoint, scenario: NetworkScenario,
                         gains: GainMatrix) -> np.ndarray:
    """(K, M) serving SINRs, NaN where A_km = 0."""
    received = (solution.p * solution.x)[:, None] * gains.g  # (K, M)
    total = received.sum(axis=0)  # (M,)
    denom = total[None, :] - received + scenario.noise_power
    out = np.where(solution.a == 1, received / denom, np.nan)
    return out


def cell_loads(solution: SolutionPoint, scenario: NetworkScenario,
               gains: GainMatrix, feas_rtol: float = FEAS_RTOL) -> LoadReport:
    """Exact cell loads plus a full constraint audit of ``solution``.

    rho_k sums, over the DPs allocated to cell k, the demand expressed in
    the cell's time-frequency resources at the link's clamped inverse rate.
    Violations cover transmit power bounds, allocation to inactive cells,
    the biased strongest-server rule, the minimum SINR requirement, and
    cell overload (rho > 1).
    """
    x, p, a = solution.x, solution.p, solution.a
    k_n, m_n = scenario.n_cells, scenario.n_dps
    violations: list[Violation] = []

    p_min, p_max = scenario.p_min, scenario.p_max
    for k in range(k_n):
        if x[k] == 1 and not (p_min[k] * (1 - feas_rtol) <= p[k] <= p_max[k] * (1 + feas_rtol)):
            violations.append(Violation("power_bounds", (k,), float(p[k]), float(p_max[k])))
        if x[k] == 0 and np.any(a[k] == 1):
            violations.append(Violation("allocation_to_inactive", (k,), 1.0, 0.0))

    sinr_mat = _serving_sinr_matrix(solution, scenario, gains)

    # Biased strongest-server rule: the serving cell's biased received power
    # must match the best active cell's, up to tolerance.
    biased = scenario.biases[:, None] * (p * x)[:, None] * gains.g  # (K, M)
    active_mask = x.astype(bool)
    for m in range(m_n):
        served_by = np.flatnonzero(a[:, m] == 1)
        if served_by.size != 1:
            continue  # structural breakage already reported above
        k = served_by[0]
        best = biased[active_mask, m].max() if active_mask.any() else 0.0
        if biased[k, m] < best * (1 - feas_rtol):
            violations.append(Violation("association", (k, m), float(biased[k, m]), float(best)))
        gamma = sinr_mat[k, m]
        if gamma < scenario.gamma_min * (1 - feas_rtol):
            violations.append(Violation("sinr_min", (k, m), float(gamma), scenario.gamma_min))

    # Load: per-DP share D_m / (W eta) * clamped inverse rate.
    share = scenario.demands / (scenario.bandwidth * scenario.bw_efficiency)
    tau_min = scenario.tau_min
    with np.errstate(invalid="ignore"):
        inv_rate = np.maximum(1.0 / np.log2(1.0 + sinr_mat), tau_min)
    rho = np.nansum(np.where(solution.a == 1, share[None, :] * inv_rate, 0.0), axis=1)
    for k in range(k_n):
        if rho[k] > 1.0 + feas_rtol:
            violations.append(Violation("overload", (k,), float(rho[k]), 1.0))

    return LoadReport(rho=rho, sinr=sinr_mat, feasible=not violations,
                      violations=tuple(violations))


def energy(solution: SolutionPoint, loads: LoadReport, params: EnergyParams,
           cells: tuple[Cell, ...]) -> tuple[np.ndarray, float]:
    """Per-cell and total energy in W*T0.

    E_k = T0 * P_k^max * (kappa1 x_k + kappa2 p_k / P_k^max + kappa3 rho_k).
    """
    p_max = np.array([c.p_max for c in cells])
    e = params.t0 * p_max * (params.kappa1 * solution.x
                             + params.kappa2 * solution.p / p_max
                             + params.kappa3 * loads.rho)
    e = np.where(solution.x == 1, e, 0.0)
    return e, float(e.sum())


def allocate(x: np.ndarray, p: np.ndarray, gains: GainMatrix,
             biases: np.ndarray) -> np.ndarray:
    """Allocate every DP to the active cell with the highest biased received
    power; ties go to the lowest cell index.
    """
    x = np.asarray(x)
    if not np.any(x == 1):
        raise ValueError("no active cell")
    biased = biases[:, None] * (p * x)[:, None] * gains.g  # (K, M)
    biased = np.where(x[:, None] == 1, biased, -np.inf)
    winners = np.argmax(biased, axis=0)  # argmax takes the first (lowest) index on ties
    a = np.zeros_like(gains.g, dtype=int)
    a[winners, np.arange(gains.g.shape[1])] = 1
    return a
