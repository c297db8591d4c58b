"""Builder for the linear inner-approximation MILP and solution extraction.

The nonlinear energy-minimization problem is restricted to a mixed-integer
LINEAR model by three devices:

* products of a binary and a bounded continuous variable are replaced by a
  lifted variable tied down with the three-inequality McCormick set
  (:func:`add_lifting_set`), exact at every integral point;
* the true interference in each link's SINR denominator is replaced by one
  of the precomputed levels, selected per (cell, DP) by binaries, and forced
  to over-approximate the actual interference;
* the inverse-rate function in the cell load is replaced by the max of the
  piecewise-linear upper bound.

Every integral-feasible point of the resulting model maps, unchanged, to a
feasible point of the exact model with exact load <= surrogate load; that
mapping is what :func:`extract_solution` performs and re-verifies.

The model IR is solver-agnostic: variables with finite bounds, linear
constraints, and a linear minimization objective.  Construction order is
deterministic so identical inputs give identical models.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .netmodel import (GainMatrix, NetworkScenario, SolutionPoint, cell_loads)
from .pwl import PwlBound
from .scenarios import InterferenceLevels

BINARY = "binary"
CONTINUOUS = "continuous"

LESS_EQUAL = "<="
GREATER_EQUAL = ">="
EQUAL = "="


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float
    ub: float
    kind: str = CONTINUOUS

    def __post_init__(self):
        if not (np.isfinite(self.lb) and np.isfinite(self.ub)):
            raise ValueError(f"variable {self.name}: bounds must be finite")
        if self.lb > self.ub:
            raise ValueError(f"variable {self.name}: lb > ub")


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: dict[int, float]
    sense: str
    rhs: float


@dataclass
class MilpModel:
    """Solver-agnostic integer-linear model: min c'v subject to rows."""

    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    objective_constant: float = 0.0

    def add_variable(self, name: str, lb: float, ub: float,
                     kind: str = CONTINUOUS) -> int:
        self.variables.append(Variable(name, float(lb), float(ub), kind))
        return len(self.variables) - 1

    def add_constraint(self, name: str, coeffs: dict[int, float], sense: str,
                       rhs: float) -> int:
        if sense not in (LESS_EQUAL, GREATER_EQUAL, EQUAL):
            raise ValueError(f"unknown sense {sense!r}")
        n = len(self.variables)
        for j in coeffs:
            if not 0 <= j < n:
                raise ValueError(f"constraint {name}: undeclared variable {j}")
        self.constraints.append(Constraint(name, dict(coeffs), sense, float(rhs)))
        return len(self.constraints) - 1

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    @property
    def binary_indices(self) -> list[int]:
        return [j for j, v in enumerate(self.variables) if v.kind == BINARY]

    def objective_value(self, values: np.ndarray) -> float:
        total = self.objective_constant
        for j, c in self.objective.items():
            total += c * values[j]
        return float(total)

    def constraint_violations(self, values: np.ndarray, rtol: float = 1e-7,
                              ) -> list[tuple[str, float]]:
        """Rows broken by ``values`` beyond a relative tolerance.

        The tolerance is scaled by the largest term in the row so that rows
        with large coefficients are not rejected for float round-off.
        """
        out = []
        for con in self.constraints:
            lhs = 0.0
            scale = max(1.0, abs(con.rhs))
            for j, c in con.coeffs.items():
                term = c * values[j]
                lhs += term
                scale = max(scale, abs(term))
            tol = rtol * scale
            if con.sense == LESS_EQUAL and lhs > con.rhs + tol:
                out.append((con.name, lhs - con.rhs))
            elif con.sense == GREATER_EQUAL and lhs < con.rhs - tol:
                out.append((con.name, con.rhs - lhs))
            elif con.sense == EQUAL and abs(lhs - con.rhs) > tol:
                out.append((con.name, abs(lhs - con.rhs)))
        for j, v in enumerate(self.variables):
            btol = rtol * max(1.0, abs(v.lb), abs(v.ub))
            if values[j] < v.lb - btol or values[j] > v.ub + btol:
                out.append((f"bound:{v.name}", float(max(v.lb - values[j],
                                                         values[j] - v.ub))))
        return out


class VarMap:
    """Bidirectional map between symbol keys like ('A', k, m) and var ids."""

    def __init__(self):
        self._by_key: dict[tuple, int] = {}
        self._by_id: dict[int, tuple] = {}

    def add(self, key: tuple, var_id: int) -> None:
        if key in self._by_key:
            raise ValueError(f"duplicate symbol {key!r}")
        if var_id in self._by_id:
            raise ValueError(f"variable {var_id} already mapped")
        self._by_key[key] = var_id
        self._by_id[var_id] = key

    def id_of(self, *key) -> int:
        return self._by_key[tuple(key)]

    def key_of(self, var_id: int) -> tuple:
        return self._by_id[var_id]

    def __contains__(self, key: tuple) -> bool:
        return tuple(key) in self._by_key

    def __len__(self) -> int:
        return len(self._by_key)

    @staticmethod
    def render(key: tuple) -> str:
        return "_".join(str(part) for part in key)


def add_lifting_set(model: MilpModel, r: int, r_bar: float, b: int, a: int,
                    name: str, r_coeff: float = 1.0) -> None:
    """Append the three affine rows forcing a = (r_coeff * r) * b.

    ``r_coeff * r`` must lie in [0, r_bar].  At b = 0 the rows pin a to 0;
    at b = 1 they pin a to r_coeff * r; the LP relaxation keeps slack in
    between.
    """
    if r_bar <= 0.0:
        raise ValueError(f"lifting {name}: upper bound must be positive")
    # a >= r - (1 - b) r_bar
    model.add_constraint(f"{name}_lo", {a: 1.0, r: -r_coeff, b: -r_bar},
                         GREATER_EQUAL, -r_bar)
    # a <= r
    model.add_constraint(f"{name}_par", {a: 1.0, r: -r_coeff}, LESS_EQUAL, 0.0)
    # a <= b r_bar
    model.add_constraint(f"{name}_cap", {a: 1.0, b: -r_bar}, LESS_EQUAL, 0.0)


def build_problem27(scenario: NetworkScenario, gains: GainMatrix,
                    pwl: PwlBound, levels: InterferenceLevels,
                    ) -> tuple[MilpModel, VarMap]:
    """Assemble the inner-approximation MILP for one network instance.

    Variables (in order): activity x_k, power pt_k, load surrogate rho_k,
    allocation A_k_m, lifted power-allocation Om_k_m, per-link load bound
    mu_k_m, lifted load Lam_k_m, level selectors phi_n_k_m, lifted received
    power Phi_n_k_m.  All bounds are finite and derived from the power
    limits, the level tensor and the first PWL intercept; no synthetic
    big-M constants appear anywhere.
    """
    k_n, m_n = scenario.n_cells, scenario.n_dps
    n_n = levels.n_levels
    g = gains.g
    psi = levels.psi
    p_min, p_max = scenario.p_min, scenario.p_max
    theta = scenario.biases
    sigma2 = scenario.noise_power
    gamma_min = scenario.gamma_min
    beta1 = pwl.beta1
    if beta1 < scenario.tau_max:
        raise ValueError(
            f"PWL bound does not cover the SINR floor: beta1 = {beta1:.6g} "
            f"< tau_max = {scenario.tau_max:.6g}")
    if abs(pwl.gamma_lo - gamma_min) > 1e-12 * gamma_min:
        raise ValueError("PWL bound was built for a different SINR interval")

    model = MilpModel()
    vm = VarMap()

    def new_var(key, lb, ub, kind):
        vid = model.add_variable(VarMap.render(key), lb, ub, kind)
        vm.add(key, vid)
        return vid

    x = [new_var(("x", k), 0, 1, BINARY) for k in range(k_n)]
    pt = [new_var(("pt", k), 0.0, p_max[k], CONTINUOUS) for k in range(k_n)]
    rho = [new_var(("rho", k), 0.0, 1.0, CONTINUOUS) for k in range(k_n)]
    a_ = [[new_var(("A", k, m), 0, 1, BINARY) for m in range(m_n)]
          for k in range(k_n)]
    om = [[new_var(("Om", k, m), 0.0, p_max[k], CONTINUOUS) for m in range(m_n)]
          for k in range(k_n)]
    mu = [[new_var(("mu", k, m), 0.0, beta1, CONTINUOUS) for m in range(m_n)]
          for k in range(k_n)]
    lam = [[new_var(("Lam", k, m), 0.0, beta1, CONTINUOUS) for m in range(m_n)]
           for k in range(k_n)]
    phi = [[[new_var(("phi", n, k, m), 0, 1, BINARY) for m in range(m_n)]
            for k in range(k_n)] for n in range(n_n)]
    cphi = [[[new_var(("Phi", n, k, m), 0.0, p_max[k] * g[k, m], CONTINUOUS)
              for m in range(m_n)] for k in range(k_n)] for n in range(n_n)]

    # power / activity coupling: x_k Pmin_k <= pt_k <= x_k Pmax_k
    for k in range(k_n):
        model.add_constraint(f"pmin_{k}", {pt[k]: 1.0, x[k]: -p_min[k]},
                             GREATER_EQUAL, 0.0)
        model.add_constraint(f"pmax_{k}", {pt[k]: 1.0, x[k]: -p_max[k]},
                             LESS_EQUAL, 0.0)

    # each DP served by exactly one cell, and only by an active one
    for m in range(m_n):
        model.add_constraint(f"alloc_{m}", {a_[k][m]: 1.0 for k in range(k_n)},
                             EQUAL, 1.0)
    for k in range(k_n):
        for m in range(m_n):
            model.add_constraint(f"actx_{k}_{m}", {a_[k][m]: 1.0, x[k]: -1.0},
                                 LESS_EQUAL, 0.0)

    # Om_km = pt_k * A_km
    for k in range(k_n):
        for m in range(m_n):
            add_lifting_set(model, pt[k], p_max[k], a_[k][m], om[k][m],
                            f"om_{k}_{m}")

    # biased association: sum_k Om_km theta_k g_km >= theta_j pt_j g_jm.
    # The x_j factor is absorbed because pt_j = 0 whenever x_j = 0.
    for j in range(k_n):
        for m in range(m_n):
            coeffs = {om[k][m]: theta[k] * g[k, m] for k in range(k_n)}
            coeffs[pt[j]] = coeffs.get(pt[j], 0.0) - theta[j] * g[j, m]
            model.add_constraint(f"assoc_{j}_{m}", coeffs, GREATER_EQUAL, 0.0)

    # minimum SINR of the serving link; (pt_j - Om_jm) g_jm is the
    # interference at DP m excluding its serving cell
    for m in range(m_n):
        coeffs: dict[int, float] = {}
        for k in range(k_n):
            coeffs[om[k][m]] = (1.0 + gamma_min) * g[k, m]
            coeffs[pt[k]] = -gamma_min * g[k, m]
        model.add_constraint(f"sinr_{m}", coeffs, GREATER_EQUAL,
                             gamma_min * sigma2)

    # exactly one level selected, and it over-approximates the interference
    for k in range(k_n):
        for m in range(m_n):
            model.add_constraint(
                f"phisum_{k}_{m}", {phi[n][k][m]: 1.0 for n in range(n_n)},
                EQUAL, 1.0)
            coeffs = {phi[n][k][m]: psi[n, k, m] for n in range(n_n)}
            for j in range(k_n):
                coeffs[pt[j]] = coeffs.get(pt[j], 0.0) - g[j, m]
                coeffs[om[j][m]] = coeffs.get(om[j][m], 0.0) + g[j, m]
            model.add_constraint(f"intcov_{k}_{m}", coeffs, GREATER_EQUAL,
                                 sigma2)

    # Phi_nkm = (pt_k g_km) * phi_nkm, lifted on the scaled power
    for n in range(n_n):
        for k in range(k_n):
            for m in range(m_n):
                add_lifting_set(model, pt[k], p_max[k] * g[k, m],
                                phi[n][k][m], cphi[n][k][m],
                                f"lift_{n}_{k}_{m}", r_coeff=g[k, m])

    # per-link load bound: mu_km >= alpha_i sum_n Phi_nkm / Psi_nkm + beta_i
    for i, (alpha, beta) in enumerate(pwl.pieces):
        for k in range(k_n):
            for m in range(m_n):
                coeffs = {mu[k][m]: 1.0}
                if alpha != 0.0:
                    for n in range(n_n):
                        coeffs[cphi[n][k][m]] = -alpha / psi[n, k, m]
                model.add_constraint(f"pwl_{i}_{k}_{m}", coeffs,
                                     GREATER_EQUAL, beta)

    # Lam_km = mu_km * A_km; beta1 bounds mu from above
    for k in range(k_n):
        for m in range(m_n):
            add_lifting_set(model, mu[k][m], beta1, a_[k][m], lam[k][m],
                            f"lam_{k}_{m}")

    # load definition; rho_k <= 1 is carried by the variable bound
    share = scenario.demands / (scenario.bandwidth * scenario.bw_efficiency)
    for k in range(k_n):
        coeffs = {rho[k]: 1.0}
        for m in range(m_n):
            coeffs[lam[k][m]] = -share[m]
        model.add_constraint(f"load_{k}", coeffs, EQUAL, 0.0)

    ep = scenario.energy_params
    for k in range(k_n):
        if ep.kappa1:
            model.objective[x[k]] = ep.t0 * ep.kappa1 * p_max[k]
        if ep.kappa2:
            model.objective[pt[k]] = ep.t0 * ep.kappa2
        if ep.kappa3:
            model.objective[rho[k]] = ep.t0 * ep.kappa3 * p_max[k]

    return model, vm


class InnerApproximationError(RuntimeError):
    """An extracted MILP solution failed the exact-model re-check.

    By construction this must never happen; it is the primary correctness
    alarm of the whole pipeline.
    """


def extract_solution(assignment: np.ndarray, varmap: VarMap,
                     scenario: NetworkScenario, gains: GainMatrix,
                     verify: bool = True) -> SolutionPoint:
    """Turn an integral-feasible model assignment into a SolutionPoint.

    Binaries are snapped to 0/1 and powers taken from pt_k.  When ``verify``
    is set the point is re-checked against the exact evaluator; a failure
    raises :class:`InnerApproximationError`.
    """
    k_n, m_n = scenario.n_cells, scenario.n_dps
    x = np.array([round(assignment[varmap.id_of("x", k)]) for k in range(k_n)],
                 dtype=int)
    p = np.array([assignment[varmap.id_of("pt", k)] for k in range(k_n)])
    p = np.where(x == 1, p, 0.0)
    a = np.zeros((k_n, m_n), dtype=int)
    for k in range(k_n):
        for m in range(m_n):
            a[k, m] = round(assignment[varmap.id_of("A", k, m)])
    point = SolutionPoint(x=x, p=p, a=a)
    if verify:
        report = cell_loads(point, scenario, gains)
        if not report.feasible:
            raise InnerApproximationError(
                "inner-approximation violation: extracted point breaks "
                f"{[v.kind for v in report.violations]}")
    return point


def surrogate_loads(assignment: np.ndarray, varmap: VarMap,
                    scenario: NetworkScenario) -> np.ndarray:
    """Model-side load surrogate rho_k at an assignment."""
    return np.array([assignment[varmap.id_of("rho", k)]
                     for k in range(scenario.n_cells)])
