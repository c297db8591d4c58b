"""Bounded-variable revised simplex with a composite phase 1.

The LP is held in computational form min c'z s.t. A z = b, l <= z <= u,
where z stacks the structural variables and one slack per row (slack bounds
encode the row sense).  A dense basis inverse is maintained with product-form
updates and periodically refactorized; rows and columns are equilibrated
before solving because the load-bound rows mix coefficients across twelve
orders of magnitude.

Phase 1 minimizes the total bound violation of the basic variables with the
standard +/-1 composite costs, so no artificial columns are needed and any
basis (in particular a parent node's basis during branch and bound) can be
used as a warm start.  Dantzig pricing is the default; Bland's rule takes
over after a run of degenerate pivots and guarantees termination.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

AT_LOWER = 0
AT_UPPER = 1
BASIC = 2

FEAS_TOL = 1e-7       # bound violation accepted on the scaled problem
DUAL_TOL = 1e-9       # reduced-cost threshold for entering candidates
PIVOT_TOL = 1e-9      # smallest acceptable pivot magnitude
REFACTOR_EVERY = 60   # pivots between basis refactorizations
BLAND_AFTER = 40      # consecutive degenerate pivots before Bland's rule

_INF = np.inf


@dataclass
class Basis:
    """Warm-start snapshot: basic column per row plus nonbasic rest sides."""

    basic: np.ndarray  # (m,) int32 column indices
    vstat: np.ndarray  # (n_total,) int8 status codes

    def copy(self) -> "Basis":
        return Basis(self.basic.copy(), self.vstat.copy())


@dataclass
class LpSolution:
    status: str
    values: Optional[np.ndarray]  # structural values, original units
    objective: float
    iterations: int
    basis: Optional[Basis] = None


def _equilibrate(a: np.ndarray, rounds: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Iterated geometric row/column scaling, snapped to powers of two."""
    m, n = a.shape
    row = np.ones(m)
    col = np.ones(n)
    work = np.abs(a)
    for _ in range(rounds):
        with np.errstate(divide="ignore"):
            rmax = work.max(axis=1)
            rmin = np.where(work > 0, work, np.inf).min(axis=1)
            r = np.where(rmax > 0, 1.0 / np.sqrt(rmax * rmin), 1.0)
            r = np.exp2(np.round(np.log2(r)))
            work = work * r[:, None]
            row *= r
            cmax = work.max(axis=0)
            cmin = np.where(work > 0, work, np.inf).min(axis=0)
            c = np.where(cmax > 0, 1.0 / np.sqrt(cmax * cmin), 1.0)
            c = np.exp2(np.round(np.log2(c)))
            work = work * c[None, :]
            col *= c
            if np.all(r == 1.0) and np.all(c == 1.0):
                break
    return row, col


class ScaledLp:
    """A model converted once to scaled computational form.

    Branch-and-bound nodes re-solve the same matrix under different
    structural bounds, so the conversion and scaling are hoisted here and
    :meth:`solve` only takes bound vectors and an optional warm basis.
    """

    def __init__(self, a_struct: np.ndarray, senses: list[str], b: np.ndarray,
                 c: np.ndarray, obj_constant: float = 0.0):
        m, n = a_struct.shape
        self.m = m
        self.n_struct = n
        self.obj_constant = obj_constant
        self.row_scale, self.col_scale = _equilibrate(a_struct)

        a = np.zeros((m, n + m))
        a[:, :n] = a_struct * self.row_scale[:, None] * self.col_scale[None, :]
        a[np.arange(m), n + np.arange(m)] = 1.0
        self.a = a
        self.b = b * self.row_scale
        self.c = np.zeros(n + m)
        self.c[:n] = c * self.col_scale

        self.slack_lb = np.zeros(m)
        self.slack_ub = np.zeros(m)
        for i, s in enumerate(senses):
            if s == "<=":
                self.slack_ub[i] = _INF
            elif s == ">=":
                self.slack_lb[i] = -_INF
            elif s != "=":
                raise ValueError(f"unknown sense {s!r}")

    @classmethod
    def from_model(cls, model) -> "ScaledLp":
        m, n = model.n_constraints, model.n_variables
        a = np.zeros((m, n))
        b = np.empty(m)
        senses = []
        for i, con in enumerate(model.constraints):
            for j, v in con.coeffs.items():
                a[i, j] = v
            b[i] = con.rhs
            senses.append(con.sense)
        c = np.zeros(n)
        for j, v in model.objective.items():
            c[j] = v
        return cls(a, senses, b, c, model.objective_constant)

    def full_bounds(self, lb_struct: np.ndarray, ub_struct: np.ndarray,
                    ) -> tuple[np.ndarray, np.ndarray]:
        lb = np.concatenate([lb_struct / self.col_scale, self.slack_lb])
        ub = np.concatenate([ub_struct / self.col_scale, self.slack_ub])
        return lb, ub

    def solve(self, lb_struct: np.ndarray, ub_struct: np.ndarray,
              basis: Optional[Basis] = None,
              max_pivots: Optional[int] = None) -> LpSolution:
        """Solve under the given original-unit structural bounds."""
        lb, ub = self.full_bounds(lb_struct, ub_struct)
        core = _SimplexCore(self.a, self.b, self.c, lb, ub)
        status, iters = core.run(basis, max_pivots)
        if status != OPTIMAL:
            return LpSolution(status, None, np.nan, iters,
                              core.snapshot() if status == INFEASIBLE else None)
        z = core.full_values()
        x = z[:self.n_struct] * self.col_scale
        obj = float(self.c[:self.n_struct] @ z[:self.n_struct]) + self.obj_constant
        return LpSolution(OPTIMAL, x, obj, iters, core.snapshot())


class SimplexStallError(RuntimeError):
    """Pivot budget exhausted without reaching a conclusion."""


class _SimplexCore:
    def __init__(self, a, b, c, lb, ub):
        self.a = a
        self.b = b
        self.c = c
        self.lb = lb
        self.ub = ub
        self.m, self.n = a.shape
        self.basic: np.ndarray = np.empty(0, dtype=np.int32)
        self.vstat: np.ndarray = np.empty(0, dtype=np.int8)
        self.binv: np.ndarray = np.empty((0, 0))
        self.xb: np.ndarray = np.empty(0)
        self.fixed = ~(self.lb < self.ub)  # cannot enter the basis

    # -- basis handling ----------------------------------------------------

    def snapshot(self) -> Basis:
        return Basis(self.basic.copy(), self.vstat.copy())

    def _slack_basis(self):
        n_struct = self.n - self.m
        self.basic = (n_struct + np.arange(self.m)).astype(np.int32)
        self.vstat = np.empty(self.n, dtype=np.int8)
        # nonbasics rest at the finite bound nearest the origin
        for j in range(self.n):
            self.vstat[j] = self._rest_side(j)
        self.vstat[self.basic] = BASIC

    def _rest_side(self, j: int) -> int:
        if np.isfinite(self.lb[j]):
            if np.isfinite(self.ub[j]) and abs(self.ub[j]) < abs(self.lb[j]):
                return AT_UPPER
            return AT_LOWER
        if np.isfinite(self.ub[j]):
            return AT_UPPER
        raise ValueError(f"variable {j} is free; unsupported here")

    def _install(self, basis: Optional[Basis]):
        if basis is None:
            self._slack_basis()
        else:
            self.basic = basis.basic.astype(np.int32).copy()
            self.vstat = basis.vstat.astype(np.int8).copy()
            # a warm basis may put a nonbasic on a side that is no longer
            # finite or allowed; repair to a finite side
            for j in np.flatnonzero(self.vstat != BASIC):
                side = self.vstat[j]
                bound = self.lb[j] if side == AT_LOWER else self.ub[j]
                if not np.isfinite(bound):
                    self.vstat[j] = self._rest_side(j)
        self._refactor()

    def _refactor(self):
        try:
            self.binv = np.linalg.inv(self.a[:, self.basic])
        except np.linalg.LinAlgError:
            self._repair_basis()
        self._recompute_xb()

    def _repair_basis(self):
        """Rebuild a nonsingular basis containing as many of the recorded
        basic columns as possible.

        A badly conditioned pivot can leave the recorded basis exactly
        singular.  Starting from the all-slack identity basis, the recorded
        columns are swapped back in one by one, each replacing the slack row
        where its transformed column is largest; columns that have become
        dependent are left nonbasic at a finite bound.
        """
        logger.debug("repairing a singular basis")
        n_struct = self.n - self.m
        wanted = [j for j in self.basic.tolist() if j < n_struct]
        self.basic = (n_struct + np.arange(self.m)).astype(np.int32)
        self.vstat[n_struct:] = BASIC
        self.binv = np.eye(self.m)
        holds_slack = np.ones(self.m, dtype=bool)
        for j in wanted:
            w = self.binv @ self.a[:, j]
            w_masked = np.where(holds_slack, np.abs(w), 0.0)
            r = int(np.argmax(w_masked))
            if w_masked[r] < 1e-7:
                self.vstat[j] = self._rest_side(j)  # dependent; leave it out
                continue
            evicted = self.basic[r]
            self.vstat[evicted] = self._rest_side(evicted)
            self.basic[r] = j
            self.vstat[j] = BASIC
            holds_slack[r] = False
            self._update_binv(w, r)
        self.binv = np.linalg.inv(self.a[:, self.basic])

    def _recompute_xb(self):
        x = self._nonbasic_values()
        self.xb = self.binv @ (self.b - self.a @ x)

    def _nonbasic_values(self) -> np.ndarray:
        x = np.where(self.vstat == AT_UPPER, self.ub, self.lb)
        x[self.vstat == BASIC] = 0.0
        return x

    def full_values(self) -> np.ndarray:
        x = self._nonbasic_values()
        x[self.basic] = self.xb
        return x

    # -- main loop ----------------------------------------------------------

    def run(self, basis: Optional[Basis], max_pivots: Optional[int],
            ) -> tuple[str, int]:
        self._install(basis)
        if max_pivots is None:
            max_pivots = 50 * (self.m + self.n) + 2000
        iters = 0
        degenerate_run = 0
        since_refactor = 0
        while True:
            if iters > max_pivots:
                raise SimplexStallError(
                    f"pivot limit {max_pivots} exceeded (degeneracy or cycling)")
            lo_viol = np.maximum(self.lb[self.basic] - self.xb, 0.0)
            hi_viol = np.maximum(self.xb - self.ub[self.basic], 0.0)
            lo_viol[~np.isfinite(lo_viol)] = 0.0
            hi_viol[~np.isfinite(hi_viol)] = 0.0
            infeas = lo_viol + hi_viol
            phase1 = bool(np.any(infeas > FEAS_TOL))

            if phase1:
                cb = np.where(lo_viol > FEAS_TOL, -1.0,
                              np.where(hi_viol > FEAS_TOL, 1.0, 0.0))
                y = self.binv.T @ cb
                d = -(self.a.T @ y)
            else:
                y = self.binv.T @ self.c[self.basic]
                d = self.c - self.a.T @ y

            bland = degenerate_run >= BLAND_AFTER
            q = self._price(d, bland)
            if q < 0:
                if phase1:
                    return INFEASIBLE, iters
                # clean up accumulated product-form drift before returning
                if since_refactor >= 30:
                    self._refactor()
                else:
                    self._recompute_xb()
                return OPTIMAL, iters

            sigma = 1.0 if self.vstat[q] == AT_LOWER else -1.0
            w = self.binv @ self.a[:, q]
            step, r, hit_side = self._ratio_test(q, sigma, w, phase1, bland)
            if step is None:
                return UNBOUNDED, iters
            if step <= 1e-10:
                degenerate_run += 1
            else:
                degenerate_run = 0

            if r < 0:
                # bound flip: the entering variable crosses its own range
                self.vstat[q] = AT_UPPER if self.vstat[q] == AT_LOWER else AT_LOWER
                self.xb = self.xb - sigma * step * w
            else:
                enter_from = self.lb[q] if self.vstat[q] == AT_LOWER else self.ub[q]
                leave = self.basic[r]
                self.xb = self.xb - sigma * step * w
                self.xb[r] = enter_from + sigma * step
                self.vstat[leave] = hit_side
                self.vstat[q] = BASIC
                self.basic[r] = q
                self._update_binv(w, r)
                since_refactor += 1
                if since_refactor >= REFACTOR_EVERY:
                    self._refactor()
                    since_refactor = 0
            iters += 1

    def _price(self, d: np.ndarray, bland: bool) -> int:
        can_move = ~self.fixed & (self.vstat != BASIC)
        eligible = can_move & (((self.vstat == AT_LOWER) & (d < -DUAL_TOL))
                               | ((self.vstat == AT_UPPER) & (d > DUAL_TOL)))
        idx = np.flatnonzero(eligible)
        if idx.size == 0:
            return -1
        if bland:
            return int(idx[0])
        return int(idx[np.argmax(np.abs(d[idx]))])

    def _ratio_test(self, q: int, sigma: float, w: np.ndarray, phase1: bool,
                    bland: bool):
        """Largest step for the entering variable and the blocking basic.

        Returns (step, row, hit_side); row = -1 encodes a bound flip of the
        entering variable, step = None an unbounded direction.  In phase 1
        an out-of-bounds basic blocks only when it reaches its violated
        bound, i.e. when it becomes feasible.
        """
        lb_b = self.lb[self.basic]
        ub_b = self.ub[self.basic]
        delta = sigma * w  # x_B moves by -delta * t
        steps = np.full(self.m, np.inf)
        sides = np.full(self.m, -1, dtype=np.int8)

        # pivot threshold relative to the direction's magnitude: entries far
        # below it are round-off, not usable pivots
        wtol = max(PIVOT_TOL, 1e-11 * float(np.abs(w).max(initial=0.0)))
        dec = delta > wtol   # basic decreases
        inc = delta < -wtol  # basic increases

        below = self.xb < lb_b - FEAS_TOL
        above = self.xb > ub_b + FEAS_TOL
        feas = ~below & ~above

        with np.errstate(divide="ignore", invalid="ignore"):
            # feasible basics block at the bound they move toward
            sel = feas & dec & np.isfinite(lb_b)
            steps[sel] = (self.xb[sel] - lb_b[sel]) / delta[sel]
            sides[sel] = AT_LOWER
            sel = feas & inc & np.isfinite(ub_b)
            steps[sel] = (ub_b[sel] - self.xb[sel]) / (-delta[sel])
            sides[sel] = AT_UPPER
            if phase1:
                # infeasible basics block where they regain feasibility
                sel = below & inc
                steps[sel] = (lb_b[sel] - self.xb[sel]) / (-delta[sel])
                sides[sel] = AT_LOWER
                sel = above & dec
                steps[sel] = (self.xb[sel] - ub_b[sel]) / delta[sel]
                sides[sel] = AT_UPPER

        steps = np.maximum(steps, 0.0)
        t_own = self.ub[q] - self.lb[q]  # may be inf
        t_basics = float(steps.min(initial=np.inf))

        if not np.isfinite(min(t_own, t_basics)):
            return None, -1, -1
        if t_own < t_basics - 1e-12:
            return float(t_own), -1, -1

        cand = np.flatnonzero(steps <= t_basics + 1e-12)
        if bland:
            r = int(cand[np.argmin(self.basic[cand])])
        else:
            r = int(cand[np.argmax(np.abs(w[cand]))])
        if abs(w[r]) < wtol:
            raise SimplexStallError("no acceptable pivot element")
        return float(steps[r]), r, int(sides[r])

    def _update_binv(self, w: np.ndarray, r: int):
        wr = w[r]
        br = self.binv[r] / wr
        w2 = w.copy()
        w2[r] = 0.0
        self.binv -= np.outer(w2, br)
        self.binv[r] = br


def solve_lp(model, lb_override: Optional[np.ndarray] = None,
             ub_override: Optional[np.ndarray] = None,
             basis: Optional[Basis] = None) -> LpSolution:
    """Solve the LP relaxation of a model (integrality dropped).

    Bound overrides replace the model's structural bounds; this is the
    entry point branch and bound uses with per-node bound fixings.
    """
    scaled = ScaledLp.from_model(model)
    lb = np.array([v.lb for v in model.variables]) if lb_override is None else lb_override
    ub = np.array([v.ub for v in model.variables]) if ub_override is None else ub_override
    return scaled.solve(lb, ub, basis)
