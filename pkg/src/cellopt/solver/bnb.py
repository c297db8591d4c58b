"""Best-first branch and bound over the model's binary variables.

Nodes hold bound fixings only; each node LP is warm-started from its
parent's basis, which the bounded simplex repairs with its composite
phase 1.  Branching picks the most fractional binary (ties to the lowest
variable index).  Every ``dive_period`` processed nodes, and once at the
root, a depth-first dive repeatedly rounds and fixes the most fractional
binary to hunt for early incumbents; the lifted load/interference rows of
the network model leave the relaxation weak, so pruning lives or dies by
those incumbents.

Candidate incumbents are snapped to integers and re-checked against the
model row by row before being accepted; search state never depends on wall
time unless a time limit is set, so results are reproducible.
"""

from __future__ import annotations

import heapq
import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .lp import INFEASIBLE, OPTIMAL, Basis, LpSolution, ScaledLp

logger = logging.getLogger(__name__)

PRUNE_TOL = 1e-9
INT_TOL = 1e-6
CHECK_RTOL = 1e-7


@dataclass
class BnbResult:
    status: str  # optimal | feasible | infeasible | node_limit
    assignment: Optional[np.ndarray]
    objective: float
    bound: float
    gap: float
    nodes: int
    wall_time: float
    # (nodes processed, best bound, incumbent objective) per node event
    events: list[tuple[int, float, float]] = field(default_factory=list)


@dataclass(order=True)
class _Node:
    bound: float
    seq: int
    fixes: dict[int, int] = field(compare=False)
    basis: Optional[Basis] = field(compare=False, default=None)


def _gap(objective: float, bound: float) -> float:
    if not np.isfinite(objective):
        return np.inf
    return max(0.0, (objective - bound) / max(abs(objective), 1e-10))


class _Search:
    def __init__(self, model, gap_tol, node_limit, time_limit, dive_period):
        self.model = model
        self.gap_tol = gap_tol
        self.node_limit = node_limit
        self.time_limit = time_limit
        self.dive_period = dive_period
        self.lp = ScaledLp.from_model(model)
        self.lb0 = np.array([v.lb for v in model.variables])
        self.ub0 = np.array([v.ub for v in model.variables])
        self.binaries = np.array(model.binary_indices, dtype=int)
        self.incumbent: Optional[np.ndarray] = None
        self.incumbent_obj = np.inf
        self.heap: list[_Node] = []
        self.seq = 0
        self.nodes = 0
        self.events: list[tuple[int, float, float]] = []
        self.t0 = time.perf_counter()

    # -- helpers -------------------------------------------------------------

    def _bounds_for(self, fixes: dict[int, int]):
        lb = self.lb0.copy()
        ub = self.ub0.copy()
        for j, v in fixes.items():
            lb[j] = v
            ub[j] = v
        return lb, ub

    def _solve(self, fixes, basis) -> LpSolution:
        lb, ub = self._bounds_for(fixes)
        return self.lp.solve(lb, ub, basis)

    def _fractional(self, values) -> tuple[int, float]:
        """Most fractional binary, or (-1, 0) when all are integral."""
        if self.binaries.size == 0:
            return -1, 0.0
        v = values[self.binaries]
        frac = np.abs(v - np.round(v))
        j = int(np.argmax(frac))  # first max wins: lowest index on ties
        if frac[j] <= INT_TOL:
            return -1, 0.0
        return int(self.binaries[j]), float(v[j])

    def _try_incumbent(self, values) -> bool:
        snapped = values.copy()
        if self.binaries.size:
            snapped[self.binaries] = np.round(snapped[self.binaries])
        if self.model.constraint_violations(snapped, rtol=CHECK_RTOL):
            return False
        obj = self.model.objective_value(snapped)
        if obj < self.incumbent_obj - PRUNE_TOL:
            self.incumbent = snapped
            self.incumbent_obj = obj
            return True
        return False

    def best_bound(self) -> float:
        heap_best = min((n.bound for n in self.heap), default=np.inf)
        return min(heap_best, self.incumbent_obj)

    def _record_event(self):
        self.events.append((self.nodes, self.best_bound(), self.incumbent_obj))

    def _limits_hit(self) -> bool:
        if self.nodes >= self.node_limit:
            return True
        if self.time_limit is not None and time.perf_counter() - self.t0 > self.time_limit:
            return True
        return False

    # -- dive ----------------------------------------------------------------

    def _dive(self, fixes: dict[int, int], sol: LpSolution):
        """Round-and-fix probe from a node's LP solution.

        Repeatedly fixes the most fractional binary to its nearest integer
        and re-solves; stops at an incumbent, an infeasible LP, or a bound
        no better than the incumbent.  Purely heuristic: the proper children
        of the node are branched on the main heap regardless.
        """
        fixes = dict(fixes)
        for _ in range(self.binaries.size + 4):
            j, v = self._fractional(sol.values)
            if j < 0:
                self._try_incumbent(sol.values)
                return
            fixes[j] = int(round(v))
            sol = self._solve(fixes, sol.basis)
            if sol.status != OPTIMAL or sol.objective >= self.incumbent_obj - PRUNE_TOL:
                return

    # -- main loop -----------------------------------------------------------

    def run(self) -> BnbResult:
        root = self._solve({}, None)
        self.nodes = 1
        if root.status == INFEASIBLE:
            return self._finish("infeasible", np.inf)
        if root.status != OPTIMAL:
            raise RuntimeError(f"root relaxation ended {root.status}")
        root_bound = root.objective
        self._process(root, {}, dive=True)
        self._record_event()

        since_dive = 0
        while self.heap:
            if self._limits_hit():
                status = "feasible" if self.incumbent is not None else "node_limit"
                return self._finish(status, self.best_bound())
            node = heapq.heappop(self.heap)
            if node.bound >= self.incumbent_obj - PRUNE_TOL:
                continue
            # the heap is bound-ordered, so the popped bound is global
            if (self.incumbent is not None
                    and _gap(self.incumbent_obj, node.bound) <= self.gap_tol):
                return self._finish("optimal", node.bound)
            sol = self._solve(node.fixes, node.basis)
            self.nodes += 1
            since_dive += 1
            if sol.status == OPTIMAL:
                dive = since_dive >= self.dive_period
                if dive:
                    since_dive = 0
                self._process(sol, node.fixes, dive=dive)
            self._record_event()

        bound = self.incumbent_obj if self.incumbent is not None else root_bound
        if self.incumbent is None:
            return self._finish("infeasible", np.inf)
        return self._finish("optimal", bound)

    def _process(self, sol: LpSolution, fixes: dict[int, int], dive: bool):
        """Prune, accept, or branch the node with LP solution ``sol``."""
        if sol.status != OPTIMAL:
            return
        if sol.objective >= self.incumbent_obj - PRUNE_TOL:
            return
        j, v = self._fractional(sol.values)
        if j < 0:
            if not self._try_incumbent(sol.values):
                logger.debug("integral LP point failed the model re-check")
            return
        if dive:
            self._dive(fixes, sol)
            if sol.objective >= self.incumbent_obj - PRUNE_TOL:
                return
        near = int(round(v))
        for value in (near, 1 - near):
            child = dict(fixes)
            child[j] = value
            self.seq += 1
            heapq.heappush(self.heap, _Node(sol.objective, self.seq, child, sol.basis))

    def _finish(self, status: str, bound: float) -> BnbResult:
        obj = self.incumbent_obj if self.incumbent is not None else np.nan
        gap = _gap(obj, bound) if self.incumbent is not None else np.inf
        if status == "feasible" and gap <= self.gap_tol:
            status = "optimal"
        return BnbResult(status=status, assignment=self.incumbent, objective=obj,
                         bound=bound, gap=gap, nodes=self.nodes,
                         wall_time=time.perf_counter() - self.t0,
                         events=self.events)


def branch_and_bound(model, gap_tol: float = 1e-6, node_limit: int = 100000,
                     time_limit: Optional[float] = None,
                     dive_period: int = 50) -> BnbResult:
    """Solve a MilpModel with the bundled best-first branch and bound.

    Returns a proven optimum when the relative gap reaches ``gap_tol``;
    limit hits are reported in ``status`` (``feasible`` with an incumbent,
    ``node_limit`` without).  Identical inputs and settings reproduce the
    identical node count and incumbent sequence as long as no time limit
    is set.
    """
    search = _Search(model, gap_tol, node_limit, time_limit, dive_period)
    return search.run()
