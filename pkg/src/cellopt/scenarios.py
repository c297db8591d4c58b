"""Discrete interference levels used by the MILP's scenario selection.

For each (cell, DP) pair a small set of interference levels is precomputed
from the strongest interferer, the second strongest, and the remainder, each
weighted by a row of the weight table.  With the first row at (1, 1, 1) and
nominal powers at the maximum, level 1 upper-bounds the true interference of
every feasible power and activity assignment, which is what lets the MILP
certify feasibility for the exact model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

# Default weight rows (primary, secondary, remaining interferers).
TABLE1_WEIGHTS: tuple[tuple[float, float, float], ...] = (
    (1.0, 1.0, 1.0),
    (0.75, 1.0, 1.0),
    (0.5, 1.0, 1.0),
    (0.25, 1.0, 1.0),
    (0.0, 1.0, 1.0),
    (0.0, 0.0, 1.0),
    (0.0, 0.0, 0.0),
)


@dataclass(frozen=True)
class InterferenceLevels:
    """psi[n, k, m]: the n-th interference level for cell k serving DP m."""

    psi: np.ndarray  # (N, K, M) watts
    weights: tuple[tuple[float, float, float], ...]
    nominal_powers: np.ndarray  # (K,) watts

    def __post_init__(self):
        if np.any(~np.isfinite(self.psi)):
            raise ValueError("interference levels must be finite")

    @property
    def n_levels(self) -> int:
        return self.psi.shape[0]


def rank_interferers(gains, nominal_powers: np.ndarray, k: int,
                     m: int) -> tuple[Optional[int], Optional[int]]:
    """Strongest and second-strongest interferer of (k, m) by received power.

    Ranks p_j * g_jm over j != k, ties to the lower index.  With fewer than
    three cells the missing ranks are returned as None and treated as
    zero-power phantom interferers by the level construction.
    """
    g = gains.g
    received = np.asarray(nominal_powers) * g[:, m]
    order = [j for j in range(g.shape[0]) if j != k]
    # stable sort keeps the lower index first among ties
    order.sort(key=lambda j: -received[j])
    v = order[0] if len(order) >= 1 else None
    w = order[1] if len(order) >= 2 else None
    return v, w


def build_levels(gains, nominal_powers: np.ndarray, noise: float,
                 weights: Sequence[tuple[float, float, float]] = TABLE1_WEIGHTS,
                 ) -> InterferenceLevels:
    """Interference level tensor at the given nominal powers.

    psi[n,k,m] = lP * p_v g_vm + lS * p_w g_wm + lR * sum_rest p_j g_jm + noise,
    where v, w and the remainder all exclude the serving cell k.
    """
    weights = tuple(tuple(float(x) for x in row) for row in weights)
    if not weights:
        raise ValueError("weight table must be non-empty")
    if weights[0] != (1.0, 1.0, 1.0):
        raise ValueError("first weight row must be (1, 1, 1) so that level 1 "
                         "dominates the true interference at nominal powers")
    g = gains.g
    k_n, m_n = g.shape
    nominal = np.asarray(nominal_powers, dtype=float)
    psi = np.empty((len(weights), k_n, m_n))
    for k in range(k_n):
        for m in range(m_n):
            v, w = rank_interferers(gains, nominal, k, m)
            pv = nominal[v] * g[v, m] if v is not None else 0.0
            pw = nominal[w] * g[w, m] if w is not None else 0.0
            rest = sum(nominal[j] * g[j, m] for j in range(k_n)
                       if j != k and j != v and j != w)
            for n, (lp, ls, lr) in enumerate(weights):
                psi[n, k, m] = lp * pv + ls * pw + lr * rest + noise
    return InterferenceLevels(psi=psi, weights=weights, nominal_powers=nominal)
