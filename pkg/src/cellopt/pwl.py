"""Error-constrained piecewise-linear over-approximation of the inverse rate.

The cell-load surrogate in the MILP needs linear upper bounds on
f(gamma) = 1/log2(1+gamma) over the operating SINR interval.  Pieces are
chords between breakpoints chosen recursively: each chord's worst-case
error is evaluated at the stationary point of the error function, located
in closed form through the Lambert W function, and the interval is split
there whenever the error exceeds the threshold.

f is strictly convex on (0, inf), so chords lie on or above f on their own
interval and the pointwise maximum of all pieces is a valid upper bound
everywhere on [gamma_lo, gamma_hi].  A defensive per-piece lift is applied
anyway so the bound property is machine-checked rather than assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LN2 = math.log(2.0)

_MAX_DEPTH = 64
_MIN_SPAN = 1e-9


def f_inverse_rate(gamma):
    """1 / log2(1 + gamma), scalar or array."""
    return LN2 / np.log1p(gamma)


def lambert_w(y: float) -> float:
    """Principal-branch Lambert W for y >= 0 via Halley iteration.

    Solves w * exp(w) = y to 1e-12 relative accuracy.  Arguments in this
    module are always non-negative, so no branch-point handling is needed.
    """
    if y < 0.0:
        raise ValueError(f"lambert_w requires y >= 0, got {y!r}")
    if y == 0.0:
        return 0.0
    # log-based seed: exact asymptotics for large y, decent for small y
    if y > math.e:
        ly = math.log(y)
        w = ly - math.log(ly)
    else:
        w = math.log1p(y) * 0.7
    for _ in range(64):
        ew = math.exp(w)
        err = w * ew - y
        # Halley step
        denom = ew * (w + 1.0) - (w + 2.0) * err / (2.0 * w + 2.0)
        dw = err / denom
        w -= dw
        if abs(dw) <= 1e-14 * (1.0 + abs(w)):
            break
    return w


def max_error_point(alpha: float) -> float:
    """Stationary point of the chord error xi(gamma) = u(gamma) - f(gamma).

    For a chord of slope alpha < 0 the derivative
    xi'(gamma) = alpha + ln2 / ((gamma+1) * ln^2(gamma+1))
    vanishes at gamma = exp(2 W(sqrt(-ln2/alpha)/2)) - 1, the unique error
    maximum of the chord on its interval (natural logs throughout).
    """
    if alpha >= 0.0:
        raise ValueError(f"chord slope must be negative, got {alpha!r}")
    w = lambert_w(0.5 * math.sqrt(-LN2 / alpha))
    return math.expm1(2.0 * w)


def _chord(gamma1: float, gamma2: float) -> tuple[float, float]:
    f1 = float(f_inverse_rate(gamma1))
    f2 = float(f_inverse_rate(gamma2))
    alpha = (f2 - f1) / (gamma2 - gamma1)
    beta = f1 - alpha * gamma1
    return alpha, beta


def bps(gamma1: float, gamma2: float, epsilon: float, _depth: int = 0) -> list[float]:
    """Recursive breakpoint selection over [gamma1, gamma2].

    The chord through the interval endpoints is accepted when its error at
    the stationary point stays within ``epsilon``; otherwise the interval is
    split at that point and both halves are refined.  Returns interior
    breakpoints in ascending order (endpoints excluded).
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    if _depth > _MAX_DEPTH:
        raise RuntimeError("breakpoint recursion exceeded depth 64")
    if gamma2 - gamma1 < _MIN_SPAN:
        return []
    alpha, beta = _chord(gamma1, gamma2)
    delta = max_error_point(alpha)
    if not (gamma1 < delta < gamma2):
        # stationary point collapsed onto an endpoint: chord error ~ 0
        return []
    xi = alpha * delta + beta - float(f_inverse_rate(delta))
    if abs(xi) <= epsilon:
        return []
    left = bps(gamma1, delta, epsilon, _depth + 1)
    right = bps(delta, gamma2, epsilon, _depth + 1)
    return left + [delta] + right


@dataclass(frozen=True)
class PwlBound:
    """Linear pieces whose pointwise max over-approximates f on an interval.

    ``pieces`` holds (slope, intercept) pairs ordered from the steepest
    chord at ``gamma_lo`` to the constant tail (0, tau_min) that covers all
    SINRs above ``gamma_hi``.
    """

    pieces: tuple[tuple[float, float], ...]
    gamma_lo: float
    gamma_hi: float
    epsilon: float
    tau_min: float
    tau_max: float
    breakpoints: tuple[float, ...]

    def __post_init__(self):
        if any(alpha > 0.0 for alpha, _ in self.pieces):
            raise ValueError("all piece slopes must be <= 0")
        if self.pieces[-1] != (0.0, self.tau_min):
            raise ValueError("last piece must be the constant tail")

    @property
    def n_pieces(self) -> int:
        return len(self.pieces)

    @property
    def beta1(self) -> float:
        """Intercept of the first piece, the largest value any piece takes
        on gamma >= 0; serves as the upper bound of the load surrogate."""
        return self.pieces[0][1]

    def evaluate(self, gamma):
        """max_i (alpha_i * gamma + beta_i), scalar or array."""
        gamma = np.asarray(gamma, dtype=float)
        vals = [alpha * gamma + beta for alpha, beta in self.pieces]
        return np.maximum.reduce(vals)

    def to_table(self) -> str:
        """Plain-text table of breakpoints and pieces (golden-file format)."""
        lines = [
            f"interval {self.gamma_lo:.12g} {self.gamma_hi:.12g}",
            f"epsilon {self.epsilon:.12g}",
            f"tau_min {self.tau_min:.12g}",
            f"tau_max {self.tau_max:.12g}",
            "breakpoints " + " ".join(f"{b:.12g}" for b in self.breakpoints),
        ]
        for alpha, beta in self.pieces:
            lines.append(f"piece {alpha:.12g} {beta:.12g}")
        return "\n".join(lines) + "\n"


def build_bound(gamma_min: float, gamma_max: float, epsilon: float) -> PwlBound:
    """Build the over-approximating piece set for [gamma_min, gamma_max].

    Breakpoints come from :func:`bps`; each chord is lifted by its interval's
    maximum deficit (measured at the stationary point and the endpoints) so
    the bound property holds exactly even if f were locally non-convex.  The
    constant tail (0, tau_min) is appended last.
    """
    if not (0.0 < gamma_min < gamma_max):
        raise ValueError("need 0 < gamma_min < gamma_max")
    tau_min = float(f_inverse_rate(gamma_max))
    tau_max = float(f_inverse_rate(gamma_min))
    bks = [gamma_min] + bps(gamma_min, gamma_max, epsilon) + [gamma_max]
    pieces: list[tuple[float, float]] = []
    for g1, g2 in zip(bks[:-1], bks[1:]):
        alpha, beta = _chord(g1, g2)
        probe = [g1, g2]
        if alpha < 0.0:
            delta = max_error_point(alpha)
            if g1 < delta < g2:
                probe.append(delta)
        deficit = max(float(f_inverse_rate(g)) - (alpha * g + beta) for g in probe)
        pieces.append((alpha, beta + max(0.0, deficit)))
    pieces.append((0.0, tau_min))
    return PwlBound(pieces=tuple(pieces), gamma_lo=gamma_min, gamma_hi=gamma_max,
                    epsilon=epsilon, tau_min=tau_min, tau_max=tau_max,
                    breakpoints=tuple(bks))
