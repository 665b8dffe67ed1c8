"""Geometry of the attacker's feasible set.

The set is ``{w >= 0, max(w) <= l_max, sum|w - 1| <= b_max}``: nonnegative
weights, a per-row replication cap, and an L1 budget around the all-ones
vector.  It always contains all-ones.  Everything here is a pure function of
immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Budget, WeightVector, _weight_values

__all__ = ["FeasibleSet"]

FEASIBILITY_TOL = 1e-8


@dataclass(frozen=True)
class FeasibleSet:
    n: int
    budget: Budget

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))

    def contains(self, w, tol: float = FEASIBILITY_TOL) -> bool:
        """Check the nonnegativity, box, and L1 constraints within ``tol``."""
        v = _weight_values(w, self.n)
        if np.min(v) < -tol:
            return False
        if np.max(v) > self.budget.l_max + tol:
            return False
        return float(np.sum(np.abs(v - 1.0))) <= self.budget.b_max + tol

    def project(self, v) -> WeightVector:
        """Exact Euclidean projection onto the feasible set.

        After shifting by the all-ones center the set is an L1 ball
        intersected with a box, so the projection is a box-clipped
        soft-threshold whose multiplier is found by bisection on the
        piecewise-linear L1-norm map.  Runs in O(n log(1/tol)) with no
        external solver.
        """
        z = np.asarray(v, dtype=float).ravel() - 1.0
        if z.shape[0] != self.n:
            raise ValueError(f"vector has length {z.shape[0]}, expected {self.n}")
        radius = float(self.budget.b_max)
        lo, hi = -1.0, float(self.budget.l_max - 1)

        u = np.clip(z, lo, hi)
        if float(np.sum(np.abs(u))) <= radius + 1e-12:
            return WeightVector(u + 1.0)

        def shrunk(lam: float) -> np.ndarray:
            soft = np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)
            return np.clip(soft, lo, hi)

        lam_lo, lam_hi = 0.0, float(np.max(np.abs(z)))
        for _ in range(200):
            mid = 0.5 * (lam_lo + lam_hi)
            if float(np.sum(np.abs(shrunk(mid)))) > radius:
                lam_lo = mid
            else:
                lam_hi = mid
            if lam_hi - lam_lo <= 1e-10:
                break
        # lam_hi is on the feasible side of the crossing.
        return WeightVector(shrunk(lam_hi) + 1.0)

    def round_constrained(self, w) -> WeightVector:
        """Optimal rounding of a feasible relaxed vector to an integer point.

        Each coordinate moves to one of the two integers bracketing it; the L1
        budget leaves room to round ``n_up`` fractional parts away from one,
        and rounding up only pays when the fractional part exceeds one half,
        so the largest such fractional parts are taken first.  Ties are broken
        by ascending index (the minimizer is not always unique).  The output
        is integral and feasible whenever the input is feasible, which this
        procedure requires.
        """
        v = _weight_values(w, self.n)
        if not self.contains(v):
            raise ValueError("round_constrained requires a feasible input vector")
        delta = np.abs(v - 1.0)
        base = np.floor(delta)
        frac = delta - base
        n_up = int(round(self.budget.b_max - base.sum()))
        above_half = frac > 0.5
        if int(above_half.sum()) <= n_up:
            alpha = above_half.astype(float)
        else:
            alpha = np.zeros(self.n)
            order = np.argsort(-frac, kind="stable")[:n_up]
            alpha[order] = 1.0
        sign = np.where(v >= 1.0, 1.0, -1.0)  # sign(0) treated as +1
        rounded = 1.0 + sign * (base + alpha)
        return WeightVector(rounded, integral=True)

    def unit_move_feasibility(self, w) -> tuple[np.ndarray, np.ndarray]:
        """Boolean masks (up_ok, down_ok) for single-coordinate +/-1 moves.

        O(n) via the L1 delta of each move; used by the coordinate-descent
        attack where a membership check per candidate would be quadratic.
        """
        v = _weight_values(w, self.n)
        r = np.rint(v)
        if np.max(np.abs(v - r)) > 1e-9:
            raise ValueError("unit moves are defined for integral weights only")
        l1 = float(np.sum(np.abs(r - 1.0)))
        b = float(self.budget.b_max)
        dist = np.abs(r - 1.0)
        up_l1 = l1 - dist + np.abs(r + 1.0 - 1.0)
        down_l1 = l1 - dist + np.abs(r - 1.0 - 1.0)
        up_ok = (r + 1 <= self.budget.l_max) & (up_l1 <= b + 1e-9)
        down_ok = (r - 1 >= 0) & (down_l1 <= b + 1e-9)
        return up_ok, down_ok

    def feasible_unit_moves(self, w) -> list[tuple[int, int]]:
        """All (index, direction) single-unit moves that stay feasible."""
        up_ok, down_ok = self.unit_move_feasibility(w)
        moves: list[tuple[int, int]] = []
        for i in range(self.n):
            if up_ok[i]:
                moves.append((i, +1))
            if down_ok[i]:
                moves.append((i, -1))
        return moves
