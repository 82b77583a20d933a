"""Taut string through a non-uniform tube, with a discrete KKT certificate.

The solver computes the shortest path from the left pin to the right pin that
stays inside ``[lower, upper]`` at every knot (linear interpolation between
knots).  That path is also the unique minimizer of the discrete quadratic
energy ``sum (dU_i)^2 / dt_i``: both objectives are strictly convex in the
interior values and share the same KKT conditions, namely that the path is
straight at free knots, may kink downward only where it touches the lower
wall, and upward only at the upper wall.  The certificate below checks exactly
these conditions, so the contract is independent of the sweep used here.

The sweep is the classical funnel (rubber-band) construction: walk the gates
left to right keeping the convex hull of upper constraints and the concave
hull of lower constraints seen from the current apex; when a new gate pinches
the funnel shut, the apex advances along the opposite hull and every point it
passes becomes a committed contact vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleTubeError
from .grids import Grid, SampledFunction
from .weights import TubeProblem

CONTACT_LOWER = -1
CONTACT_FREE = 0
CONTACT_UPPER = 1

_LABELS = {CONTACT_LOWER: "lower", CONTACT_FREE: "free", CONTACT_UPPER: "upper"}


@dataclass(frozen=True, eq=False)
class TautString:
    """Solution path: values at knots, per-cell slopes, per-knot contact codes."""

    t_grid: Grid
    values: np.ndarray
    slopes: np.ndarray
    contact: np.ndarray  # int8 codes: -1 lower, 0 free, +1 upper

    @property
    def contact_labels(self) -> list:
        return [_LABELS[int(c)] for c in self.contact]


@dataclass(frozen=True)
class KktReport:
    max_kink_violation: float
    max_feasibility_violation: float
    n_segments: int
    kink_tol: float
    feas_tol: float

    @property
    def passed(self) -> bool:
        return (
            self.max_kink_violation <= self.kink_tol
            and self.max_feasibility_violation <= self.feas_tol
        )

    def as_dict(self) -> dict:
        return {
            "max_kink_violation": self.max_kink_violation,
            "max_feasibility_violation": self.max_feasibility_violation,
            "n_segments": self.n_segments,
            "kink_tol": self.kink_tol,
            "feas_tol": self.feas_tol,
            "passed": self.passed,
        }


def _interpolate_vertices(t: np.ndarray, vertices: list) -> np.ndarray:
    """Fill knot values from the committed polyline vertices."""
    values = np.empty_like(t)
    for (i, yi), (j, yj) in zip(vertices[:-1], vertices[1:]):
        values[i:j] = yi + (t[i:j] - t[i]) * ((yj - yi) / (t[j] - t[i]))
    values[-1] = vertices[-1][1]
    return values


def solve_tube(p: TubeProblem) -> TautString:
    """Shortest admissible path through the tube; see module docstring.

    Runs in O(n): every gate point is pushed onto a hull at most once and
    popped at most once.
    """
    t = p.t_grid.knots
    lo = p.lower
    up = p.upper
    n = t.size

    # funnel state: committed apex plus the two hull chains of candidate
    # turn points, stored as (knot index, ordinate)
    apex_i, apex_y = 0, float(p.left_value)
    upper_chain: list = []
    lower_chain: list = []
    upper_head = 0  # chains are lists with a moving head to get O(1) popleft
    lower_head = 0
    committed = [(0, float(p.left_value))]

    def slope(i, yi, j, yj):
        return (yj - yi) / (t[j] - t[i])

    def add(j, y, side):
        nonlocal apex_i, apex_y, upper_head, lower_head
        if side > 0:  # ceiling point: keep upper hull convex (slopes increasing)
            chain, head = upper_chain, upper_head
            while len(chain) > head:
                li, ly = chain[-1]
                pi, py = chain[-2] if len(chain) - head >= 2 else (apex_i, apex_y)
                if slope(pi, py, li, ly) >= slope(li, ly, j, y):
                    chain.pop()
                else:
                    break
            if len(chain) > upper_head:
                chain.append((j, y))
                return
            # chain emptied: the new ceiling may cut below the floor hull,
            # forcing the path to bend around floor points
            while len(lower_chain) > lower_head:
                hi, hy = lower_chain[lower_head]
                if slope(apex_i, apex_y, j, y) < slope(apex_i, apex_y, hi, hy):
                    apex_i, apex_y = hi, hy
                    committed.append((hi, hy))
                    lower_head += 1
                else:
                    break
            upper_chain.append((j, y))
        else:  # floor point: keep lower hull concave (slopes decreasing)
            chain, head = lower_chain, lower_head
            while len(chain) > head:
                li, ly = chain[-1]
                pi, py = chain[-2] if len(chain) - head >= 2 else (apex_i, apex_y)
                if slope(pi, py, li, ly) <= slope(li, ly, j, y):
                    chain.pop()
                else:
                    break
            if len(chain) > lower_head:
                chain.append((j, y))
                return
            while len(upper_chain) > upper_head:
                hi, hy = upper_chain[upper_head]
                if slope(apex_i, apex_y, j, y) > slope(apex_i, apex_y, hi, hy):
                    apex_i, apex_y = hi, hy
                    committed.append((hi, hy))
                    upper_head += 1
                else:
                    break
            lower_chain.append((j, y))

    for j in range(1, n):
        add(j, float(up[j]), +1)
        add(j, float(lo[j]), -1)

    committed.append((n - 1, float(p.right_value)))
    values = _interpolate_vertices(t, committed)

    dt = p.t_grid.widths
    slopes = np.diff(values) / dt

    # contact labels by proximity; ties at pinch points resolved by kink sign
    scale = max(1.0, float(np.max(up - lo)))
    ctol = 1e-9 * scale
    near_lo = values - lo <= ctol
    near_up = up - values <= ctol
    contact = np.zeros(n, dtype=np.int8)
    contact[near_lo] = CONTACT_LOWER
    contact[near_up] = CONTACT_UPPER
    both = near_lo & near_up
    if np.any(both):
        kink = np.zeros(n)
        kink[1:-1] = slopes[1:] - slopes[:-1]
        contact[both] = np.where(kink[both] > 0, CONTACT_UPPER, CONTACT_LOWER)
    contact[0] = contact[-1] = CONTACT_FREE  # pinned ends carry no multiplier

    return TautString(p.t_grid, values, slopes, contact)


def kkt_certificate(
    s: TautString, p: TubeProblem, kink_tol: float = 1e-7, feas_tol: float = 1e-9
) -> KktReport:
    """Check stationarity and feasibility of a candidate path.

    At interior knot i with slope change d_i = slopes[i] - slopes[i-1]:
    free knots must be straight (|d_i| <= tol), lower contacts may only kink
    concavely (d_i <= tol), upper contacts only convexly (d_i >= -tol).
    """
    if not s.t_grid.same_as(p.t_grid):
        raise InfeasibleTubeError("solution and tube grids differ")
    v = s.values
    feas = max(float(np.max(p.lower - v)), float(np.max(v - p.upper)), 0.0)

    delta = s.slopes[1:] - s.slopes[:-1]
    c = s.contact[1:-1]
    viol = np.where(
        c == CONTACT_FREE,
        np.abs(delta),
        np.where(c == CONTACT_LOWER, np.maximum(delta, 0.0), np.maximum(-delta, 0.0)),
    )
    max_kink = float(viol.max()) if viol.size else 0.0

    runs = 1 + int(np.count_nonzero(np.diff(s.contact)))
    return KktReport(max_kink, feas, runs, kink_tol, feas_tol)


def derivative_signal(s: TautString) -> SampledFunction:
    """Per-cell slopes as a piecewise-constant signal on cell midpoints."""
    return SampledFunction(Grid(s.t_grid.midpoints), s.slopes)


def string_energy(values: np.ndarray, t: np.ndarray) -> float:
    """Discrete quadratic energy sum (dU)^2/dt of a path on knots t."""
    dv = np.diff(values)
    return float(np.sum(dv * dv / np.diff(t)))
