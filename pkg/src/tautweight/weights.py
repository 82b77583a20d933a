"""Weight pairs, the change of variables that flattens the fidelity weight,
and assembly of the taut-string constraint tube.

A :class:`WeightPair` holds the fidelity weight ``phi``, the variation weight
``rho`` and the regularization strength ``alpha``.  The transform
``T(s) = integral of phi over (0, s)`` maps the original coordinate to one in
which the denoising problem becomes a shortest-path (taut string) problem in
the tube ``antiderivative(f) -/+ alpha * rho`` with pinned endpoints.

Closed forms are used wherever a representation admits them (``power`` weights
``r**(d-1)`` and power-law data); tabulated weights fall back to trapezoid
accumulation with a linearly extrapolated head on (0, t0).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    DivergentDataError,
    GridMismatchError,
    InfeasibleTubeError,
    ParameterError,
    WeightValidityError,
)
from .grids import Grid, SampledFunction, cumulative_integral


def _validate_positive_interior(values: np.ndarray, what: str) -> None:
    # weights must be > 0 on the open interval; they may vanish at endpoints
    if np.any(values < 0):
        raise WeightValidityError(f"{what} must be nonnegative")
    if np.any(values[1:-1] <= 0):
        raise WeightValidityError(f"{what} must be positive on interior knots")


@dataclass(frozen=True)
class WeightPair:
    """Fidelity weight phi, variation weight rho, and strength alpha.

    ``phi_kind`` / ``rho_kind`` are ``"power"`` (r**(d-1), needs ``d``),
    ``"unit"``, or ``"table"`` (explicit samples in ``phi_table`` /
    ``rho_table``).
    """

    alpha: float
    phi_kind: str = "unit"
    rho_kind: str = "unit"
    d: Optional[int] = None
    phi_table: Optional[SampledFunction] = None
    rho_table: Optional[SampledFunction] = None

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        for kind, table, what in (
            (self.phi_kind, self.phi_table, "phi"),
            (self.rho_kind, self.rho_table, "rho"),
        ):
            if kind == "power":
                if self.d is None or int(self.d) != self.d or self.d < 2:
                    raise ParameterError("power weights need integer d >= 2")
            elif kind == "table":
                if table is None:
                    raise ParameterError(f"tabulated {what} needs samples")
                _validate_positive_interior(table.values, what)
            elif kind != "unit":
                raise ParameterError(f"unknown weight kind {kind!r}")

    @classmethod
    def power(cls, d: int, alpha: float) -> "WeightPair":
        """phi = rho = r**(d-1), the radial reduction on the unit ball."""
        return cls(alpha=alpha, phi_kind="power", rho_kind="power", d=d)

    @classmethod
    def unit(cls, alpha: float) -> "WeightPair":
        return cls(alpha=alpha)

    def _eval(self, kind: str, table: Optional[SampledFunction], s: np.ndarray) -> np.ndarray:
        if kind == "power":
            return np.asarray(s, dtype=float) ** (self.d - 1)
        if kind == "unit":
            return np.ones_like(np.asarray(s, dtype=float))
        return table(s)

    def phi(self, s) -> np.ndarray:
        return self._eval(self.phi_kind, self.phi_table, s)

    def rho(self, s) -> np.ndarray:
        return self._eval(self.rho_kind, self.rho_table, s)

    def rho_drift(self, s) -> np.ndarray:
        """rho'/phi, the wall-following drift; (d-1)/r for power weights."""
        s = np.asarray(s, dtype=float)
        if self.rho_kind == "power" and self.phi_kind == "power":
            return (self.d - 1) / s
        rho = self.rho(s)
        phi = self.phi(s)
        drho = np.gradient(rho, s)
        return drho / phi


def _head_mass(grid: Grid, values: np.ndarray) -> float:
    """Mass of a tabulated nonnegative integrand on (0, t0), by linear
    extrapolation of the first two samples down to 0 (triangle rule)."""
    a = grid.a
    if a <= 0:
        return 0.0
    s0, s1 = grid.knots[0], grid.knots[1]
    g0, g1 = values[0], values[1]
    g_at_0 = g0 - s0 * (g1 - g0) / (s1 - s0)
    return 0.5 * a * (max(g_at_0, 0.0) + g0)


@dataclass(frozen=True, eq=False)
class TransformMap:
    """Monotone map T(s) = integral of phi on (0, s) and its inverse."""

    s_grid: Grid
    t_values: np.ndarray
    weights: WeightPair

    def __post_init__(self):
        t = np.array(self.t_values, dtype=float)
        if t.shape != self.s_grid.knots.shape:
            raise GridMismatchError("one transform value per knot required")
        if not np.all(np.diff(t) > 0):
            raise WeightValidityError("transform must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "t_values", t)

    def forward(self, s) -> np.ndarray:
        if self.weights.phi_kind == "power":
            d = self.weights.d
            return np.asarray(s, dtype=float) ** d / d
        if self.weights.phi_kind == "unit":
            return np.asarray(s, dtype=float)
        return np.interp(s, self.s_grid.knots, self.t_values)

    def invert(self, t) -> np.ndarray:
        if self.weights.phi_kind == "power":
            d = self.weights.d
            return (d * np.asarray(t, dtype=float)) ** (1.0 / d)
        if self.weights.phi_kind == "unit":
            return np.asarray(t, dtype=float)
        return np.interp(t, self.t_values, self.s_grid.knots)

    @property
    def t_grid(self) -> Grid:
        return Grid(self.t_values)


def build_transform(w: WeightPair, grid: Grid) -> TransformMap:
    """Cumulative integral of phi on the grid, with the (0, t0) head added.

    Power and unit weights use exact antiderivatives; tabulated weights use
    trapezoid accumulation plus an extrapolated head.
    """
    s = grid.knots
    if grid.a < 0 or grid.b > 1 + 1e-12:
        raise ParameterError("weight transform is defined on grids inside [0, 1]")
    if w.phi_kind == "power":
        t = s ** w.d / w.d
    elif w.phi_kind == "unit":
        t = s.copy()
    else:
        phi_vals = w.phi(s)
        _validate_positive_interior(phi_vals, "phi")
        head = _head_mass(grid, phi_vals)
        t = head + cumulative_integral(SampledFunction(grid, phi_vals))
    return TransformMap(grid, t, w)


def antiderivative(
    f: SampledFunction, w: WeightPair, power_beta: Optional[float] = None
) -> SampledFunction:
    """F(s) = integral of f * phi over (0, s), sampled on f's grid.

    ``power_beta`` declares f(r) = r**(-beta); combined with a power weight
    this gives the exact head and values F(s) = s**(d-beta)/(d-beta), which
    is required near the singularity where trapezoid quadrature degrades.
    """
    s = f.grid.knots
    if power_beta is not None and w.phi_kind == "power":
        beta = float(power_beta)
        if beta >= w.d:
            raise DivergentDataError(
                f"integral of r**(-{beta}) * r**({w.d - 1}) diverges at 0"
            )
        F = s ** (w.d - beta) / (w.d - beta)
        return SampledFunction(f.grid, F)
    integrand = f.values * w.phi(s)
    head = _head_mass(f.grid, integrand) if f.grid.a > 0 else 0.0
    return SampledFunction(f.grid, head + cumulative_integral(f.with_values(integrand)))


@dataclass(frozen=True, eq=False)
class TubeProblem:
    """Constraint tube for the taut string on the transformed grid.

    ``lower``/``upper`` already include the endpoint pinning: at the first and
    last knot both walls equal the pinned ordinate.
    """

    t_grid: Grid
    lower: np.ndarray
    upper: np.ndarray
    left_value: float
    right_value: float

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float)
        up = np.array(self.upper, dtype=float)
        if lo.shape != self.t_grid.knots.shape or up.shape != self.t_grid.knots.shape:
            raise GridMismatchError("tube walls must match the grid")
        if np.any(lo > up):
            raise InfeasibleTubeError("lower wall exceeds upper wall")
        for i, pin in ((0, self.left_value), (-1, self.right_value)):
            if not (lo[i] <= pin <= up[i]):
                raise InfeasibleTubeError("endpoint pin lies outside the tube")
        lo.setflags(write=False)
        up.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower


def make_tube(t_grid: Grid, lower, upper, left_value: float, right_value: float) -> TubeProblem:
    """Tube from raw walls; pins both endpoints by collapsing the walls there."""
    lo = np.array(lower, dtype=float)
    up = np.array(upper, dtype=float)
    if np.any(lo > up):
        raise InfeasibleTubeError("lower wall exceeds upper wall")
    if not (lo[0] <= left_value <= up[0] and lo[-1] <= right_value <= up[-1]):
        raise InfeasibleTubeError("endpoint pin lies outside the tube")
    lo[0] = up[0] = left_value
    lo[-1] = up[-1] = right_value
    return TubeProblem(t_grid, lo, up, left_value, right_value)


def build_tube(
    f: SampledFunction,
    w: WeightPair,
    tm: TransformMap,
    power_beta: Optional[float] = None,
) -> TubeProblem:
    """Tube [F - alpha*rho, F + alpha*rho] on the transformed grid.

    The transformed grid is the image of the sample grid, so the data
    antiderivative and the variation weight re-index knot-for-knot.  Endpoints
    are pinned to the antiderivative: the left pin plays the role of a
    vanishing primitive at the left edge, the right pin enforces the natural
    (Neumann) boundary condition.  For grids starting at a > 0 the mass of
    (f - u) * phi on (0, a) is not representable; it is reported downstream as
    a head residual instead of being forced to zero.
    """
    if not f.grid.same_as(tm.s_grid):
        raise GridMismatchError("data and transform must share a grid")
    F = antiderivative(f, w, power_beta=power_beta)
    rho_vals = w.rho(f.grid.knots)
    _validate_positive_interior(rho_vals, "rho")
    half_width = w.alpha * rho_vals
    lower = F.values - half_width
    upper = F.values + half_width
    return make_tube(tm.t_grid, lower, upper, float(F.values[0]), float(F.values[-1]))
